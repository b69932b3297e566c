#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "mottsim/stepper.hpp"

namespace mottsim {

class TraceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// CSV form of a propagation trace. Step and sample records share one table,
// merged chronologically (a sample at t precedes the step starting at t);
// the "kind" column tells them apart. Observable and drive columns carry
// "obs:" and "drive:" prefixes so a parser can recover the names. Numbers
// are written with enough digits to round-trip exactly.
std::string trace_to_csv(const PropagationTrace& trace,
                         const std::vector<std::string>& observable_names,
                         const std::vector<std::string>& drive_names);

struct ParsedTrace {
  PropagationTrace trace;
  std::vector<std::string> observable_names;
  std::vector<std::string> drive_names;
};

ParsedTrace trace_from_csv(const std::string& text);

// Structural invariants of an adaptive or fixed run: accepted steps tile
// [t_start, t_end] (2 ulp slack per boundary, since landing on an output
// time assigns t rather than accumulating it), rejected steps repeat their
// start time, matvec counts increase strictly, estimates are nonnegative
// and only breakdown rejections carry inf. Throws TraceError on violation.
void validate_trace(const PropagationTrace& trace, double t_start,
                    double t_end);

}  // namespace mottsim
