#pragma once

#include <cstdint>

#include "mottsim/config.hpp"
#include "mottsim/experiments.hpp"
#include "mottsim/krylov.hpp"

// Shared model setups: the six-site transistor scaled down to two and four
// sites so dense oracles stay cheap. Bias and interaction keep the default
// ratios (U = 10 |v|, end-site offsets 1.04 U).
namespace testbeds {

mottsim::ModelConfig n2_model();
mottsim::ModelConfig n4_model();
mottsim::DriveConfig drive(double t0 = 10.0, double timescale = 0.03125);

mottsim::GroundStateResult ground_of(const mottsim::BuiltModel& model,
                                     double tol = 1e-12,
                                     std::uint64_t seed = 12345);

// Ground state carried to t_probe with a tight adaptive fourth-order run;
// the in-pulse launch state for local-error studies.
mottsim::CVector state_at(const mottsim::BuiltModel& model, double t_start,
                          double t_probe, double tol = 1e-11);

}  // namespace testbeds
