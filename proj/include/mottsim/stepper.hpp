#ifndef MOTTSIM_STEPPER_HPP
#define MOTTSIM_STEPPER_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mottsim/cfm.hpp"
#include "mottsim/krylov.hpp"
#include "mottsim/linalg.hpp"
#include "mottsim/pulse.hpp"

namespace mottsim {

struct ControllerConfig {
  double tol = 1e-7;    // local error tolerance per step
  double safety = 0.9;
  double fac_min = 0.2;  // growth clamps per step
  double fac_max = 5.0;
  double tau_min = 1e-12;  // absolute step bounds
  double tau_max = 0.0;    // 0 resolves to the propagation span
  double tau_init = 0.0;   // 0 resolves to 1e-2 T inside an active switch,
                           // else span/100
  int k_max = 0;           // defect dexp truncation; 0 resolves to the order
};

// accept = (est <= tol); tau_new = clamp(safety tau (tol/est)^(1/(p+1)),
// fac_min tau, fac_max tau) then clamped to [tau_min, tau_max]. est = 0 is
// treated as maximal growth.
std::pair<double, bool> next_step_size(const ControllerConfig& cfg, double tau,
                                       double est, int p);

struct StepRecord {
  double t;     // step start
  double tau;
  double est;   // +inf marks a Krylov-breakdown rejection; 0 in fixed mode
  bool accepted;
  std::uint64_t matvecs;  // cumulative generator applications so far
};

struct SampleRecord {
  double t;
  std::vector<double> observables;  // caller-defined, e.g. site occupations
  std::vector<double> drives;       // g_b(t) per channel
};

struct PropagationTrace {
  std::vector<StepRecord> steps;
  std::vector<SampleRecord> samples;
};

struct PropagationResult {
  CVector psi;
  PropagationTrace trace;
};

// Observable row evaluated at each output time; not counted as matvecs.
using SampleFn =
    std::function<std::vector<double>(double, std::span<const Complex>)>;

// Hard propagation failure (step-size underflow, repeated Krylov breakdown);
// carries the partial trace for flushing.
class PropagationError : public std::runtime_error {
 public:
  PropagationError(const std::string& what, PropagationTrace partial)
      : std::runtime_error(what), trace(std::move(partial)) {}

  PropagationTrace trace;
};

// Adaptive CFM propagation over [t_start, t_end]. Output times are hit by
// clipping accepted steps (no interpolation); rejected attempts are recorded.
PropagationResult propagate_adaptive(const CFMScheme& scheme,
                                     const Generator& gen,
                                     std::span<const Complex> psi0,
                                     double t_start, double t_end,
                                     const ControllerConfig& cfg,
                                     const KrylovConfig& kcfg,
                                     std::span<const double> output_times,
                                     const SampleFn& sample = {});

// Uniform tau = (t_end - t_start)/n_steps, no controller and no defect
// evaluation. Output times must lie on the step grid.
PropagationResult propagate_fixed(const CFMScheme& scheme, const Generator& gen,
                                  std::span<const Complex> psi0, double t_start,
                                  double t_end, long n_steps,
                                  const KrylovConfig& kcfg,
                                  std::span<const double> output_times,
                                  const SampleFn& sample = {});

struct Dopri45Result {
  CVector u5;      // fifth-order solution
  CVector k_last;  // A(t_n + tau) u5; valid first stage of the next step
  double est;      // ||u5 - u4||
  int matvecs;     // 7, or 6 with a reused first stage
};

// One Dormand-Prince 5(4) step for psi' = A(t) psi. Pass the previous step's
// k_last as k1 to exploit the first-same-as-last structure.
Dopri45Result dopri45_step(const Generator& gen, double t_n, double tau,
                           std::span<const Complex> u,
                           std::span<const Complex> k1 = {});

// Embedded-pair baselines with the same controller (p = 4) and trace format
// as the CFM loops.
PropagationResult propagate_dopri45_adaptive(
    const Generator& gen, std::span<const Complex> psi0, double t_start,
    double t_end, const ControllerConfig& cfg,
    std::span<const double> output_times, const SampleFn& sample = {});

PropagationResult propagate_dopri45_fixed(const Generator& gen,
                                          std::span<const Complex> psi0,
                                          double t_start, double t_end,
                                          long n_steps,
                                          std::span<const double> output_times,
                                          const SampleFn& sample = {});

}  // namespace mottsim

#endif
