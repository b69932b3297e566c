#include "mottsim/stepper.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

namespace mottsim {

std::pair<double, bool> next_step_size(const ControllerConfig& cfg, double tau,
                                       double est, int p) {
  const bool accept = est <= cfg.tol;
  double fac = cfg.fac_max;
  if (est > 0.0) {
    fac = cfg.safety * std::pow(cfg.tol / est, 1.0 / (p + 1));
    fac = std::clamp(fac, cfg.fac_min, cfg.fac_max);
  }
  const double hi =
      cfg.tau_max > 0.0 ? cfg.tau_max : std::numeric_limits<double>::infinity();
  const double tau_new = std::clamp(fac * tau, std::min(cfg.tau_min, hi), hi);
  return {tau_new, accept};
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void validate_state(const Generator& gen, std::span<const Complex> psi0) {
  if (psi0.size() != gen.dim())
    throw std::domain_error("propagate: state dimension mismatch");
  if (std::abs(norm2(psi0) - 1.0) > 1e-6)
    throw std::domain_error("propagate: initial state must be normalized");
}

void validate_outputs(std::span<const double> out, double t_start,
                      double t_end) {
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!(out[i] >= t_start && out[i] <= t_end))
      throw std::domain_error("propagate: output time outside [t_start, t_end]");
    if (i > 0 && !(out[i] > out[i - 1]))
      throw std::domain_error("propagate: output times must increase strictly");
  }
}

// 1e-2 T when some logistic switch is still moving at t_start (scaled slope
// g' T above 1e-3, i.e. within roughly 7 T of the switch), otherwise
// span/100. Channels with an empty diagonal have no effect and are skipped.
double default_tau_init(const Generator& gen, double t_start, double span) {
  double t_active = 0.0;
  for (std::size_t b = 0; b < gen.n_channels(); ++b) {
    if (gen.channel(b).h_pot.values().empty()) continue;
    const auto* logistic =
        dynamic_cast<const DriveProfile*>(gen.channel(b).profile.get());
    if (!logistic) continue;
    const double T = logistic->timescale();
    if (logistic->derivative(1, t_start) * T >= 1e-3)
      t_active = t_active == 0.0 ? T : std::min(t_active, T);
  }
  return t_active > 0.0 ? 1e-2 * t_active : span / 100.0;
}

ControllerConfig resolve_controller(const ControllerConfig& in,
                                    const Generator& gen, double t_start,
                                    double t_end) {
  if (!(t_end > t_start))
    throw std::domain_error("propagate: t_end must exceed t_start");
  ControllerConfig cfg = in;
  const double span = t_end - t_start;
  if (!(cfg.tol > 0.0))
    throw std::domain_error("propagate: tol must be positive");
  if (!(cfg.safety > 0.0 && cfg.safety <= 1.0))
    throw std::domain_error("propagate: safety must lie in (0, 1]");
  if (!(cfg.fac_min > 0.0 && cfg.fac_min < 1.0 && cfg.fac_max > 1.0))
    throw std::domain_error("propagate: need 0 < fac_min < 1 < fac_max");
  if (cfg.tau_max <= 0.0) cfg.tau_max = span;
  if (!(cfg.tau_min > 0.0 && cfg.tau_min <= cfg.tau_max))
    throw std::domain_error("propagate: need 0 < tau_min <= tau_max");
  if (cfg.tau_init <= 0.0) cfg.tau_init = default_tau_init(gen, t_start, span);
  cfg.tau_init = std::clamp(cfg.tau_init, cfg.tau_min, cfg.tau_max);
  return cfg;
}

void push_sample(PropagationTrace& trace, const Generator& gen,
                 const SampleFn& sample, double t,
                 std::span<const Complex> psi) {
  SampleRecord s;
  s.t = t;
  if (sample) s.observables = sample(t, psi);
  s.drives.reserve(gen.n_channels());
  for (std::size_t b = 0; b < gen.n_channels(); ++b)
    s.drives.push_back(gen.drive_value(b, t));
  trace.samples.push_back(std::move(s));
}

struct AttemptOutcome {
  bool breakdown = false;
  CVector u_next;
  double est = 0.0;
};

using AttemptFn =
    std::function<AttemptOutcome(double, double, std::span<const Complex>)>;

PropagationResult adaptive_loop(int order, const Generator& gen,
                                std::span<const Complex> psi0, double t_start,
                                double t_end, const ControllerConfig& cfg_in,
                                std::span<const double> outputs,
                                const SampleFn& sample, const AttemptFn& attempt,
                                const std::function<void()>& on_accept) {
  validate_state(gen, psi0);
  validate_outputs(outputs, t_start, t_end);
  const ControllerConfig cfg = resolve_controller(cfg_in, gen, t_start, t_end);

  PropagationTrace trace;
  const std::uint64_t mv0 = gen.matvec_count();
  CVector psi(psi0.begin(), psi0.end());
  double t = t_start;
  double tau = cfg.tau_init;
  std::size_t out_idx = 0;

  if (out_idx < outputs.size() && outputs[out_idx] == t) {
    push_sample(trace, gen, sample, t, psi);
    ++out_idx;
  }

  while (t < t_end) {
    const double boundary = out_idx < outputs.size() ? outputs[out_idx] : t_end;
    const double remaining = boundary - t;
    double tau_try = tau;
    bool lands = false;
    if (tau_try >= remaining) {
      tau_try = remaining;
      lands = true;
    } else if (tau_try >= 0.5 * remaining) {
      // Half-split lookahead: never leave a sliver in front of the boundary
      // shorter than the step that would create it.
      tau_try = 0.5 * remaining;
    }

    AttemptOutcome a = attempt(t, tau_try, psi);
    if (a.breakdown || !std::isfinite(a.est)) {
      // No usable estimate, so the controller cannot steer; halve until the
      // Krylov space can resolve the propagator, give up only at tau_min.
      trace.steps.push_back(
          {t, tau_try, kInf, false, gen.matvec_count() - mv0});
      tau = 0.5 * tau_try;
      if (tau < cfg.tau_min)
        throw PropagationError(
            "propagate: step size underflow after breakdown at t = " +
                std::to_string(t),
            std::move(trace));
      continue;
    }

    const auto [tau_next, accept] = next_step_size(cfg, tau_try, a.est, order);
    trace.steps.push_back(
        {t, tau_try, a.est, accept, gen.matvec_count() - mv0});

    if (!accept) {
      // A rejection that cannot shrink is pinned at tau_min: unattainable.
      if (tau_next >= tau_try)
        throw PropagationError(
            "propagate: tolerance unattainable, step floor reached at t = " +
                std::to_string(t),
            std::move(trace));
      tau = tau_next;
      continue;
    }

    psi = std::move(a.u_next);
    on_accept();
    if (lands) {
      t = boundary;
      if (out_idx < outputs.size() && outputs[out_idx] == t) {
        push_sample(trace, gen, sample, t, psi);
        ++out_idx;
      }
    } else {
      t += tau_try;
    }
    tau = tau_next;
  }

  return {std::move(psi), std::move(trace)};
}

using FixedKernel =
    std::function<CVector(double, double, std::span<const Complex>)>;

PropagationResult fixed_loop(const Generator& gen,
                             std::span<const Complex> psi0, double t_start,
                             double t_end, long n_steps,
                             std::span<const double> outputs,
                             const SampleFn& sample, const FixedKernel& kernel) {
  validate_state(gen, psi0);
  validate_outputs(outputs, t_start, t_end);
  if (!(t_end > t_start))
    throw std::domain_error("propagate: t_end must exceed t_start");
  if (n_steps < 1) throw std::domain_error("propagate: n_steps must be positive");

  const double span = t_end - t_start;
  const double tau_u = span / static_cast<double>(n_steps);
  const auto matches = [](double a, double b) {
    return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b));
  };
  for (const double o : outputs) {
    const long k = std::lround((o - t_start) / tau_u);
    const long kc = std::clamp(k, 0L, n_steps);
    const double tk = kc == n_steps ? t_end : t_start + kc * tau_u;
    if (!matches(o, tk))
      throw std::domain_error(
          "propagate_fixed: output time off the uniform step grid");
  }

  PropagationTrace trace;
  const std::uint64_t mv0 = gen.matvec_count();
  CVector psi(psi0.begin(), psi0.end());
  std::size_t out_idx = 0;

  if (out_idx < outputs.size() && matches(outputs[out_idx], t_start)) {
    push_sample(trace, gen, sample, outputs[out_idx], psi);
    ++out_idx;
  }

  double t = t_start;
  for (long k = 0; k < n_steps; ++k) {
    const double t_next =
        k + 1 == n_steps ? t_end : t_start + (k + 1) * tau_u;
    const double tau = t_next - t;
    try {
      psi = kernel(t, tau, psi);
    } catch (const KrylovNoConvergence& e) {
      trace.steps.push_back({t, tau, kInf, false, gen.matvec_count() - mv0});
      throw PropagationError(std::string("propagate_fixed: ") + e.what(),
                             std::move(trace));
    }
    trace.steps.push_back({t, tau, 0.0, true, gen.matvec_count() - mv0});
    t = t_next;
    // Samples carry the requested output time, not the accumulated grid
    // time a few ulp away from it; the adaptive loop does the same.
    if (out_idx < outputs.size() && matches(outputs[out_idx], t)) {
      push_sample(trace, gen, sample, outputs[out_idx], psi);
      ++out_idx;
    }
  }

  return {std::move(psi), std::move(trace)};
}

}  // namespace

namespace {

// Composite 2-point Gauss mean of g_b over [t, t + tau]; its quadrature
// error sits a factor panels^4 below a plain 2-node rule, so the comparison
// against the scheme's own node quadrature isolates what the scheme misses.
double refined_drive_mean(const Generator& gen, std::size_t b, double t,
                          double tau) {
  constexpr int panels = 8;
  constexpr double off = 0.28867513459481287;  // sqrt(3)/6
  const double h = tau / panels;
  double acc = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = t + (p + 0.5) * h;
    acc += gen.drive_value(b, mid - off * h) +
           gen.drive_value(b, mid + off * h);
  }
  return acc / (2 * panels);
}

}  // namespace

PropagationResult propagate_adaptive(const CFMScheme& scheme,
                                     const Generator& gen,
                                     std::span<const Complex> psi0,
                                     double t_start, double t_end,
                                     const ControllerConfig& cfg,
                                     const KrylovConfig& kcfg,
                                     std::span<const double> output_times,
                                     const SampleFn& sample) {
  if (scheme.order < 1)
    throw std::domain_error("propagate_adaptive: scheme order must be positive");
  const int k_max = cfg.k_max > 0 ? cfg.k_max : scheme.order;

  // The defect at tau is blind to drive variation strictly between its
  // sample points: a switch hiding inside a long step leaves the residual at
  // the endpoint tiny while the step error is O(1). Guard by comparing the
  // scheme's node quadrature of each g_b against a refined mean; the
  // mismatch delta costs ~ tau * delta * |H_pot u| to first order. Scalar
  // evaluations only, and it vanishes with the scheme's own quadrature error
  // as tau -> 0, so accepted-step statistics stay defect-driven.
  std::vector<double> node_weights(scheme.n_nodes(), 0.0);
  for (const auto& row : scheme.coeffs)
    for (std::size_t k = 0; k < row.size() && k < node_weights.size(); ++k)
      node_weights[k] += row[k];
  std::vector<std::vector<double>> diagonals(gen.n_channels());
  for (std::size_t b = 0; b < gen.n_channels(); ++b)
    diagonals[b] = gen.channel(b).h_pot.real_diagonal();

  const auto alias_estimate = [&](double t, double tau,
                                  std::span<const Complex> u) {
    double est = 0.0;
    for (std::size_t b = 0; b < gen.n_channels(); ++b) {
      double q_scheme = 0.0;
      for (std::size_t k = 0; k < scheme.nodes.size(); ++k)
        q_scheme +=
            node_weights[k] * gen.drive_value(b, t + scheme.nodes[k] * tau);
      const double delta =
          std::abs(q_scheme - refined_drive_mean(gen, b, t, tau));
      if (delta == 0.0) continue;
      double w2 = 0.0;
      for (std::size_t i = 0; i < u.size(); ++i)
        w2 += diagonals[b][i] * diagonals[b][i] * std::norm(u[i]);
      est += tau * delta * std::sqrt(w2);
    }
    return est;
  };

  const AttemptFn attempt = [&](double t, double tau,
                                std::span<const Complex> u) {
    AttemptOutcome out;
    try {
      StepResult r = cfm_step(scheme, gen, t, tau, u, kcfg);
      const double defect =
          defect_estimate(scheme, gen, t, tau, u, r.u_next, kcfg, k_max);
      out.est = std::max(defect, alias_estimate(t, tau, u));
      out.u_next = std::move(r.u_next);
    } catch (const KrylovNoConvergence&) {
      out.breakdown = true;
    }
    return out;
  };
  return adaptive_loop(scheme.order, gen, psi0, t_start, t_end, cfg,
                       output_times, sample, attempt, [] {});
}

PropagationResult propagate_fixed(const CFMScheme& scheme, const Generator& gen,
                                  std::span<const Complex> psi0, double t_start,
                                  double t_end, long n_steps,
                                  const KrylovConfig& kcfg,
                                  std::span<const double> output_times,
                                  const SampleFn& sample) {
  const FixedKernel kernel = [&](double t, double tau,
                                 std::span<const Complex> u) {
    return cfm_step(scheme, gen, t, tau, u, kcfg).u_next;
  };
  return fixed_loop(gen, psi0, t_start, t_end, n_steps, output_times, sample,
                    kernel);
}

PropagationResult propagate_dopri45_adaptive(
    const Generator& gen, std::span<const Complex> psi0, double t_start,
    double t_end, const ControllerConfig& cfg,
    std::span<const double> output_times, const SampleFn& sample) {
  CVector k1;         // first stage at the current (t, psi)
  CVector k_pending;  // last stage of the attempt awaiting acceptance

  const AttemptFn attempt = [&](double t, double tau,
                                std::span<const Complex> u) {
    if (k1.empty()) {
      k1.resize(gen.dim());
      gen.apply(t, u, k1);
    }
    Dopri45Result r = dopri45_step(gen, t, tau, u, k1);
    k_pending = std::move(r.k_last);
    AttemptOutcome out;
    out.u_next = std::move(r.u5);
    out.est = r.est;
    return out;
  };
  const auto on_accept = [&] { k1 = std::move(k_pending); };
  return adaptive_loop(4, gen, psi0, t_start, t_end, cfg, output_times, sample,
                       attempt, on_accept);
}

PropagationResult propagate_dopri45_fixed(const Generator& gen,
                                          std::span<const Complex> psi0,
                                          double t_start, double t_end,
                                          long n_steps,
                                          std::span<const double> output_times,
                                          const SampleFn& sample) {
  CVector k1;
  const FixedKernel kernel = [&](double t, double tau,
                                 std::span<const Complex> u) {
    if (k1.empty()) {
      k1.resize(gen.dim());
      gen.apply(t, u, k1);
    }
    Dopri45Result r = dopri45_step(gen, t, tau, u, k1);
    k1 = std::move(r.k_last);
    return std::move(r.u5);
  };
  return fixed_loop(gen, psi0, t_start, t_end, n_steps, output_times, sample,
                    kernel);
}

}  // namespace mottsim
