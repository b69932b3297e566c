// Acceptance gate: twelve end-to-end checks covering the fermionic operator
// algebra, the Krylov engine, integrator orders, the defect estimator, and
// the adaptive-efficiency claims on the six-site transistor setup. Prints
// one line per criterion; the exit status is the number of failures.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mottsim/cfm.hpp"
#include "mottsim/config.hpp"
#include "mottsim/experiments.hpp"
#include "mottsim/fock_basis.hpp"
#include "mottsim/hubbard.hpp"
#include "mottsim/krylov.hpp"
#include "mottsim/linalg.hpp"
#include "mottsim/stepper.hpp"
#include "mottsim/trace.hpp"
#include "support/oracles.hpp"
#include "support/testbeds.hpp"

namespace {

using mottsim::Complex;
using mottsim::CVector;
using oracles::Md;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

// Dense annihilator in the full Fock basis, entries from the bit primitive.
Md lib_annihilator(const mottsim::FockBasis& basis, int orb) {
  const auto dim = static_cast<Eigen::Index>(basis.size());
  Md c = Md::Zero(dim, dim);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    if (auto r = mottsim::annihilate(basis.state(i), orb)) {
      const auto j = basis.index_of(r->first);
      c(static_cast<Eigen::Index>(*j), static_cast<Eigen::Index>(i)) =
          static_cast<double>(r->second);
    }
  }
  return c;
}

Outcome c01_operator_algebra() {
  double worst = 0.0;
  for (int n = 1; n <= 3; ++n) {
    const auto basis = mottsim::FockBasis::full(n);
    const int n_orb = 2 * n;
    const auto dim = static_cast<Eigen::Index>(basis.size());

    std::vector<Md> c;
    for (int orb = 0; orb < n_orb; ++orb) {
      c.push_back(lib_annihilator(basis, orb));
      if ((c.back() - oracles::jw_annihilator(n_orb, orb)).cwiseAbs().maxCoeff() != 0.0)
        return {false, "annihilator differs from the Jordan-Wigner product at N = " +
                           std::to_string(n)};
    }
    const Md id = Md::Identity(dim, dim);
    for (int a = 0; a < n_orb; ++a) {
      for (int b = 0; b < n_orb; ++b) {
        const Md acc = c[a] * c[b].adjoint() + c[b].adjoint() * c[a];
        const Md ann = c[a] * c[b] + c[b] * c[a];
        const double want = a == b ? 1.0 : 0.0;
        if ((acc - want * id).cwiseAbs().maxCoeff() != 0.0 ||
            ann.cwiseAbs().maxCoeff() != 0.0)
          return {false, "anticommutator of orbitals " + std::to_string(a) + "," +
                             std::to_string(b) + " deviates at N = " + std::to_string(n)};
      }
    }

    const auto params = mottsim::HubbardParams::chain(n, -1.0, 10.0);
    const Md h_full = oracles::to_dense(mottsim::assemble_static(params, basis));
    worst = std::max(worst, (h_full - h_full.adjoint()).cwiseAbs().maxCoeff());
    std::vector<double> pots(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) pots[static_cast<std::size_t>(i)] = 0.7 * i - 0.4;
    const Md h_pot = oracles::to_dense(mottsim::assemble_potential(pots, basis));
    worst = std::max(worst, (h_pot - h_pot.adjoint()).cwiseAbs().maxCoeff());

    if (n >= 2) {
      const mottsim::Sector sec{(n + 1) / 2, n / 2};
      const auto sbasis = mottsim::FockBasis::in_sector(n, sec);
      const Md h_sec = oracles::to_dense(mottsim::assemble_static(params, sbasis));
      std::vector<Eigen::Index> where(sbasis.size());
      for (std::size_t a = 0; a < sbasis.size(); ++a)
        where[a] = static_cast<Eigen::Index>(*basis.index_of(sbasis.state(a)));
      for (std::size_t a = 0; a < sbasis.size(); ++a)
        for (std::size_t b = 0; b < sbasis.size(); ++b)
          worst = std::max(worst, std::abs(h_sec(static_cast<Eigen::Index>(a),
                                                 static_cast<Eigen::Index>(b)) -
                                           h_full(where[a], where[b])));
      for (std::size_t b = 0; b < sbasis.size(); ++b)
        for (Eigen::Index row = 0; row < dim; ++row) {
          const bool inside =
              std::find(where.begin(), where.end(), row) != where.end();
          if (!inside && std::abs(h_full(row, where[b])) != 0.0)
            return {false, "static operator couples out of the sector at N = " +
                               std::to_string(n)};
        }
    }
  }
  if (worst > 1e-12) return {false, "floating deviation " + fmt(worst) + " exceeds 1e-12"};
  return {true, "algebra exact, floating deviations <= " + fmt(worst) + " for N <= 3"};
}

Outcome c02_krylov_oracle() {
  oracles::SplitMix rng(0x5eedULL);
  const mottsim::KrylovConfig kcfg{1e-12, 96, true};
  const double taus[] = {0.05, 0.3, 1.0};
  double worst = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    const int dim = 2 + static_cast<int>(rng.next() % 63);
    const Md h = oracles::random_hermitian(dim, rng);
    const CVector v = oracles::random_state(static_cast<std::size_t>(dim), rng);
    const double tau = taus[rep % 3];
    const mottsim::HermitianApply apply =
        [&h](std::span<const Complex> x, std::span<Complex> y) {
          Eigen::Map<const Eigen::VectorXcd> xm(x.data(),
                                                static_cast<Eigen::Index>(x.size()));
          Eigen::Map<Eigen::VectorXcd> ym(y.data(),
                                          static_cast<Eigen::Index>(y.size()));
          ym.noalias() = h * xm;
        };
    const auto res = mottsim::expmv(apply, tau, v, kcfg);
    const CVector exact =
        oracles::from_eigen(oracles::expm_minus_i(h, tau) * oracles::to_eigen(v));
    worst = std::max(worst, mottsim::distance2(res.w, exact));
  }
  return {worst <= 10.0 * kcfg.tol,
          "200 cases, dim <= 64, worst 2-norm error " + fmt(worst) + " (allow 1e-11)"};
}

Outcome c03_ground_state_oracle() {
  double worst = 0.0;
  for (const double u : {0.0, 1.0, 10.0}) {
    mottsim::ExperimentConfig cfg;
    cfg.model.n_sites = 2;
    cfg.model.interaction = u;
    cfg.model.v_sd = 0.0;
    const auto rep = mottsim::run_ground_state(cfg);
    const double exact = 0.5 * (u - std::sqrt(u * u + 16.0));
    worst = std::max(worst, std::abs(rep.energy - exact));
  }
  return {worst <= 1e-10, "half-filled dimer, U in {0, 1, 10}, worst |E - E_exact| = " +
                              fmt(worst)};
}

Outcome c04_convergence_orders() {
  const auto cf2 = mottsim::builtin_scheme("CF2");
  const auto cf4 = mottsim::builtin_scheme("CF4");
  const mottsim::KrylovConfig tight{1e-13, 96, true};

  const auto m2 = mottsim::build_model(testbeds::n2_model(), testbeds::drive());
  const double tp = 10.0 + 2.0 * 0.03125;
  const CVector u2 = testbeds::state_at(m2, 0.0, tp);
  const std::vector<double> taus2 = {1.0 / 128, 1.0 / 256, 1.0 / 512, 1.0 / 1024,
                                     1.0 / 2048};
  const std::vector<double> taus4 = {1.0 / 128, 1.0 / 256, 1.0 / 512, 1.0 / 1024};
  const double s2 = mottsim::empirical_order(cf2, m2.gen, tp, u2, taus2, tight);
  const double s4 = mottsim::empirical_order(cf4, m2.gen, tp, u2, taus4, tight);

  const auto m4 = mottsim::build_model(testbeds::n4_model(), testbeds::drive());
  const double a = 9.75;
  const double b = 10.25;
  const CVector u4 = testbeds::state_at(m4, 0.0, a);
  const CVector ref = oracles::dense_reference_flow(m4.gen, a, b - a, u4, 1024);
  const auto global_slope = [&](const mottsim::CFMScheme& scheme,
                                const std::vector<long>& ns) {
    std::vector<double> hs, errs;
    for (const long n : ns) {
      const auto r = mottsim::propagate_fixed(scheme, m4.gen, u4, a, b, n, tight, {});
      hs.push_back((b - a) / static_cast<double>(n));
      errs.push_back(mottsim::distance2(r.psi, ref));
    }
    return oracles::loglog_slope(hs, errs);
  };
  const double g2 = global_slope(cf2, {64, 128, 256, 512});
  const double g4 = global_slope(cf4, {64, 128, 256});

  const bool ok = std::abs(s2 - 3.0) <= 0.2 && std::abs(s4 - 5.0) <= 0.3 &&
                  std::abs(g2 - 2.0) <= 0.2 && std::abs(g4 - 4.0) <= 0.3;
  return {ok, "local slopes " + fmt(s2) + " / " + fmt(s4) + " (want 3 / 5), global " +
                  fmt(g2) + " / " + fmt(g4) + " (want 2 / 4)"};
}

Outcome c05_local_error_bound() {
  // A slow switch keeps tau well under T, so freezing the commutator at the
  // step start is an honest leading-order bound.
  const auto model =
      mottsim::build_model(testbeds::n2_model(), testbeds::drive(10.0, 0.125));
  const CVector u = testbeds::state_at(model, 0.0, 10.0);
  const Md a0 = oracles::dense_generator(model.gen, 10.0);
  const Md a1 = oracles::dense_generator_derivative(model.gen, 1, 10.0);
  const Md a2 = oracles::dense_generator_derivative(model.gen, 2, 10.0);
  const double bnorm = oracles::spectral_norm(a0 * a1 - a1 * a0 - 0.5 * a2);
  const std::vector<double> taus = {1.0 / 256, 1.0 / 512, 1.0 / 1024, 1.0 / 2048};
  const mottsim::KrylovConfig tight{1e-13, 96, true};
  const auto errs = mottsim::local_errors(mottsim::builtin_scheme("CF2"), model.gen,
                                          10.0, u, taus, tight);
  double worst = 0.0;
  for (std::size_t i = 0; i < taus.size(); ++i) {
    const double bound = taus[i] * taus[i] * taus[i] / 12.0 * bnorm;
    worst = std::max(worst, errs[i] / bound);
  }
  return {worst <= 1.5, "measured / commutator bound <= " + fmt(worst) +
                            " over tau 2^-8..2^-11 (allow 1.5)"};
}

Outcome c06_timescale_scaling() {
  // The T^(-p) term must outweigh lower-derivative commutator pollution of
  // size |H| T^(-p+1), so the chain is scaled down from the transistor
  // defaults and the probe sits at the zero of the switch's third
  // derivative, t0 + ln(2 + sqrt(3)) T, which removes the leading
  // pollution family without touching the T^(-4) signal.
  const double tau = 1.0 / 1024;
  const double xstar = std::log(2.0 + std::sqrt(3.0));
  const mottsim::KrylovConfig tight{1e-13, 96, true};
  const std::vector<double> one = {tau};
  mottsim::ModelConfig mc;
  mc.n_sites = 2;
  mc.interaction = 3.0;
  mc.v_sd = 6.0;
  std::vector<double> e2, e4;
  for (const double T : {0.03125, 0.015625, 0.0078125, 0.00390625}) {
    const auto model = mottsim::build_model(mc, testbeds::drive(10.0, T));
    const double tp = 10.0 + xstar * T;
    const CVector u = testbeds::state_at(model, 0.0, tp);
    e2.push_back(mottsim::local_errors(mottsim::builtin_scheme("CF2"), model.gen, tp,
                                       u, one, tight)[0]);
    e4.push_back(mottsim::local_errors(mottsim::builtin_scheme("CF4"), model.gen, tp,
                                       u, one, tight)[0]);
  }
  bool ok = true;
  std::string det;
  for (std::size_t k = 0; k + 1 < e2.size(); ++k) {
    const double r2 = e2[k + 1] / e2[k];
    const double r4 = e4[k + 1] / e4[k];
    ok = ok && r2 >= 0.7 * 4.0 && r2 <= 1.3 * 4.0 && r4 >= 0.7 * 16.0 && r4 <= 1.3 * 16.0;
    if (k) det += ", ";
    det += fmt(r2) + " / " + fmt(r4);
  }
  return {ok, "error growth per halved T: " + det + " (want 4 / 16 within 30%)"};
}

Outcome c07_estimator_correctness() {
  const auto model = mottsim::build_model(testbeds::n2_model(), testbeds::drive());
  const double tp = 10.0 + 2.0 * 0.03125;
  const CVector u = testbeds::state_at(model, 0.0, tp);
  const mottsim::KrylovConfig tight{1e-13, 96, true};
  bool ok = true;
  std::string det;
  const std::pair<const char*, double> cases[] = {{"CF2", 1.0 / 2048},
                                                  {"CF4", 1.0 / 1024}};
  for (const auto& [name, tau] : cases) {
    const auto scheme = mottsim::builtin_scheme(name);
    const auto step = mottsim::cfm_step(scheme, model.gen, tp, tau, u, tight);
    const double est = mottsim::defect_estimate(scheme, model.gen, tp, tau, u,
                                                step.u_next, tight, scheme.order);
    const std::vector<double> one = {tau};
    const double truth =
        mottsim::local_errors(scheme, model.gen, tp, u, one, tight)[0];
    const double ratio = est / truth;
    ok = ok && ratio >= 0.9 && ratio <= 1.1;
    det += std::string(name) + " " + fmt(ratio) + "  ";
  }
  return {ok, "est / |L| at the finest tau: " + det + "(want within [0.9, 1.1])"};
}

// Six-site transistor defaults shared by the efficiency criteria: model,
// half-filled ground state, and a tight reference solution at t = 50.
struct SharedN6 {
  mottsim::BuiltModel model;
  CVector psi0;
  CVector ref;
};

const SharedN6& shared_n6() {
  static SharedN6 s = [] {
    const mottsim::ExperimentConfig cfg;
    auto model = mottsim::build_model(cfg.model, cfg.drive);
    auto ground = testbeds::ground_of(model);
    mottsim::ControllerConfig ctrl;
    ctrl.tol = 1e-11;
    const mottsim::KrylovConfig kcfg{1e-12, 96, true};
    auto ref = mottsim::propagate_adaptive(mottsim::builtin_scheme("CF4"), model.gen,
                                           ground.psi, 0.0, 50.0, ctrl, kcfg, {});
    return SharedN6{std::move(model), std::move(ground.psi), std::move(ref.psi)};
  }();
  return s;
}

// The criterion-defining run: defaults (tol 1e-7, CF4, Lanczos tol 1e-12)
// over [0, 50], no output grid so the controller is observed undisturbed.
const mottsim::PropagationResult& transistor_run() {
  static mottsim::PropagationResult r = [] {
    const auto& s = shared_n6();
    const mottsim::ControllerConfig ctrl;
    const mottsim::KrylovConfig kcfg{1e-12, 96, true};
    return mottsim::propagate_adaptive(mottsim::builtin_scheme("CF4"), s.model.gen,
                                       s.psi0, 0.0, 50.0, ctrl, kcfg, {});
  }();
  return r;
}

Outcome c08_adaptive_step_behavior() {
  const auto& r = transistor_run();
  double tau_min = 1e300;
  double tau_max = 0.0;
  double t_at = 0.0;
  for (const auto& st : r.trace.steps) {
    if (!st.accepted) continue;
    if (st.tau < tau_min) {
      tau_min = st.tau;
      t_at = st.t;
    }
    tau_max = std::max(tau_max, st.tau);
  }
  const double lo = 10.0 - 20.0 * 0.03125;
  const double hi = 10.0 + 20.0 * 0.03125;
  const double ratio = tau_max / tau_min;
  const bool ok = t_at >= lo && t_at + tau_min <= hi && ratio >= 50.0;
  return {ok, "min tau " + fmt(tau_min) + " starts at t = " + fmt(t_at) +
                  " (window [" + fmt(lo) + ", " + fmt(hi) + "]), max/min = " + fmt(ratio)};
}

Outcome c09_adaptive_vs_uniform() {
  const auto& s = shared_n6();
  const mottsim::KrylovConfig kcfg{1e-12, 96, true};
  bool ok = true;
  std::string det;
  for (const char* name : {"CF2", "CF4"}) {
    const auto scheme = mottsim::builtin_scheme(name);
    int wins = 0;
    for (const double tol : {1e-5, 1e-6, 1e-7, 1e-8}) {
      mottsim::ControllerConfig ctrl;
      ctrl.tol = tol;
      const auto ares = mottsim::propagate_adaptive(scheme, s.model.gen, s.psi0, 0.0,
                                                    50.0, ctrl, kcfg, {});
      const auto budget = ares.trace.steps.back().matvecs;
      const double err_a = mottsim::distance2(ares.psi, s.ref);

      long n = std::max<long>(64, static_cast<long>(budget / 10));
      double err_u = 0.0;
      double rel = 1.0;
      for (int it = 0; it < 8; ++it) {
        const auto fres = mottsim::propagate_fixed(scheme, s.model.gen, s.psi0, 0.0,
                                                   50.0, n, kcfg, {});
        const auto got = fres.trace.steps.back().matvecs;
        err_u = mottsim::distance2(fres.psi, s.ref);
        rel = std::abs(static_cast<double>(got) / static_cast<double>(budget) - 1.0);
        if (rel <= 0.10) break;
        const long next = std::max<long>(
            8, std::lround(static_cast<double>(n) * static_cast<double>(budget) /
                           static_cast<double>(got)));
        if (next == n) break;
        n = next;
      }
      if (rel <= 0.10 && err_a < err_u) ++wins;
    }
    ok = ok && wins >= 3;
    det += std::string(name) + " " + std::to_string(wins) + "/4  ";
  }
  return {ok, "budget-matched wins for the adaptive runs: " + det + "(want >= 3/4)"};
}

struct LadderPoint {
  double matvecs;
  double err;
};

// Log-log interpolation of the matvec count at which the error ladder
// crosses the target; negative when the ladder never brackets it.
double matvecs_at_error(const std::vector<LadderPoint>& pts, double target) {
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const auto& a = pts[i];
    const auto& b = pts[i + 1];
    if (a.err >= target && target >= b.err && a.err > b.err) {
      const double w = std::log(target / a.err) / std::log(b.err / a.err);
      return a.matvecs * std::pow(b.matvecs / a.matvecs, w);
    }
  }
  return -1.0;
}

Outcome c10_baseline_comparison() {
  const auto& s = shared_n6();
  const mottsim::KrylovConfig kcfg{1e-12, 96, true};
  const auto cf4 = mottsim::builtin_scheme("CF4");
  std::vector<LadderPoint> dop, cfm;
  for (const double tol : {1e-5, 1e-6, 1e-7, 1e-8, 1e-9}) {
    mottsim::ControllerConfig ctrl;
    ctrl.tol = tol;
    const auto d =
        mottsim::propagate_dopri45_adaptive(s.model.gen, s.psi0, 0.0, 50.0, ctrl, {});
    dop.push_back({static_cast<double>(d.trace.steps.back().matvecs),
                   mottsim::distance2(d.psi, s.ref)});
    const auto c = mottsim::propagate_adaptive(cf4, s.model.gen, s.psi0, 0.0, 50.0,
                                               ctrl, kcfg, {});
    cfm.push_back({static_cast<double>(c.trace.steps.back().matvecs),
                   mottsim::distance2(c.psi, s.ref)});
  }
  const double md = matvecs_at_error(dop, 1e-6);
  const double mc = matvecs_at_error(cfm, 1e-6);
  if (md < 0.0 || mc < 0.0)
    return {false, "tolerance ladder fails to bracket final error 1e-6"};
  const double ratio = md / mc;
  return {ratio >= 2.0, "matvecs to final error 1e-6: dopri45 " + fmt(md) + ", CF4 " +
                            fmt(mc) + ", ratio " + fmt(ratio) + " (want >= 2)"};
}

Outcome c11_norm_conservation() {
  const auto& r = transistor_run();
  std::size_t n_acc = 0;
  for (const auto& st : r.trace.steps) n_acc += st.accepted ? 1u : 0u;
  const double drift = std::abs(mottsim::norm2(r.psi) - 1.0);
  const double bound = 10.0 * static_cast<double>(n_acc) * 1e-12;
  return {drift <= bound, "norm drift " + fmt(drift) + " over " + std::to_string(n_acc) +
                              " accepted steps (bound " + fmt(bound) + ")"};
}

Outcome c12_determinism() {
  const mottsim::ExperimentConfig cfg;
  const auto r1 = mottsim::run_simulate(cfg);
  const auto r2 = mottsim::run_simulate(cfg);
  const std::string csv1 =
      mottsim::trace_to_csv(r1.trace, r1.observable_names, r1.drive_names);
  const std::string csv2 =
      mottsim::trace_to_csv(r2.trace, r2.observable_names, r2.drive_names);
  if (csv1 != csv2) return {false, "trace.csv differs between identically seeded runs"};
  return {true, "two seeded runs, " + std::to_string(csv1.size()) +
                    " bytes of trace.csv, bit-identical"};
}

}  // namespace

int main() {
  const std::pair<int, Outcome (*)()> criteria[] = {
      {1, c01_operator_algebra},     {2, c02_krylov_oracle},
      {3, c03_ground_state_oracle},  {4, c04_convergence_orders},
      {5, c05_local_error_bound},    {6, c06_timescale_scaling},
      {7, c07_estimator_correctness},{8, c08_adaptive_step_behavior},
      {9, c09_adaptive_vs_uniform},  {10, c10_baseline_comparison},
      {11, c11_norm_conservation},   {12, c12_determinism},
  };
  int failures = 0;
  for (const auto& [num, fn] : criteria) {
    Outcome out;
    try {
      out = fn();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %02d %s  %s\n", num, out.pass ? "PASS" : "FAIL",
                out.detail.c_str());
    std::fflush(stdout);
    if (!out.pass) ++failures;
  }
  return failures;
}
