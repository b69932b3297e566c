#include "mottsim/cfm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mottsim {

namespace {

// Scalar data of one exponential at fixed (t_n, tau):
//   Omega_j  = -i tau (s H_stat + sum_b w[b] H_pot^b)
//   Omega_j' = -i (s H_stat + sum_b (w[b] + tau y[b]) H_pot^b)
struct ExpWeights {
  double s = 0.0;         // sum_k a_jk
  std::vector<double> w;  // sum_k a_jk g_b(t_n + c_k tau)
  std::vector<double> y;  // sum_k a_jk c_k g_b'(t_n + c_k tau)
};

std::vector<ExpWeights> exponential_weights(const CFMScheme& s,
                                            const Generator& gen, double t_n,
                                            double tau, bool with_derivative) {
  const std::size_t J = s.n_exponentials();
  const std::size_t K = s.n_nodes();
  const std::size_t B = gen.n_channels();

  std::vector<std::vector<double>> g(B, std::vector<double>(K));
  std::vector<std::vector<double>> gp(with_derivative ? B : 0,
                                      std::vector<double>(K));
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t k = 0; k < K; ++k) {
      const double tk = t_n + s.nodes[k] * tau;
      g[b][k] = gen.drive_value(b, tk);
      if (with_derivative) gp[b][k] = gen.drive_derivative(b, 1, tk);
    }

  std::vector<ExpWeights> out(J);
  for (std::size_t j = 0; j < J; ++j) {
    auto& e = out[j];
    e.w.assign(B, 0.0);
    if (with_derivative) e.y.assign(B, 0.0);
    for (std::size_t k = 0; k < K; ++k) {
      const double a = s.coeffs[j][k];
      e.s += a;
      for (std::size_t b = 0; b < B; ++b) {
        e.w[b] += a * g[b][k];
        if (with_derivative) e.y[b] += a * s.nodes[k] * gp[b][k];
      }
    }
  }
  return out;
}

// Hermitian combination H_j = s H_stat + sum_b w[b] H_pot^b for expmv.
HermitianApply combo_apply(const Generator& gen, const ExpWeights& e) {
  std::vector<Complex> pot(e.w.begin(), e.w.end());
  const Complex sc{e.s, 0.0};
  return [&gen, sc, pot = std::move(pot)](std::span<const Complex> v,
                                          std::span<Complex> out) {
    gen.apply_combo(sc, pot, v, out);
  };
}

void check_step_args(const CFMScheme& s, const Generator& gen, double tau,
                     std::span<const Complex> u) {
  if (s.n_exponentials() == 0 || s.n_nodes() == 0)
    throw std::domain_error("cfm: empty scheme");
  for (const auto& row : s.coeffs)
    if (row.size() != s.n_nodes())
      throw std::domain_error("cfm: ragged coefficient rows");
  if (!(tau > 0.0)) throw std::domain_error("cfm: step size must be positive");
  if (u.size() != gen.dim()) throw std::domain_error("cfm: dimension mismatch");
  if (norm2(u) == 0.0) throw std::domain_error("cfm: zero input state");
}

[[noreturn]] void rethrow_with_context(KrylovNoConvergence& e,
                                       const std::string& name, double t_n,
                                       double tau) {
  throw KrylovNoConvergence(name + " at t = " + std::to_string(t_n) +
                                ", tau = " + std::to_string(tau) + ": " +
                                e.what(),
                            std::move(e.best_iterate), e.estimate, e.matvecs);
}

}  // namespace

CFMScheme builtin_scheme(const std::string& name) {
  if (name == "CF2") return {"CF2", 2, {0.5}, {{1.0}}};
  if (name == "CF4") {
    // Two exponentials over the Gauss-Legendre pair; the first weights the
    // earlier node. a_minus through 0.5 - a_plus keeps the row sums exact.
    const double rt3_6 = std::sqrt(3.0) / 6.0;
    const double a_plus = 0.25 + rt3_6;
    const double a_minus = 0.5 - a_plus;
    return {"CF4",
            4,
            {0.5 - rt3_6, 0.5 + rt3_6},
            {{a_plus, a_minus}, {a_minus, a_plus}}};
  }
  throw std::domain_error("builtin_scheme: unknown scheme '" + name + "'");
}

std::pair<double, double> order_residuals(const CFMScheme& scheme) {
  double s1 = 0.0, s2 = 0.0;
  for (const auto& row : scheme.coeffs) {
    const std::size_t k_lim = std::min(row.size(), scheme.nodes.size());
    for (std::size_t k = 0; k < k_lim; ++k) {
      s1 += row[k];
      s2 += row[k] * scheme.nodes[k];
    }
  }
  return {std::abs(s1 - 1.0), std::abs(s2 - 0.5)};
}

StepResult cfm_step(const CFMScheme& scheme, const Generator& gen, double t_n,
                    double tau, std::span<const Complex> u,
                    const KrylovConfig& kcfg) {
  check_step_args(scheme, gen, tau, u);
  const std::uint64_t mv0 = gen.matvec_count();
  const auto weights = exponential_weights(scheme, gen, t_n, tau, false);

  StepResult res;
  res.u_next.assign(u.begin(), u.end());
  res.krylov_dims.reserve(weights.size());
  for (const auto& e : weights) {
    try {
      auto r = expmv(combo_apply(gen, e), tau, res.u_next, kcfg);
      res.u_next = std::move(r.w);
      res.krylov_dims.push_back(r.krylov_dim);
    } catch (KrylovNoConvergence& err) {
      rethrow_with_context(err, scheme.name + " step", t_n, tau);
    }
  }
  res.matvecs = gen.matvec_count() - mv0;
  return res;
}

double defect_estimate(const CFMScheme& scheme, const Generator& gen,
                       double t_n, double tau, std::span<const Complex> u,
                       std::span<const Complex> u_next,
                       const KrylovConfig& kcfg, int k_max) {
  check_step_args(scheme, gen, tau, u);
  if (k_max < 1) throw std::domain_error("defect_estimate: k_max must be >= 1");
  if (u_next.size() != u.size())
    throw std::domain_error("defect_estimate: dimension mismatch");

  const std::size_t J = scheme.n_exponentials();
  const std::size_t B = gen.n_channels();
  const std::size_t dim = gen.dim();
  const auto weights = exponential_weights(scheme, gen, t_n, tau, true);

  // Stage states u_j = exp(Omega_j) ... exp(Omega_1) u; the final one is the
  // caller's u_next, so only J - 1 extra exponentials are spent here.
  std::vector<CVector> stages(J);
  {
    CVector cur(u.begin(), u.end());
    for (std::size_t j = 0; j + 1 < J; ++j) {
      try {
        auto r = expmv(combo_apply(gen, weights[j]), tau, cur, kcfg);
        cur = std::move(r.w);
      } catch (KrylovNoConvergence& err) {
        rethrow_with_context(err, scheme.name + " defect stage", t_n, tau);
      }
      stages[j] = cur;
    }
    stages[J - 1].assign(u_next.begin(), u_next.end());
  }

  // (-1)^l binom(i+l, i) / (i+l+1)!, the weight of Omega^i Omega' Omega^l in
  // the expansion of dexp truncated at i + l <= k_max.
  const auto coeff = [](int i, int l) {
    double binom = 1.0;
    for (int r = 1; r <= i; ++r) binom *= static_cast<double>(l + r) / r;
    double fact = 1.0;
    for (int r = 2; r <= i + l + 1; ++r) fact *= r;
    const double v = binom / fact;
    return Complex{(l % 2 == 0) ? v : -v, 0.0};
  };

  const Complex mi{0.0, -1.0};
  CVector work(dim), tmp(dim);

  // out = Gamma_j v = sum_{i+l <= k_max} coeff(i, l) Omega^i Omega' Omega^l v
  const auto gamma_apply = [&](const ExpWeights& e, std::span<const Complex> v,
                               CVector& out) {
    std::vector<Complex> om_pot(B), omp_pot(B);
    for (std::size_t b = 0; b < B; ++b) {
      om_pot[b] = mi * tau * e.w[b];
      omp_pot[b] = mi * (e.w[b] + tau * e.y[b]);
    }
    const Complex om_stat = mi * tau * e.s;
    const Complex omp_stat = mi * e.s;

    std::vector<CVector> right(k_max + 1);
    right[0].assign(v.begin(), v.end());
    for (int l = 1; l <= k_max; ++l) {
      right[l].resize(dim);
      gen.apply_combo(om_stat, om_pot, right[l - 1], right[l]);
    }

    out.assign(dim, Complex{0.0, 0.0});
    for (int l = 0; l <= k_max; ++l) {
      gen.apply_combo(omp_stat, omp_pot, right[l], work);
      axpy(coeff(0, l), work, out);
      for (int i = 1; i + l <= k_max; ++i) {
        gen.apply_combo(om_stat, om_pot, work, tmp);
        std::swap(work, tmp);
        axpy(coeff(i, l), work, out);
      }
    }
  };

  // acc accumulates sum_j exp(Omega_J)...exp(Omega_{j+1}) Gamma_j u_j by
  // pushing earlier terms through each subsequent exponential.
  CVector acc(dim, Complex{0.0, 0.0});
  CVector gam(dim);
  for (std::size_t j = 0; j < J; ++j) {
    if (j > 0 && norm2(acc) > 0.0) {
      try {
        auto r = expmv(combo_apply(gen, weights[j]), tau, acc, kcfg);
        acc = std::move(r.w);
      } catch (KrylovNoConvergence& err) {
        rethrow_with_context(err, scheme.name + " defect transport", t_n, tau);
      }
    }
    gamma_apply(weights[j], stages[j], gam);
    axpy(Complex{1.0, 0.0}, gam, acc);
  }

  // D(tau) = derivative of the product minus A(t_n + tau) u_J.
  gen.apply(t_n + tau, stages[J - 1], work);
  axpy(Complex{-1.0, 0.0}, work, acc);
  return tau / (scheme.order + 1) * norm2(acc);
}

std::vector<double> local_errors(const CFMScheme& scheme, const Generator& gen,
                                 double t_n, std::span<const Complex> u,
                                 std::span<const double> tau_list,
                                 const KrylovConfig& kcfg) {
  // Reference flow: the interval traversed in short builtin-CF4 sub-steps at
  // near-machine tolerance; its truncation error sits a factor ~n_sub^-4
  // below the single-step error being measured, and the per-substep Krylov
  // noise (which accumulates linearly in n_sub) stays below the smallest
  // local errors the order studies resolve.
  const int n_sub = 32;
  KrylovConfig tight = kcfg;
  tight.tol = std::min(kcfg.tol, 1e-15);
  const CFMScheme ref = builtin_scheme("CF4");

  std::vector<double> errs;
  errs.reserve(tau_list.size());
  for (const double tau : tau_list) {
    auto step = cfm_step(scheme, gen, t_n, tau, u, kcfg);
    CVector cur(u.begin(), u.end());
    const double h = tau / n_sub;
    for (int i = 0; i < n_sub; ++i) {
      auto r = cfm_step(ref, gen, t_n + i * h, h, cur, tight);
      cur = std::move(r.u_next);
    }
    errs.push_back(distance2(step.u_next, cur));
  }
  return errs;
}

double empirical_order(const CFMScheme& scheme, const Generator& gen,
                       double t_n, std::span<const Complex> u,
                       std::span<const double> tau_list,
                       const KrylovConfig& kcfg) {
  if (tau_list.size() < 3)
    throw std::domain_error("empirical_order: need at least three step sizes");
  for (std::size_t i = 1; i < tau_list.size(); ++i)
    if (std::abs(tau_list[i] / tau_list[i - 1] - 0.5) > 1e-12)
      throw std::domain_error("empirical_order: step sizes must halve");

  const auto errs = local_errors(scheme, gen, t_n, u, tau_list, kcfg);

  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(tau_list.size());
  for (std::size_t i = 0; i < tau_list.size(); ++i) {
    const double x = std::log(tau_list[i]);
    // Floor keeps saturated (tolerance-limited) sweeps finite; they then
    // read out as slope ~ 0 rather than a power law.
    const double y = std::log(std::max(errs[i], std::numeric_limits<double>::min()));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace mottsim
