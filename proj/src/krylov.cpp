#include "mottsim/krylov.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace mottsim {

namespace {

// y = exp(-i tau T_m) e_1 for the real symmetric tridiagonal (alpha, beta),
// via eigendecomposition.
CVector tridiag_exp_e1(std::span<const double> alpha, std::span<const double> beta,
                       double tau) {
  const int m = static_cast<int>(alpha.size());
  Eigen::VectorXd diag(m), sub(std::max(m - 1, 0));
  for (int i = 0; i < m; ++i) diag[i] = alpha[i];
  for (int i = 0; i + 1 < m; ++i) sub[i] = beta[i];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  const auto& evals = es.eigenvalues();
  const auto& evecs = es.eigenvectors();
  CVector y(m, Complex{0.0, 0.0});
  for (int l = 0; l < m; ++l) {
    const Complex phase = std::exp(Complex{0.0, -tau * evals[l]});
    const Complex weight = phase * evecs(0, l);
    for (int j = 0; j < m; ++j) y[j] += evecs(j, l) * weight;
  }
  return y;
}

void reorthogonalize_against(std::vector<CVector>& basis, std::span<Complex> w,
                             int count) {
  // Two modified Gram-Schmidt passes.
  for (int pass = 0; pass < 2; ++pass) {
    for (int i = 0; i < count; ++i) {
      const Complex c = dot(basis[i], w);
      axpy(-c, basis[i], w);
    }
  }
}

// Deterministic complex vector with components uniform in [-1, 1]^2,
// independent of the standard library's distribution implementations.
CVector seeded_vector(std::size_t dim, std::uint64_t seed) {
  std::uint64_t state = seed ^ 0x9e3779b97f4a7c15ULL;
  auto next_unit = [&state]() {
    // splitmix64
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z = z ^ (z >> 31);
    return 2.0 * (static_cast<double>(z >> 11) * 0x1.0p-53) - 1.0;
  };
  CVector v(dim);
  for (auto& c : v) {
    const double re = next_unit();
    const double im = next_unit();
    c = Complex{re, im};
  }
  return v;
}

}  // namespace

ExpmvResult expmv(const HermitianApply& apply_B, double tau, std::span<const Complex> v,
                  const KrylovConfig& cfg) {
  const std::size_t dim = v.size();
  if (!(cfg.tol > 0.0)) throw std::domain_error("expmv: tolerance must be positive");
  const double beta0 = norm2(v);
  if (beta0 == 0.0) throw std::domain_error("expmv: zero input vector");
  if (tau == 0.0) return {CVector(v.begin(), v.end()), 0, 0};

  const int m_max = static_cast<int>(std::min<std::size_t>(
      static_cast<std::size_t>(std::max(cfg.m_max, 2)), dim));

  std::vector<CVector> basis;
  basis.reserve(m_max + 1);
  basis.emplace_back(v.begin(), v.end());
  scale(Complex{1.0 / beta0, 0.0}, basis[0]);

  std::vector<double> alpha, beta;  // T_m diagonal and subdiagonal
  CVector w(dim);
  int matvecs = 0;

  for (int j = 0; j < m_max; ++j) {
    apply_B(basis[j], w);
    ++matvecs;
    if (j > 0) axpy(Complex{-beta[j - 1], 0.0}, basis[j - 1], w);
    const double a = dot(basis[j], w).real();
    alpha.push_back(a);
    axpy(Complex{-a, 0.0}, basis[j], w);
    if (cfg.reorthogonalize) reorthogonalize_against(basis, w, j + 1);
    const double b = norm2(w);

    const CVector y = tridiag_exp_e1(alpha, beta, tau);

    const bool exhausted = b <= 1e-14 * std::max(std::abs(a), 1.0);
    const double err_est = exhausted ? 0.0 : b * std::abs(y[j]);
    if (err_est > cfg.tol) {
      if (j + 1 == m_max) {
        CVector best(dim, Complex{0.0, 0.0});
        for (int i = 0; i <= j; ++i) axpy(y[i] * beta0, basis[i], best);
        throw KrylovNoConvergence(
            "expmv: no convergence within m_max = " + std::to_string(m_max) +
                " Lanczos iterations (estimate " + std::to_string(err_est) + ")",
            std::move(best), err_est * beta0, matvecs);
      }
      beta.push_back(b);
      basis.push_back(w);
      scale(Complex{1.0 / b, 0.0}, basis.back());
      continue;
    }

    CVector result(dim, Complex{0.0, 0.0});
    for (int i = 0; i <= j; ++i) axpy(y[i] * beta0, basis[i], result);
    return {std::move(result), matvecs, j + 1};
  }

  // Unreachable: the loop either returns or throws at j + 1 == m_max.
  throw std::logic_error("expmv: internal iteration error");
}

GroundStateResult ground_state(const HermitianApply& apply_H, std::size_t dim,
                               double tol, std::uint64_t seed) {
  if (dim < 1) throw std::domain_error("ground_state: dimension must be positive");
  if (!(tol > 0.0)) throw std::domain_error("ground_state: tolerance must be positive");

  std::uint64_t matvecs = 0;

  if (dim == 1) {
    CVector e{Complex{1.0, 0.0}};
    CVector he(1);
    apply_H(e, he);
    ++matvecs;
    const double e0 = he[0].real();
    return {e0, std::move(e), matvecs, 0.0, false};
  }

  const int m_max = static_cast<int>(std::min<std::size_t>(80, dim));
  const int max_restarts = 100;

  CVector start = seeded_vector(dim, seed);

  double best_energy = 0.0;
  double gap_at_convergence = -1.0;
  CVector w(dim);

  for (int restart = 0; restart < max_restarts; ++restart) {
    std::vector<CVector> basis;
    basis.reserve(m_max);
    const double nrm = norm2(start);
    if (nrm == 0.0) throw std::domain_error("ground_state: start vector vanished");
    basis.emplace_back(start);
    scale(Complex{1.0 / nrm, 0.0}, basis[0]);

    std::vector<double> alpha, beta;
    bool invariant = false;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;

    for (int j = 0; j < m_max; ++j) {
      apply_H(basis[j], w);
      ++matvecs;
      if (j > 0) axpy(Complex{-beta[j - 1], 0.0}, basis[j - 1], w);
      const double a = dot(basis[j], w).real();
      alpha.push_back(a);
      axpy(Complex{-a, 0.0}, basis[j], w);
      reorthogonalize_against(basis, w, j + 1);
      const double b = norm2(w);
      if (b <= 1e-14 * std::max(std::abs(a), 1.0)) {
        invariant = true;
        break;
      }
      if (j + 1 < m_max) {
        beta.push_back(b);
        basis.push_back(w);
        scale(Complex{1.0 / b, 0.0}, basis.back());
      }
    }

    const int m = static_cast<int>(alpha.size());
    Eigen::VectorXd diag(m), sub(std::max(m - 1, 0));
    for (int i = 0; i < m; ++i) diag[i] = alpha[i];
    for (int i = 0; i + 1 < m; ++i) sub[i] = beta[i];
    es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);

    // Ritz vector of the smallest Ritz value.
    CVector ritz(dim, Complex{0.0, 0.0});
    for (int i = 0; i < m; ++i)
      axpy(Complex{es.eigenvectors()(i, 0), 0.0}, basis[i], ritz);
    const double rn = norm2(ritz);
    scale(Complex{1.0 / rn, 0.0}, ritz);

    best_energy = es.eigenvalues()(0);
    if (m > 1) gap_at_convergence = es.eigenvalues()(1) - es.eigenvalues()(0);

    // Explicit residual check.
    apply_H(ritz, w);
    ++matvecs;
    axpy(Complex{-best_energy, 0.0}, ritz, w);
    const double residual = norm2(w);
    if (residual <= tol || invariant) {
      const bool degenerate = gap_at_convergence >= 0.0 && gap_at_convergence < 10.0 * tol;
      return {best_energy, std::move(ritz), matvecs, residual, degenerate};
    }
    start = std::move(ritz);
  }

  throw std::runtime_error("ground_state: no convergence after restarts");
}

}  // namespace mottsim
