#ifndef MOTTSIM_KRYLOV_HPP
#define MOTTSIM_KRYLOV_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>

#include "mottsim/linalg.hpp"

namespace mottsim {

struct KrylovConfig {
  double tol = 1e-12;        // per-application accuracy target, relative to |v|
  int m_max = 96;            // maximum Lanczos subspace dimension
  bool reorthogonalize = true;
};

// out = B v for a Hermitian operator B.
using HermitianApply =
    std::function<void(std::span<const Complex>, std::span<Complex>)>;

// Raised when the subspace limit is reached before the residual estimate
// drops below tolerance. Carries the best iterate so the caller can decide
// to retry with a smaller step.
class KrylovNoConvergence : public std::runtime_error {
 public:
  KrylovNoConvergence(std::string what, CVector best, double estimate, int matvecs)
      : std::runtime_error(std::move(what)),
        best_iterate(std::move(best)),
        estimate(estimate),
        matvecs(matvecs) {}

  CVector best_iterate;
  double estimate;
  int matvecs;
};

struct ExpmvResult {
  CVector w;       // ~ exp(-i tau B) v
  int matvecs;     // number of operator applications
  int krylov_dim;  // subspace dimension used
};

// Lanczos approximation of exp(-i tau B) v to an estimated 2-norm error of
// cfg.tol * |v|. The tridiagonal exponential is evaluated by eigendecomposition.
ExpmvResult expmv(const HermitianApply& apply_B, double tau, std::span<const Complex> v,
                  const KrylovConfig& cfg);

struct GroundStateResult {
  double energy;
  CVector psi;
  std::uint64_t matvecs;
  double residual;  // |H psi - E psi|
  // Two Ritz values within 10*tol of each other at convergence: the returned
  // vector is an arbitrary member of a (near-)degenerate pair.
  bool degenerate_warning;
};

// Smallest eigenpair of a Hermitian operator by restarted Lanczos with full
// reorthogonalization. The start vector is drawn deterministically from seed.
GroundStateResult ground_state(const HermitianApply& apply_H, std::size_t dim,
                               double tol, std::uint64_t seed);

}  // namespace mottsim

#endif
