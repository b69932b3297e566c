#ifndef MOTTSIM_CFM_HPP
#define MOTTSIM_CFM_HPP

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mottsim/krylov.hpp"
#include "mottsim/linalg.hpp"
#include "mottsim/pulse.hpp"

namespace mottsim {

// Commutator-free Magnus scheme. One step over [t_n, t_n + tau] is the
// product exp(Omega_J) ... exp(Omega_1) with
//   Omega_j = -i tau sum_k a[j][k] H(t_n + c[k] tau).
struct CFMScheme {
  std::string name;
  int order = 0;                            // p
  std::vector<double> nodes;                // c_k in [0, 1]
  std::vector<std::vector<double>> coeffs;  // a[j][k], J rows of K entries

  std::size_t n_exponentials() const { return coeffs.size(); }
  std::size_t n_nodes() const { return nodes.size(); }
};

struct SchemeTableError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// "CF2" (exponential midpoint) or "CF4" (two exponentials on Gauss nodes).
CFMScheme builtin_scheme(const std::string& name);

// Flat key-value scheme document; grammar in README. Rejects missing keys,
// ragged coefficient rows, nodes outside [0, 1], and order-1/2 residuals
// beyond 1e-13.
CFMScheme load_scheme_table(const std::string& text);
std::string save_scheme_table(const CFMScheme& scheme);

// (|sum a - 1|, |sum_jk a_jk c_k - 1/2|). Conditions beyond order 2 involve
// commutator structure and are only validated empirically.
std::pair<double, double> order_residuals(const CFMScheme& scheme);

struct StepResult {
  CVector u_next;
  double est = 0.0;  // local error estimate, 2-norm; filled by the caller
  std::uint64_t matvecs = 0;
  std::vector<int> krylov_dims;  // per exponential
};

// u_next = exp(Omega_J) ... exp(Omega_1) u. Each exponential is a Lanczos
// expmv of the Hermitian combination s_j H_stat + sum_b w_jb H_pot^b; the
// node sum collapses to scalar weights because only g carries the time
// dependence.
StepResult cfm_step(const CFMScheme& scheme, const Generator& gen, double t_n,
                    double tau, std::span<const Complex> u,
                    const KrylovConfig& kcfg);

// Asymptotically correct local error estimate
//   est = (tau / (p + 1)) * ||D(tau)||
// with the defect D(tau) = d/dtau [S(tau) u] - A(t_n + tau) S(tau) u. The
// product derivative uses Gamma_j = dexp_{Omega_j}(Omega_j') truncated at
// k_max nested commutators; u_next must come from cfm_step with identical
// arguments (its last stage is reused).
double defect_estimate(const CFMScheme& scheme, const Generator& gen,
                       double t_n, double tau, std::span<const Complex> u,
                       std::span<const Complex> u_next,
                       const KrylovConfig& kcfg, int k_max);

// Single-step errors ||cfm_step(tau) - reference flow|| for each tau. The
// reference is the same interval traversed in many short builtin-CF4
// sub-steps at a tightened Krylov tolerance.
std::vector<double> local_errors(const CFMScheme& scheme, const Generator& gen,
                                 double t_n, std::span<const Complex> u,
                                 std::span<const double> tau_list,
                                 const KrylovConfig& kcfg);

// Least-squares slope of log||L(tau)|| against log tau over a dyadic tau
// list (each entry half the previous, at least three). For a scheme of
// order p the slope approaches p + 1.
double empirical_order(const CFMScheme& scheme, const Generator& gen,
                       double t_n, std::span<const Complex> u,
                       std::span<const double> tau_list,
                       const KrylovConfig& kcfg);

}  // namespace mottsim

#endif
