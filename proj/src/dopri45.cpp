#include <array>
#include <cmath>
#include <stdexcept>

#include "mottsim/stepper.hpp"

namespace mottsim {

namespace {

// Dormand-Prince 5(4) tableau. The seventh stage equals the next step's
// first stage (FSAL), so an accepted step costs six fresh applications.
constexpr std::array<double, 6> kC = {0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0};

constexpr std::array<double, 1> kA2 = {0.2};
constexpr std::array<double, 2> kA3 = {3.0 / 40.0, 9.0 / 40.0};
constexpr std::array<double, 3> kA4 = {44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0};
constexpr std::array<double, 4> kA5 = {19372.0 / 6561.0, -25360.0 / 2187.0,
                                       64448.0 / 6561.0, -212.0 / 729.0};
constexpr std::array<double, 5> kA6 = {9017.0 / 3168.0, -355.0 / 33.0,
                                       46732.0 / 5247.0, 49.0 / 176.0,
                                       -5103.0 / 18656.0};

constexpr std::array<double, 6> kB5 = {35.0 / 384.0,     0.0,
                                       500.0 / 1113.0,   125.0 / 192.0,
                                       -2187.0 / 6784.0, 11.0 / 84.0};

// Difference of the fifth- and fourth-order weights; dotted with the stages
// it yields the embedded error vector directly.
constexpr std::array<double, 7> kErrW = {
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0};

}  // namespace

Dopri45Result dopri45_step(const Generator& gen, double t_n, double tau,
                           std::span<const Complex> u,
                           std::span<const Complex> k1) {
  const std::size_t dim = gen.dim();
  if (u.size() != dim)
    throw std::domain_error("dopri45_step: state dimension mismatch");
  if (!(tau > 0.0))
    throw std::domain_error("dopri45_step: tau must be positive");
  if (!k1.empty() && k1.size() != dim)
    throw std::domain_error("dopri45_step: k1 dimension mismatch");

  const std::uint64_t mv0 = gen.matvec_count();
  std::array<CVector, 6> k;
  for (auto& ki : k) ki.resize(dim);

  if (k1.empty()) {
    gen.apply(t_n, u, k[0]);
  } else {
    std::copy(k1.begin(), k1.end(), k[0].begin());
  }

  CVector y(dim);
  const auto stage = [&](int i, std::span<const double> a, double c) {
    std::copy(u.begin(), u.end(), y.begin());
    for (std::size_t j = 0; j < a.size(); ++j)
      if (a[j] != 0.0) axpy(Complex(tau * a[j], 0.0), k[j], y);
    gen.apply(t_n + c * tau, y, k[i]);
  };
  stage(1, kA2, kC[0]);
  stage(2, kA3, kC[1]);
  stage(3, kA4, kC[2]);
  stage(4, kA5, kC[3]);
  stage(5, kA6, kC[4]);

  Dopri45Result r;
  r.u5.assign(u.begin(), u.end());
  for (std::size_t j = 0; j < 6; ++j)
    if (kB5[j] != 0.0) axpy(Complex(tau * kB5[j], 0.0), k[j], r.u5);

  r.k_last.resize(dim);
  gen.apply(t_n + tau, r.u5, r.k_last);

  CVector err(dim, Complex(0.0, 0.0));
  for (std::size_t j = 0; j < 6; ++j)
    if (kErrW[j] != 0.0) axpy(Complex(kErrW[j], 0.0), k[j], err);
  axpy(Complex(kErrW[6], 0.0), r.k_last, err);
  r.est = tau * norm2(err);
  r.matvecs = gen.matvec_count() - mv0;
  return r;
}

}  // namespace mottsim
