#include "mottsim/pulse.hpp"

#include <cmath>
#include <stdexcept>

namespace mottsim {

DriveProfile::DriveProfile(double t0, double timescale) : t0_(t0), T_(timescale) {
  if (!(T_ > 0.0)) throw std::domain_error("DriveProfile: timescale must be positive");
}

double DriveProfile::value(double t) const {
  const double x = (t - t0_) / T_;
  // Branch on the sign so the exponent never overflows.
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double DriveProfile::derivative(int order, double t) const {
  const double x = (t - t0_) / T_;
  const double u = std::exp(-std::abs(x));  // in (0, 1], no overflow
  const double denom = 1.0 + u;
  switch (order) {
    case 1:
      // e^x/(1+e^x)^2 is even in x, so u/(1+u)^2 with u = e^-|x| is exact.
      return u / (denom * denom * T_);
    case 2: {
      // e^x(1-e^x)/(1+e^x)^3 = -sgn(x) * u(1-u)/(1+u)^3; zero at x = 0.
      const double mag = u * (1.0 - u) / (denom * denom * denom);
      return (x >= 0.0 ? -mag : mag) / (T_ * T_);
    }
    default:
      throw std::domain_error("DriveProfile: derivative order must be 1 or 2");
  }
}

Generator::Generator(SparseOperator h_stat, std::vector<DriveChannel> channels)
    : h_stat_(std::move(h_stat)), channels_(std::move(channels)) {
  for (const auto& ch : channels_) {
    if (!ch.profile) throw std::domain_error("Generator: null drive profile");
    if (ch.h_pot.dim() != h_stat_.dim())
      throw std::domain_error("Generator: channel dimension mismatch");
    if (!ch.h_pot.is_diagonal())
      throw std::domain_error("Generator: channel operator must be diagonal");
    diagonals_.push_back(ch.h_pot.real_diagonal());
  }
}

void Generator::apply(double t, std::span<const Complex> v,
                      std::span<Complex> out) const {
  if (v.size() != dim() || out.size() != dim())
    throw std::domain_error("Generator::apply: dimension mismatch");
  const Complex minus_i{0.0, -1.0};
  h_stat_.apply(v, out);
  for (std::size_t b = 0; b < channels_.size(); ++b) {
    const double g = channels_[b].profile->value(t);
    const auto& d = diagonals_[b];
    for (std::size_t k = 0; k < v.size(); ++k) out[k] += g * d[k] * v[k];
  }
  scale(minus_i, out);
  ++matvec_count_;
}

void Generator::apply_derivative(int order, double t, std::span<const Complex> v,
                                 std::span<Complex> out) const {
  if (v.size() != dim() || out.size() != dim())
    throw std::domain_error("Generator::apply_derivative: dimension mismatch");
  if (order != 1 && order != 2)
    throw std::domain_error("Generator::apply_derivative: order must be 1 or 2");
  set_zero(out);
  const Complex minus_i{0.0, -1.0};
  for (std::size_t b = 0; b < channels_.size(); ++b) {
    const double gk = channels_[b].profile->derivative(order, t);
    const auto& d = diagonals_[b];
    for (std::size_t k = 0; k < v.size(); ++k) out[k] += minus_i * gk * d[k] * v[k];
  }
  ++matvec_count_;
}

void Generator::apply_combo(Complex stat_coeff, std::span<const Complex> pot_coeffs,
                            std::span<const Complex> v, std::span<Complex> out) const {
  if (v.size() != dim() || out.size() != dim())
    throw std::domain_error("Generator::apply_combo: dimension mismatch");
  if (pot_coeffs.size() != channels_.size())
    throw std::domain_error("Generator::apply_combo: coefficient count mismatch");
  if (stat_coeff != Complex{0.0, 0.0}) {
    h_stat_.apply(v, out);
    scale(stat_coeff, out);
  } else {
    set_zero(out);
  }
  for (std::size_t b = 0; b < channels_.size(); ++b) {
    const Complex c = pot_coeffs[b];
    if (c == Complex{0.0, 0.0}) continue;
    const auto& d = diagonals_[b];
    for (std::size_t k = 0; k < v.size(); ++k) out[k] += c * d[k] * v[k];
  }
  ++matvec_count_;
}

}  // namespace mottsim
