#ifndef MOTTSIM_PULSE_HPP
#define MOTTSIM_PULSE_HPP

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "mottsim/sparse_operator.hpp"

namespace mottsim {

// Time-dependent scalar coefficient of one diagonal drive channel. The
// logistic switch below is the one profile shipped; other ramps (polynomial
// test drives and the like) plug in through this interface.
class DriveBase {
 public:
  virtual ~DriveBase() = default;
  virtual double value(double t) const = 0;
  // Analytic derivative, order 1 or 2.
  virtual double derivative(int order, double t) const = 0;
};

// Logistic switch-on g(t) = 1 - 1/(exp((t - t0)/T) + 1), strictly increasing
// from 0 to 1 with time-scale T.
class DriveProfile final : public DriveBase {
 public:
  DriveProfile(double t0, double timescale);

  double t0() const { return t0_; }
  double timescale() const { return T_; }

  double value(double t) const override;
  double derivative(int order, double t) const override;

 private:
  double t0_;
  double T_;
};

struct DriveChannel {
  DriveChannel(std::shared_ptr<const DriveBase> p, SparseOperator op)
      : profile(std::move(p)), h_pot(std::move(op)) {}
  DriveChannel(const DriveProfile& p, SparseOperator op)
      : profile(std::make_shared<DriveProfile>(p)), h_pot(std::move(op)) {}

  std::shared_ptr<const DriveBase> profile;
  SparseOperator h_pot;  // diagonal Hermitian
};

// A(t) = -i (H_stat + sum_b g_b(t) H_pot^b). Owns its operators; the per-site
// diagonals are cached densely. Every operator-vector product, whether the
// full generator, a derivative, or a Hermitian combination, bumps the matvec
// tally by one. Counts are exact in single-threaded propagation.
class Generator {
 public:
  Generator(SparseOperator h_stat, std::vector<DriveChannel> channels);

  std::size_t dim() const { return h_stat_.dim(); }
  std::size_t n_channels() const { return channels_.size(); }
  const SparseOperator& h_stat() const { return h_stat_; }
  const DriveChannel& channel(std::size_t b) const { return channels_[b]; }

  double drive_value(std::size_t b, double t) const {
    return channels_[b].profile->value(t);
  }
  double drive_derivative(std::size_t b, int order, double t) const {
    return channels_[b].profile->derivative(order, t);
  }

  // out = A(t) v
  void apply(double t, std::span<const Complex> v, std::span<Complex> out) const;

  // out = A^(k)(t) v = -i sum_b g_b^(k)(t) H_pot^b v, k in {1, 2}
  void apply_derivative(int order, double t, std::span<const Complex> v,
                        std::span<Complex> out) const;

  // out = stat_coeff * H_stat v + sum_b pot_coeffs[b] * H_pot^b v.
  // This is the single-matvec building block for CFM exponentials and
  // defect commutators.
  void apply_combo(Complex stat_coeff, std::span<const Complex> pot_coeffs,
                   std::span<const Complex> v, std::span<Complex> out) const;

  std::uint64_t matvec_count() const { return matvec_count_; }

 private:
  SparseOperator h_stat_;
  std::vector<DriveChannel> channels_;
  std::vector<std::vector<double>> diagonals_;  // per channel
  mutable std::uint64_t matvec_count_ = 0;
};

}  // namespace mottsim

#endif
