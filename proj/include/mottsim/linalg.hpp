#ifndef MOTTSIM_LINALG_HPP
#define MOTTSIM_LINALG_HPP

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace mottsim {

using Complex = std::complex<double>;
using CVector = std::vector<Complex>;

// <x, y> with conjugation on x.
inline Complex dot(std::span<const Complex> x, std::span<const Complex> y) {
  Complex s{0.0, 0.0};
  for (std::size_t i = 0; i < x.size(); ++i) s += std::conj(x[i]) * y[i];
  return s;
}

inline double norm2(std::span<const Complex> x) {
  double s = 0.0;
  for (const auto& v : x) s += std::norm(v);
  return std::sqrt(s);
}

// y += a*x
inline void axpy(Complex a, std::span<const Complex> x, std::span<Complex> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

inline void scale(Complex a, std::span<Complex> x) {
  for (auto& v : x) v *= a;
}

inline void set_zero(std::span<Complex> x) {
  for (auto& v : x) v = Complex{0.0, 0.0};
}

inline double distance2(std::span<const Complex> x, std::span<const Complex> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += std::norm(x[i] - y[i]);
  return std::sqrt(s);
}

}  // namespace mottsim

#endif
