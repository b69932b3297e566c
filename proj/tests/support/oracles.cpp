#include "support/oracles.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

namespace oracles {

using mottsim::Complex;
using mottsim::CVector;

Md to_dense(const mottsim::SparseOperator& op) {
  const std::size_t n = op.dim();
  Md M = Md::Zero(n, n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t k = op.row_ptr()[r]; k < op.row_ptr()[r + 1]; ++k)
      M(r, op.col_idx()[k]) = op.values()[k];
  return M;
}

Md dense_hamiltonian(const mottsim::Generator& gen, double t) {
  Md H = to_dense(gen.h_stat());
  for (std::size_t b = 0; b < gen.n_channels(); ++b)
    H += gen.drive_value(b, t) * to_dense(gen.channel(b).h_pot);
  return H;
}

Md dense_generator(const mottsim::Generator& gen, double t) {
  return Complex{0.0, -1.0} * dense_hamiltonian(gen, t);
}

Md dense_generator_derivative(const mottsim::Generator& gen, int order,
                              double t) {
  Md M = Md::Zero(gen.dim(), gen.dim());
  for (std::size_t b = 0; b < gen.n_channels(); ++b)
    M += gen.drive_derivative(b, order, t) * to_dense(gen.channel(b).h_pot);
  return Complex{0.0, -1.0} * M;
}

Md expm_minus_i(const Md& B, double tau) {
  Eigen::SelfAdjointEigenSolver<Md> es(B);
  Vd phases(B.rows());
  for (Eigen::Index i = 0; i < B.rows(); ++i)
    phases(i) = std::exp(Complex{0.0, -tau * es.eigenvalues()(i)});
  return es.eigenvectors() * phases.asDiagonal() *
         es.eigenvectors().adjoint();
}

double spectral_norm(const Md& M) {
  Eigen::JacobiSVD<Md> svd(M);
  return svd.singularValues()(0);
}

CVector dense_reference_flow(const mottsim::Generator& gen, double t,
                             double tau, std::span<const Complex> u,
                             int n_sub) {
  const double root3_6 = std::sqrt(3.0) / 6.0;
  const double c1 = 0.5 - root3_6, c2 = 0.5 + root3_6;
  const double ap = 0.25 + root3_6, am = 0.25 - root3_6;
  Vd psi = to_eigen(u);
  const double h = tau / n_sub;
  for (int s = 0; s < n_sub; ++s) {
    const double ts = t + s * h;
    const Md H1 = dense_hamiltonian(gen, ts + c1 * h);
    const Md H2 = dense_hamiltonian(gen, ts + c2 * h);
    psi = expm_minus_i(ap * H1 + am * H2, h) * psi;
    psi = expm_minus_i(am * H1 + ap * H2, h) * psi;
  }
  return from_eigen(psi);
}

namespace {

Md kron(const Md& A, const Md& B) {
  Md K(A.rows() * B.rows(), A.cols() * B.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j)
      K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return K;
}

}  // namespace

Md jw_annihilator(int n_orbitals, int orb) {
  if (orb < 0 || orb >= n_orbitals)
    throw std::invalid_argument("jw_annihilator: orbital out of range");
  Md a(2, 2), z(2, 2), id = Md::Identity(2, 2);
  a << 0, 1, 0, 0;   // <0|a|1> = 1
  z << 1, 0, 0, -1;  // parity of one occupied orbital
  Md M = Md::Identity(1, 1);
  for (int b = n_orbitals - 1; b >= 0; --b) {
    if (b == orb)
      M = kron(M, a);
    else if (b < orb)
      M = kron(M, z);
    else
      M = kron(M, id);
  }
  return M;
}

std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

std::uint64_t SplitMix::next() {
  std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double SplitMix::uniform() { return (next() >> 11) * 0x1.0p-53; }

double SplitMix::sym() { return 2.0 * uniform() - 1.0; }

Md random_hermitian(int dim, SplitMix& rng) {
  Md M(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) M(i, j) = Complex{rng.sym(), rng.sym()};
  return 0.5 * (M + Md(M.adjoint()));
}

CVector random_state(std::size_t dim, SplitMix& rng) {
  CVector v(dim);
  for (auto& x : v) x = Complex{rng.sym(), rng.sym()};
  const double n = mottsim::norm2(v);
  for (auto& x : v) x /= n;
  return v;
}

Vd to_eigen(std::span<const Complex> v) {
  Vd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i)
    out(static_cast<Eigen::Index>(i)) = v[i];
  return out;
}

CVector from_eigen(const Vd& v) {
  CVector out(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i)
    out[static_cast<std::size_t>(i)] = v(i);
  return out;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(std::max(y[i], 1e-300));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace oracles
