#include "mottsim/hubbard.hpp"

#include <cmath>
#include <stdexcept>

namespace mottsim {

HubbardParams HubbardParams::chain(int n_sites, double v, double interaction) {
  HubbardParams p;
  p.n_sites = n_sites;
  p.hopping.assign(static_cast<std::size_t>(n_sites) * n_sites, 0.0);
  for (int i = 0; i + 1 < n_sites; ++i) {
    p.hopping[static_cast<std::size_t>(i) * n_sites + i + 1] = v;
    p.hopping[static_cast<std::size_t>(i + 1) * n_sites + i] = v;
  }
  p.interaction = interaction;
  p.site_potentials.assign(n_sites, 0.0);
  return p;
}

SparseOperator assemble_static(const HubbardParams& params, const FockBasis& basis) {
  const int n = params.n_sites;
  if (n != basis.n_sites())
    throw std::domain_error("assemble_static: basis/params site count mismatch");
  if (params.hopping.size() != static_cast<std::size_t>(n) * n)
    throw std::domain_error("assemble_static: hopping matrix has wrong shape");
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (params.hop(i, j) != params.hop(j, i))
        throw std::domain_error("assemble_static: hopping matrix not symmetric");

  std::vector<Triplet> triplets;
  for (std::size_t s = 0; s < basis.size(); ++s) {
    // Hopping: every (i, j, sigma) with v_ij != 0.
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const double v = params.hop(i, j);
        if (v == 0.0) continue;
        for (const Spin spin : {Spin::Up, Spin::Down}) {
          if (const auto hop = apply_hop(basis, i, j, spin, s))
            triplets.push_back({hop->index, s, Complex{v * hop->sign, 0.0}});
        }
      }
    }
    // Local interaction: U per doubly occupied site.
    if (params.interaction != 0.0) {
      int doubly = 0;
      for (int i = 0; i < n; ++i)
        if (basis.occupied(s, i, Spin::Up) && basis.occupied(s, i, Spin::Down)) ++doubly;
      if (doubly > 0)
        triplets.push_back({s, s, Complex{params.interaction * doubly, 0.0}});
    }
  }
  return SparseOperator::from_triplets(basis.size(), std::move(triplets), true);
}

SparseOperator assemble_potential(std::span<const double> site_potentials,
                                  const FockBasis& basis) {
  const int n = basis.n_sites();
  if (site_potentials.size() != static_cast<std::size_t>(n))
    throw std::domain_error("assemble_potential: potential array length mismatch");

  std::vector<Triplet> triplets;
  for (std::size_t s = 0; s < basis.size(); ++s) {
    double diag = 0.0;
    for (int i = 0; i < n; ++i) {
      if (basis.occupied(s, i, Spin::Up)) diag += site_potentials[i];
      if (basis.occupied(s, i, Spin::Down)) diag += site_potentials[i];
    }
    if (diag != 0.0) triplets.push_back({s, s, Complex{diag, 0.0}});
  }
  return SparseOperator::from_triplets(basis.size(), std::move(triplets), true);
}

double occupation_expectation(const FockBasis& basis, std::span<const Complex> psi,
                              int site, Spin spin) {
  if (psi.size() != basis.size())
    throw std::domain_error("occupation_expectation: state dimension mismatch");
  if (site < 0 || site >= basis.n_sites())
    throw std::domain_error("occupation_expectation: site index out of range");
  double acc = 0.0;
  for (std::size_t s = 0; s < basis.size(); ++s)
    if (basis.occupied(s, site, spin)) acc += std::norm(psi[s]);
  return acc;
}

}  // namespace mottsim
