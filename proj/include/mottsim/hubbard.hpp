#ifndef MOTTSIM_HUBBARD_HPP
#define MOTTSIM_HUBBARD_HPP

#include <span>
#include <vector>

#include "mottsim/fock_basis.hpp"
#include "mottsim/sparse_operator.hpp"

namespace mottsim {

struct HubbardParams {
  int n_sites = 0;
  // Symmetric n_sites x n_sites hopping matrix v_ij, row-major. Diagonal
  // entries act as static on-site energies.
  std::vector<double> hopping;
  // Local Coulomb repulsion U >= 0.
  double interaction = 0.0;
  // Static per-site potentials V_i (source-drain and gate assignments live
  // here; the switched part goes through assemble_potential).
  std::vector<double> site_potentials;

  double hop(int i, int j) const { return hopping[static_cast<std::size_t>(i) * n_sites + j]; }

  // Nearest-neighbour open chain with amplitude v and U, zero potentials.
  static HubbardParams chain(int n_sites, double v, double interaction);
};

// H_stat = sum_{ij,sigma} v_ij c^dag_j c_i + U sum_i n_iup n_idown
SparseOperator assemble_static(const HubbardParams& params, const FockBasis& basis);

// Diagonal operator sum_{i,sigma} V_i n_{i,sigma}
SparseOperator assemble_potential(std::span<const double> site_potentials,
                                  const FockBasis& basis);

// <psi| n_{i,sigma} |psi> for a normalized state.
double occupation_expectation(const FockBasis& basis, std::span<const Complex> psi,
                              int site, Spin spin);

}  // namespace mottsim

#endif
