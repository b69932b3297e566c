#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <map>

#include "doctest.h"
#include "mottsim/fock_basis.hpp"
#include "mottsim/hubbard.hpp"
#include "support/oracles.hpp"
#include "support/testbeds.hpp"

using namespace mottsim;
using oracles::Md;

namespace {

// Dense matrix of the annihilator c_orb in the full basis, built from the
// library's bit-level primitive.
Md annihilator_from_library(int n_sites, int orb) {
  const FockBasis basis = FockBasis::full(n_sites);
  Md M = Md::Zero(basis.size(), basis.size());
  for (std::size_t col = 0; col < basis.size(); ++col) {
    auto res = annihilate(basis.state(col), orb);
    if (!res) continue;
    M(*basis.index_of(res->first), col) = static_cast<double>(res->second);
  }
  return M;
}

}  // namespace

TEST_CASE("orbital indexing convention") {
  CHECK(orbital_index(0, Spin::Up) == 0);
  CHECK(orbital_index(0, Spin::Down) == 1);
  CHECK(orbital_index(3, Spin::Up) == 6);
  CHECK(orbital_occupied(0b0110, 1));
  CHECK(!orbital_occupied(0b0110, 0));
}

TEST_CASE("annihilate and create signs match the Kronecker construction") {
  for (int n_sites = 1; n_sites <= 3; ++n_sites) {
    const int n_orb = 2 * n_sites;
    for (int orb = 0; orb < n_orb; ++orb) {
      const Md lib = annihilator_from_library(n_sites, orb);
      const Md kron = oracles::jw_annihilator(n_orb, orb);
      CHECK((lib - kron).cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("canonical anticommutation relations, dense") {
  const int n_sites = 3;
  const int n_orb = 2 * n_sites;
  const Md id = Md::Identity(1ULL << n_orb, 1ULL << n_orb);
  std::vector<Md> c;
  for (int orb = 0; orb < n_orb; ++orb)
    c.push_back(annihilator_from_library(n_sites, orb));
  for (int a = 0; a < n_orb; ++a) {
    for (int b = 0; b < n_orb; ++b) {
      const Md acc = c[a] * Md(c[b].adjoint()) + Md(c[b].adjoint()) * c[a];
      const Md ac = c[a] * c[b] + c[b] * c[a];
      const Md expected = (a == b) ? id : Md(Md::Zero(id.rows(), id.cols()));
      CHECK((acc - expected).cwiseAbs().maxCoeff() == 0.0);
      CHECK(ac.cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("hop sign follows the occupied-orbitals-below parity") {
  // Pattern 0b0110: orbitals 1 (site 0 down) and 2 (site 1 up) occupied.
  // c^dag_{0,up} c_{1,up}: annihilating orbital 2 passes orbital 1 -> sign -1;
  // creating orbital 0 passes nothing -> total sign -1, target 0b0011.
  const FockBasis basis = FockBasis::full(2);
  const std::size_t idx = *basis.index_of(0b0110);
  auto hop = apply_hop(basis, 1, 0, Spin::Up, idx);
  REQUIRE(hop.has_value());
  CHECK(basis.state(hop->index) == 0b0011);
  CHECK(hop->sign == -1);

  // Annihilating an empty orbital gives nothing.
  CHECK(!apply_hop(basis, 0, 1, Spin::Down, *basis.index_of(0b0100)));
  // Pauli blocking: target orbital already occupied.
  CHECK(!apply_hop(basis, 1, 0, Spin::Up, *basis.index_of(0b0101)));
}

TEST_CASE("basis sizes: full and sector") {
  CHECK(FockBasis::full(3).size() == 64);
  CHECK(FockBasis::in_sector(2, {1, 1}).size() == 4);
  CHECK(FockBasis::in_sector(8, {4, 4}).size() ==
        oracles::binomial(8, 4) * oracles::binomial(8, 4));
  CHECK(FockBasis::in_sector(6, {3, 3}).size() ==
        oracles::binomial(6, 3) * oracles::binomial(6, 3));

  // Sector states carry exactly the requested occupation counts.
  const FockBasis b = FockBasis::in_sector(3, {2, 1});
  for (std::size_t i = 0; i < b.size(); ++i) {
    int up = 0, dn = 0;
    for (int s = 0; s < 3; ++s) {
      up += b.occupied(i, s, Spin::Up);
      dn += b.occupied(i, s, Spin::Down);
    }
    CHECK(up == 2);
    CHECK(dn == 1);
  }
}

TEST_CASE("assemble_static is structurally Hermitian") {
  HubbardParams p = HubbardParams::chain(3, -1.0, 10.0);
  p.site_potentials = {0.3, -0.1, 0.7};
  for (auto basis : {FockBasis::full(3), FockBasis::in_sector(3, {2, 1})}) {
    const SparseOperator h = assemble_static(p, basis);
    CHECK(h.structurally_hermitian());
    const Md d = oracles::to_dense(h);
    CHECK((d - Md(d.adjoint())).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("static part excludes switched site potentials") {
  // assemble_static builds hopping + U only; site potentials ride along in
  // HubbardParams and reach the generator through assemble_potential, as the
  // switched channel. At U = 0 the static part is pure hopping, traceless.
  const FockBasis basis = FockBasis::in_sector(2, {1, 1});
  HubbardParams p = HubbardParams::chain(2, -1.0, 0.0);
  const Md h0 = oracles::to_dense(assemble_static(p, basis));
  CHECK(std::abs(h0.trace()) == 0.0);

  const std::vector<double> v = {2.5, -2.5};
  const Md hp = oracles::to_dense(assemble_potential(v, basis));
  // Diagonal with entries sum_i V_i (n_iup + n_idn).
  CHECK((hp - Md(hp.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0);
  for (std::size_t k = 0; k < basis.size(); ++k) {
    double want = 0.0;
    for (int s = 0; s < 2; ++s)
      want += v[s] * (basis.occupied(k, s, Spin::Up) +
                      basis.occupied(k, s, Spin::Down));
    CHECK(hp(k, k) == Complex{want, 0.0});
  }
}

TEST_CASE("sector assembly equals projected full-space assembly") {
  for (int n = 2; n <= 4; ++n) {
    const HubbardParams p = HubbardParams::chain(n, -1.0, 7.5);
    const Sector sec{(n + 1) / 2, n / 2};
    const FockBasis full = FockBasis::full(n);
    const FockBasis sub = FockBasis::in_sector(n, sec);
    const Md hf = oracles::to_dense(assemble_static(p, full));
    const Md hs = oracles::to_dense(assemble_static(p, sub));

    for (std::size_t i = 0; i < sub.size(); ++i) {
      const std::size_t fi = *full.index_of(sub.state(i));
      for (std::size_t j = 0; j < sub.size(); ++j) {
        const std::size_t fj = *full.index_of(sub.state(j));
        CHECK(hs(i, j) == hf(fi, fj));
      }
      // Rows leaving the sector must vanish: particle number is conserved.
      for (std::size_t fj = 0; fj < full.size(); ++fj)
        if (!sub.index_of(full.state(fj)).has_value())
          CHECK(hf(fi, fj) == Complex{0.0, 0.0});
    }
  }
}

TEST_CASE("occupation sum rule") {
  const int n = 3;
  const Sector sec{2, 1};
  const FockBasis basis = FockBasis::in_sector(n, sec);
  oracles::SplitMix rng(99);
  const CVector psi = oracles::random_state(basis.size(), rng);
  double total = 0.0;
  for (int s = 0; s < n; ++s)
    total += occupation_expectation(basis, psi, s, Spin::Up) +
             occupation_expectation(basis, psi, s, Spin::Down);
  CHECK(std::abs(total - (sec.n_up + sec.n_down)) <= 1e-12);
}

TEST_CASE("two-site half-filling ground energy") {
  const double v = -1.0;
  for (double U : {0.0, 1.0, 10.0}) {
    ModelConfig m = testbeds::n2_model();
    m.interaction = U;
    m.v_sd = 0.0;
    auto model = build_model(m, testbeds::drive());
    auto g = testbeds::ground_of(model, 1e-12, 7);
    const double exact = (U - std::sqrt(U * U + 16.0 * v * v)) / 2.0;
    CHECK(std::abs(g.energy - exact) <= 1e-10);
  }
}

TEST_CASE("chain parameters") {
  const HubbardParams p = HubbardParams::chain(4, -1.5, 3.0);
  CHECK(p.n_sites == 4);
  CHECK(p.interaction == 3.0);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      CHECK(p.hop(i, j) == (std::abs(i - j) == 1 ? -1.5 : 0.0));
}
