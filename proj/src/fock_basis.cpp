#include "mottsim/fock_basis.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>
#include <string>

namespace mottsim {

namespace {

// Parity of occupied orbitals strictly below orb.
int jordan_wigner_sign(std::uint64_t pattern, int orb) {
  const std::uint64_t below = pattern & ((1ULL << orb) - 1ULL);
  return (std::popcount(below) & 1) ? -1 : 1;
}

constexpr std::uint64_t kUpMask = 0x5555555555555555ULL;  // even bits

}  // namespace

std::optional<std::pair<std::uint64_t, int>> annihilate(std::uint64_t pattern, int orb) {
  if (!orbital_occupied(pattern, orb)) return std::nullopt;
  return std::make_pair(pattern & ~(1ULL << orb), jordan_wigner_sign(pattern, orb));
}

std::optional<std::pair<std::uint64_t, int>> create(std::uint64_t pattern, int orb) {
  if (orbital_occupied(pattern, orb)) return std::nullopt;
  return std::make_pair(pattern | (1ULL << orb), jordan_wigner_sign(pattern, orb));
}

FockBasis FockBasis::full(int n_sites) {
  if (n_sites < 1 || n_sites > 16)
    throw std::invalid_argument("FockBasis: n_sites must be in [1, 16]");
  const std::uint64_t dim = 1ULL << (2 * n_sites);
  std::vector<std::uint64_t> states(dim);
  for (std::uint64_t p = 0; p < dim; ++p) states[p] = p;
  return FockBasis(n_sites, std::nullopt, std::move(states));
}

FockBasis FockBasis::in_sector(int n_sites, Sector sector) {
  if (n_sites < 1 || n_sites > 16)
    throw std::invalid_argument("FockBasis: n_sites must be in [1, 16]");
  if (sector.n_up < 0 || sector.n_up > n_sites || sector.n_down < 0 ||
      sector.n_down > n_sites)
    throw std::domain_error("FockBasis: sector counts out of range for " +
                            std::to_string(n_sites) + " sites");
  std::vector<std::uint64_t> states;
  const std::uint64_t dim = 1ULL << (2 * n_sites);
  const std::uint64_t up_mask = kUpMask & (dim - 1);
  for (std::uint64_t p = 0; p < dim; ++p) {
    const int n_up = std::popcount(p & up_mask);
    const int n_down = std::popcount(p & ~up_mask & (dim - 1));
    if (n_up == sector.n_up && n_down == sector.n_down) states.push_back(p);
  }
  return FockBasis(n_sites, sector, std::move(states));
}

std::optional<std::size_t> FockBasis::index_of(std::uint64_t pattern) const {
  const auto it = std::lower_bound(states_.begin(), states_.end(), pattern);
  if (it == states_.end() || *it != pattern) return std::nullopt;
  return static_cast<std::size_t>(it - states_.begin());
}

FockBasis enumerate_basis(int n_sites, std::optional<Sector> sector) {
  if (sector) return FockBasis::in_sector(n_sites, *sector);
  return FockBasis::full(n_sites);
}

std::optional<HopResult> apply_hop(const FockBasis& basis, int i, int j, Spin spin,
                                   std::size_t state_index) {
  if (i < 0 || i >= basis.n_sites() || j < 0 || j >= basis.n_sites())
    throw std::domain_error("apply_hop: site index out of range");
  if (state_index >= basis.size())
    throw std::domain_error("apply_hop: state index out of range");

  const std::uint64_t pattern = basis.state(state_index);
  const int orb_i = orbital_index(i, spin);
  const int orb_j = orbital_index(j, spin);

  if (i == j) {
    // Number operator.
    if (!orbital_occupied(pattern, orb_i)) return std::nullopt;
    return HopResult{state_index, 1};
  }

  const auto ann = annihilate(pattern, orb_i);
  if (!ann) return std::nullopt;
  const auto cre = create(ann->first, orb_j);
  if (!cre) return std::nullopt;

  const auto target = basis.index_of(cre->first);
  if (!target)
    throw std::logic_error("apply_hop: target state outside basis (sector broken)");
  return HopResult{*target, ann->second * cre->second};
}

}  // namespace mottsim
