#ifndef MOTTSIM_FOCK_BASIS_HPP
#define MOTTSIM_FOCK_BASIS_HPP

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace mottsim {

enum class Spin : int { Up = 0, Down = 1 };

struct Sector {
  int n_up;
  int n_down;
};

// Orbital convention: orbital(site, spin) = 2*site + (spin == Down).
// A Fock state is a bit pattern over 2*n_sites orbitals, bit b set means
// orbital b occupied.
inline constexpr int orbital_index(int site, Spin spin) {
  return 2 * site + (spin == Spin::Down ? 1 : 0);
}

inline constexpr bool orbital_occupied(std::uint64_t pattern, int orb) {
  return (pattern >> orb) & 1ULL;
}

// c_orb |pattern>: empty orbital annihilates to nothing, otherwise the sign is
// (-1)^(number of occupied orbitals below orb).
std::optional<std::pair<std::uint64_t, int>> annihilate(std::uint64_t pattern, int orb);

// c^dagger_orb |pattern>
std::optional<std::pair<std::uint64_t, int>> create(std::uint64_t pattern, int orb);

class FockBasis {
 public:
  // All 4^n_sites occupation patterns, or the fixed-(n_up, n_down) subset.
  static FockBasis full(int n_sites);
  static FockBasis in_sector(int n_sites, Sector sector);

  int n_sites() const { return n_sites_; }
  std::optional<Sector> sector() const { return sector_; }
  std::size_t size() const { return states_.size(); }
  std::uint64_t state(std::size_t index) const { return states_[index]; }
  const std::vector<std::uint64_t>& states() const { return states_; }

  // Inverse of state(); nothing if the pattern is outside the basis.
  std::optional<std::size_t> index_of(std::uint64_t pattern) const;

  bool occupied(std::size_t index, int site, Spin spin) const {
    return orbital_occupied(states_[index], orbital_index(site, spin));
  }

 private:
  FockBasis(int n_sites, std::optional<Sector> sector, std::vector<std::uint64_t> states)
      : n_sites_(n_sites), sector_(sector), states_(std::move(states)) {}

  int n_sites_ = 0;
  std::optional<Sector> sector_;
  std::vector<std::uint64_t> states_;  // strictly ascending
};

struct HopResult {
  std::size_t index;
  int sign;  // +1 or -1
};

FockBasis enumerate_basis(int n_sites, std::optional<Sector> sector = std::nullopt);

// c^dagger_{j,spin} c_{i,spin} applied to one basis state. Nothing if the
// amplitude vanishes; otherwise the target index and the fermionic sign.
std::optional<HopResult> apply_hop(const FockBasis& basis, int i, int j, Spin spin,
                                   std::size_t state_index);

}  // namespace mottsim

#endif
