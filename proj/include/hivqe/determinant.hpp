#pragma once

#include <bit>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "hivqe/integrals.hpp"

namespace hivqe {

/// Fixed particle-number sector: n_alpha and n_beta electrons in n_orb
/// spatial orbitals.
struct Sector {
  int n_orb = 0;
  int n_alpha = 0;
  int n_beta = 0;

  static Sector of(const IntegralSet& ints) {
    return {static_cast<int>(ints.n_orb()), ints.n_alpha(), ints.n_beta()};
  }
  bool operator==(const Sector&) const = default;
};

/// Slater determinant as a pair of occupation masks. Bit p of `alpha` set
/// means spatial orbital p holds an alpha electron. Ordering is
/// lexicographic on (alpha, beta), which doubles as the tie-break key in
/// every ranking.
struct Determinant {
  std::uint64_t alpha = 0;
  std::uint64_t beta = 0;

  auto operator<=>(const Determinant&) const = default;
};

struct DeterminantHash {
  std::size_t operator()(const Determinant& d) const noexcept {
    std::uint64_t h = d.alpha * 0x9E3779B97F4A7C15ULL;
    h ^= d.beta + 0x632BE59BD9B4E019ULL + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

inline bool in_sector(const Determinant& d, const Sector& s) {
  const std::uint64_t mask = s.n_orb >= 64 ? ~0ULL : ((1ULL << s.n_orb) - 1);
  return (d.alpha & ~mask) == 0 && (d.beta & ~mask) == 0 &&
         std::popcount(d.alpha) == s.n_alpha && std::popcount(d.beta) == s.n_beta;
}

/// Renders "alpha|beta" with character i standing for orbital i, e.g. the
/// (2a,2b) Hartree-Fock determinant over 4 orbitals is "1100|1100".
std::string to_string(const Determinant& d, int n_orb);

/// Inverse of to_string. Throws FormatError on bad characters or lengths.
Determinant parse_determinant(std::string_view text, int n_orb);

Determinant hartree_fock_det(int n_alpha, int n_beta);
inline Determinant hartree_fock_det(const IntegralSet& ints) {
  return hartree_fock_det(ints.n_alpha(), ints.n_beta());
}

/// Excitation connecting d1 to d2. Holes are orbitals occupied in d1 only,
/// particles those occupied in d2 only, both ascending. The phase is the
/// fermionic sign picked up when moving hole k to particle k in order,
/// counted per spin channel.
struct ExcitationInfo {
  int degree = 0;
  std::vector<int> alpha_holes, alpha_particles;
  std::vector<int> beta_holes, beta_particles;
  int phase = 1;
};

ExcitationInfo excitation_info(const Determinant& d1, const Determinant& d2);

inline int excitation_degree(const Determinant& d1, const Determinant& d2) {
  return (std::popcount(d1.alpha ^ d2.alpha) + std::popcount(d1.beta ^ d2.beta)) / 2;
}

/// Sign of moving an electron from orbital `from` to orbital `to` inside
/// `mask`: (-1)^(occupied orbitals strictly between them).
inline int move_phase(std::uint64_t mask, int from, int to) {
  const int lo = from < to ? from : to;
  const int hi = from < to ? to : from;
  if (hi - lo < 2) return 1;
  const std::uint64_t between = ((1ULL << hi) - 1) & ~((2ULL << lo) - 1);
  return (std::popcount(mask & between) & 1) ? -1 : 1;
}

/// <d1|H|d2> without the core energy, by the Slater-Condon rules.
double slater_condon(const Determinant& d1, const Determinant& d2, const IntegralSet& ints);

/// Diagonal element <d|H|d> without the core energy.
double diagonal_energy(const Determinant& d, const IntegralSet& ints);

/// All distinct single and double excitations of `ref` within its sector.
std::vector<Determinant> generate_singles_doubles(const Determinant& ref, int n_orb);

/// Occupied orbital list of a mask, ascending.
std::vector<int> occupied_orbitals(std::uint64_t mask);

}  // namespace hivqe

template <>
struct std::hash<hivqe::Determinant> : hivqe::DeterminantHash {};
