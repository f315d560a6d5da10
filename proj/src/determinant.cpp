#include "hivqe/determinant.hpp"

namespace hivqe {

namespace {

inline int lowest_bit(std::uint64_t m) { return std::countr_zero(m); }

// Walks holes and particles pairwise (both ascending) and accumulates the
// phase of each individual move on the progressively updated mask.
int channel_phase(std::uint64_t mask, const std::vector<int>& holes,
                  const std::vector<int>& particles) {
  int phase = 1;
  for (std::size_t k = 0; k < holes.size(); ++k) {
    phase *= move_phase(mask, holes[k], particles[k]);
    mask ^= (1ULL << holes[k]) | (1ULL << particles[k]);
  }
  return phase;
}

double single_element(std::uint64_t same_d1, std::uint64_t other_d1, int h, int p,
                      const IntegralSet& ints) {
  double v = ints.h1(h, p);
  for (std::uint64_t m = same_d1 & ~(1ULL << h); m; m &= m - 1) {
    const int q = lowest_bit(m);
    v += ints.eri(h, p, q, q) - ints.eri(h, q, q, p);
  }
  for (std::uint64_t m = other_d1; m; m &= m - 1) {
    const int q = lowest_bit(m);
    v += ints.eri(h, p, q, q);
  }
  return v;
}

}  // namespace

std::vector<int> occupied_orbitals(std::uint64_t mask) {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(std::popcount(mask)));
  for (; mask; mask &= mask - 1) out.push_back(lowest_bit(mask));
  return out;
}

std::string to_string(const Determinant& d, int n_orb) {
  std::string s(static_cast<std::size_t>(2 * n_orb + 1), '0');
  for (int p = 0; p < n_orb; ++p) {
    if ((d.alpha >> p) & 1ULL) s[p] = '1';
    if ((d.beta >> p) & 1ULL) s[n_orb + 1 + p] = '1';
  }
  s[n_orb] = '|';
  return s;
}

Determinant parse_determinant(std::string_view text, int n_orb) {
  std::string bits;
  bits.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '|' && i == static_cast<std::size_t>(n_orb)) continue;
    if (c != '0' && c != '1') {
      throw FormatError("determinant '" + std::string(text) + "': unexpected character");
    }
    bits.push_back(c);
  }
  if (bits.size() != static_cast<std::size_t>(2 * n_orb)) {
    throw FormatError("determinant '" + std::string(text) + "': expected " +
                      std::to_string(2 * n_orb) + " occupation bits");
  }
  Determinant d;
  for (int p = 0; p < n_orb; ++p) {
    if (bits[p] == '1') d.alpha |= 1ULL << p;
    if (bits[n_orb + p] == '1') d.beta |= 1ULL << p;
  }
  return d;
}

Determinant hartree_fock_det(int n_alpha, int n_beta) {
  auto fill = [](int n) { return n >= 64 ? ~0ULL : ((1ULL << n) - 1); };
  return {fill(n_alpha), fill(n_beta)};
}

ExcitationInfo excitation_info(const Determinant& d1, const Determinant& d2) {
  ExcitationInfo info;
  info.alpha_holes = occupied_orbitals(d1.alpha & ~d2.alpha);
  info.alpha_particles = occupied_orbitals(d2.alpha & ~d1.alpha);
  info.beta_holes = occupied_orbitals(d1.beta & ~d2.beta);
  info.beta_particles = occupied_orbitals(d2.beta & ~d1.beta);
  info.degree = excitation_degree(d1, d2);
  if (info.alpha_holes.size() == info.alpha_particles.size() &&
      info.beta_holes.size() == info.beta_particles.size()) {
    info.phase = channel_phase(d1.alpha, info.alpha_holes, info.alpha_particles) *
                 channel_phase(d1.beta, info.beta_holes, info.beta_particles);
  }
  return info;
}

double diagonal_energy(const Determinant& d, const IntegralSet& ints) {
  double e = 0.0;
  for (std::uint64_t m = d.alpha; m; m &= m - 1) {
    const int p = lowest_bit(m);
    e += ints.h1(p, p);
    for (std::uint64_t n = m & (m - 1); n; n &= n - 1) {
      const int q = lowest_bit(n);
      e += ints.coulomb(p, q) - ints.exchange(p, q);
    }
    for (std::uint64_t n = d.beta; n; n &= n - 1) e += ints.coulomb(p, lowest_bit(n));
  }
  for (std::uint64_t m = d.beta; m; m &= m - 1) {
    const int p = lowest_bit(m);
    e += ints.h1(p, p);
    for (std::uint64_t n = m & (m - 1); n; n &= n - 1) {
      const int q = lowest_bit(n);
      e += ints.coulomb(p, q) - ints.exchange(p, q);
    }
  }
  return e;
}

double slater_condon(const Determinant& d1, const Determinant& d2, const IntegralSet& ints) {
  const std::uint64_t xa = d1.alpha ^ d2.alpha;
  const std::uint64_t xb = d1.beta ^ d2.beta;
  const int na = std::popcount(xa);
  const int nb = std::popcount(xb);
  if (na + nb > 4 || std::popcount(d1.alpha) != std::popcount(d2.alpha) ||
      std::popcount(d1.beta) != std::popcount(d2.beta)) {
    return 0.0;
  }
  if (na + nb == 0) return diagonal_energy(d1, ints);

  if (na + nb == 2) {
    if (na == 2) {
      const int h = lowest_bit(d1.alpha & xa);
      const int p = lowest_bit(d2.alpha & xa);
      return move_phase(d1.alpha, h, p) * single_element(d1.alpha, d1.beta, h, p, ints);
    }
    const int h = lowest_bit(d1.beta & xb);
    const int p = lowest_bit(d2.beta & xb);
    return move_phase(d1.beta, h, p) * single_element(d1.beta, d1.alpha, h, p, ints);
  }

  if (na == 2) {  // opposite-spin double
    const int ha = lowest_bit(d1.alpha & xa);
    const int pa = lowest_bit(d2.alpha & xa);
    const int hb = lowest_bit(d1.beta & xb);
    const int pb = lowest_bit(d2.beta & xb);
    const int phase = move_phase(d1.alpha, ha, pa) * move_phase(d1.beta, hb, pb);
    return phase * ints.eri(ha, pa, hb, pb);
  }

  // same-spin double
  const std::uint64_t m1 = na == 4 ? d1.alpha : d1.beta;
  const std::uint64_t m2 = na == 4 ? d2.alpha : d2.beta;
  const std::uint64_t x = m1 ^ m2;
  std::uint64_t holes = m1 & x;
  std::uint64_t parts = m2 & x;
  const int h1 = lowest_bit(holes);
  const int h2 = lowest_bit(holes & (holes - 1));
  const int p1 = lowest_bit(parts);
  const int p2 = lowest_bit(parts & (parts - 1));
  int phase = move_phase(m1, h1, p1);
  phase *= move_phase(m1 ^ (1ULL << h1) ^ (1ULL << p1), h2, p2);
  return phase * (ints.eri(h1, p1, h2, p2) - ints.eri(h1, p2, h2, p1));
}

std::vector<Determinant> generate_singles_doubles(const Determinant& ref, int n_orb) {
  const std::uint64_t full = n_orb >= 64 ? ~0ULL : ((1ULL << n_orb) - 1);
  const auto occ_a = occupied_orbitals(ref.alpha);
  const auto occ_b = occupied_orbitals(ref.beta);
  const auto vir_a = occupied_orbitals(full & ~ref.alpha);
  const auto vir_b = occupied_orbitals(full & ~ref.beta);

  std::vector<Determinant> out;
  auto move = [](std::uint64_t m, int h, int p) { return m ^ (1ULL << h) ^ (1ULL << p); };

  for (int h : occ_a)
    for (int p : vir_a) out.push_back({move(ref.alpha, h, p), ref.beta});
  for (int h : occ_b)
    for (int p : vir_b) out.push_back({ref.alpha, move(ref.beta, h, p)});

  auto same_spin_doubles = [&](std::uint64_t m, const std::vector<int>& occ,
                               const std::vector<int>& vir, auto&& emit) {
    for (std::size_t i = 0; i < occ.size(); ++i)
      for (std::size_t j = i + 1; j < occ.size(); ++j)
        for (std::size_t a = 0; a < vir.size(); ++a)
          for (std::size_t b = a + 1; b < vir.size(); ++b)
            emit(m ^ (1ULL << occ[i]) ^ (1ULL << occ[j]) ^ (1ULL << vir[a]) ^ (1ULL << vir[b]));
  };
  same_spin_doubles(ref.alpha, occ_a, vir_a,
                    [&](std::uint64_t a) { out.push_back({a, ref.beta}); });
  same_spin_doubles(ref.beta, occ_b, vir_b,
                    [&](std::uint64_t b) { out.push_back({ref.alpha, b}); });

  for (int ha : occ_a)
    for (int pa : vir_a)
      for (int hb : occ_b)
        for (int pb : vir_b) out.push_back({move(ref.alpha, ha, pa), move(ref.beta, hb, pb)});
  return out;
}

}  // namespace hivqe
