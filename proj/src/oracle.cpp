#include "hivqe/oracle.hpp"

#include <bit>
#include <optional>
#include <stdexcept>

#include "hivqe/sampler.hpp"

namespace hivqe {

FciResult fci_ground(const IntegralSet& ints, std::uint64_t limit, const SolverOptions& opts) {
  const Sector s = Sector::of(ints);
  FciResult out;
  out.dets = enumerate_sector(s.n_orb, s.n_alpha, s.n_beta, limit);
  out.sector_size = out.dets.size();
  out.vector = ground_state(project(out.dets, ints), SolveMode::tight, opts);
  out.energy = out.vector.energy;
  return out;
}

namespace {

// a_j |x>; nullopt when orbital j is empty.
std::optional<std::pair<std::uint64_t, int>> annihilate(std::uint64_t x, int j, int sign) {
  if (!((x >> j) & 1ULL)) return std::nullopt;
  const int below = std::popcount(x & ((1ULL << j) - 1));
  return std::make_pair(x ^ (1ULL << j), (below & 1) ? -sign : sign);
}

std::optional<std::pair<std::uint64_t, int>> create(std::uint64_t x, int j, int sign) {
  if ((x >> j) & 1ULL) return std::nullopt;
  const int below = std::popcount(x & ((1ULL << j) - 1));
  return std::make_pair(x | (1ULL << j), (below & 1) ? -sign : sign);
}

}  // namespace

Eigen::MatrixXd brute_force_hamiltonian(const IntegralSet& ints) {
  const int n = static_cast<int>(ints.n_orb());
  if (2 * n > 8) throw std::length_error("brute_force_hamiltonian: at most 8 spin orbitals");
  const int dim = 1 << (2 * n);
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(dim, dim) * ints.e_core();
  auto so = [n](int p, int spin) { return p + spin * n; };

  for (int x = 0; x < dim; ++x) {
    const auto ket = static_cast<std::uint64_t>(x);
    for (int sigma = 0; sigma < 2; ++sigma) {
      for (int p = 0; p < n; ++p) {
        for (int q = 0; q < n; ++q) {
          // h_pq a+_p a_q
          const double hpq = ints.h1(p, q);
          if (hpq != 0.0) {
            if (auto a = annihilate(ket, so(q, sigma), 1)) {
              if (auto c = create(a->first, so(p, sigma), a->second)) {
                h(static_cast<Eigen::Index>(c->first), x) += hpq * c->second;
              }
            }
          }
          // 1/2 (pq|rs) a+_p,sigma a+_r,tau a_s,tau a_q,sigma
          for (int tau = 0; tau < 2; ++tau) {
            for (int r = 0; r < n; ++r) {
              for (int s = 0; s < n; ++s) {
                const double v = ints.eri(p, q, r, s);
                if (v == 0.0) continue;
                auto s1 = annihilate(ket, so(q, sigma), 1);
                if (!s1) continue;
                auto s2 = annihilate(s1->first, so(s, tau), s1->second);
                if (!s2) continue;
                auto s3 = create(s2->first, so(r, tau), s2->second);
                if (!s3) continue;
                auto s4 = create(s3->first, so(p, sigma), s3->second);
                if (!s4) continue;
                h(static_cast<Eigen::Index>(s4->first), x) += 0.5 * v * s4->second;
              }
            }
          }
        }
      }
    }
  }
  return h;
}

}  // namespace hivqe
