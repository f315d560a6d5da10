#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "hivqe/determinant.hpp"
#include "hivqe/subspace.hpp"

namespace hivqe {

enum class Spin { alpha, beta };

/// Real rotation exp(theta/2 (a+_q a_p - a+_p a_q)) on one spin channel.
struct GivensRotation {
  Spin spin = Spin::alpha;
  int p = 0;
  int q = 1;
};

/// Layered, particle-conserving circuit. Every layer applies the same
/// rotation plan with its own angles, so parameter k drives
/// plan[k % plan.size()] in layer k / plan.size().
struct AnsatzSpec {
  int n_orb = 0;
  int n_layers = 0;
  std::vector<GivensRotation> plan;

  std::size_t parameter_count() const { return static_cast<std::size_t>(n_layers) * plan.size(); }
  void validate() const;

  /// Nearest-neighbour brick wall per spin channel: even pairs (0,1),(2,3)...
  /// then odd pairs (1,2),(3,4)..., alpha channel before beta.
  static AnsatzSpec brick_wall(int n_orb, int n_layers);
};

/// Exact |Q| = C(n_orb, n_alpha) * C(n_orb, n_beta).
boost::multiprecision::cpp_int sector_size(int n_orb, int n_alpha, int n_beta);

/// All sector determinants ordered by (alpha, beta) mask value. Throws
/// std::length_error naming the count when it exceeds `max_count`.
std::vector<Determinant> enumerate_sector(int n_orb, int n_alpha, int n_beta,
                                          std::uint64_t max_count = 1ULL << 32);

/// Fixed-popcount masks over n bits in ascending numeric order.
std::vector<std::uint64_t> enumerate_strings(int n_orb, int n_electrons);

/// Index of determinants inside the full sector, (alpha, beta) ordered:
/// index = rank(alpha) * n_beta_strings + rank(beta), with colex ranks.
class SectorBasis {
 public:
  explicit SectorBasis(Sector sector, std::uint64_t max_count = 1ULL << 32);

  const Sector& sector() const { return sector_; }
  std::size_t size() const { return alpha_.size() * beta_.size(); }
  const std::vector<std::uint64_t>& alpha_strings() const { return alpha_; }
  const std::vector<std::uint64_t>& beta_strings() const { return beta_; }

  std::size_t string_rank(std::uint64_t mask) const;
  std::size_t index(const Determinant& d) const {
    return string_rank(d.alpha) * beta_.size() + string_rank(d.beta);
  }
  Determinant det(std::size_t i) const {
    return {alpha_[i / beta_.size()], beta_[i % beta_.size()]};
  }

 private:
  Sector sector_;
  std::vector<std::uint64_t> alpha_;
  std::vector<std::uint64_t> beta_;
  std::vector<std::vector<std::uint64_t>> binom_;
};

/// Real amplitudes over the full sector in SectorBasis order.
struct SectorState {
  std::vector<double> amplitudes;
};

struct NoiseModel {
  double p_flip = 0.0;
};

/// U(theta)|HF> restricted to the sector.
SectorState prepare_state(const AnsatzSpec& spec, std::span<const double> theta,
                          const SectorBasis& basis);

/// |amplitude|^2 per sector index; this is the exact law `sample` draws from.
std::vector<double> sampling_probabilities(const SectorState& state);

/// Draws `shots` determinants i.i.d. from the state, renders them as
/// bitstrings and flips each bit with probability p_flip. Deterministic in
/// `seed` on every platform (mt19937_64 with explicit 53-bit conversion).
SampleBatch sample(const SectorState& state, const SectorBasis& basis, std::uint64_t shots,
                   const NoiseModel& noise, std::uint64_t seed);

/// Uniform double in [0, 1) from the top 53 bits of one engine draw.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace hivqe
