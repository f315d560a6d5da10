#include "hivqe/sampler.hpp"

#include <algorithm>
#include <cmath>

namespace hivqe {

using boost::multiprecision::cpp_int;

void AnsatzSpec::validate() const {
  if (n_layers < 0) throw std::invalid_argument("ansatz: negative layer count");
  for (const auto& g : plan) {
    if (g.p < 0 || g.q < 0 || g.p >= n_orb || g.q >= n_orb || g.p == g.q) {
      throw std::invalid_argument("ansatz: rotation pair (" + std::to_string(g.p) + "," +
                                  std::to_string(g.q) + ") invalid for n_orb=" +
                                  std::to_string(n_orb));
    }
  }
}

AnsatzSpec AnsatzSpec::brick_wall(int n_orb, int n_layers) {
  AnsatzSpec spec;
  spec.n_orb = n_orb;
  spec.n_layers = n_layers;
  for (const Spin spin : {Spin::alpha, Spin::beta}) {
    for (int start : {0, 1}) {
      for (int p = start; p + 1 < n_orb; p += 2) spec.plan.push_back({spin, p, p + 1});
    }
  }
  return spec;
}

cpp_int sector_size(int n_orb, int n_alpha, int n_beta) {
  auto choose = [](int n, int k) {
    if (k < 0 || k > n) return cpp_int(0);
    cpp_int r = 1;
    for (int i = 1; i <= k; ++i) {
      r *= n - k + i;
      r /= i;
    }
    return r;
  };
  return choose(n_orb, n_alpha) * choose(n_orb, n_beta);
}

std::vector<std::uint64_t> enumerate_strings(int n_orb, int n_electrons) {
  std::vector<std::uint64_t> out;
  if (n_electrons < 0 || n_electrons > n_orb) return out;
  if (n_electrons == 0) return {0};
  const std::uint64_t limit = n_orb >= 64 ? 0 : (1ULL << n_orb);
  std::uint64_t m = (n_electrons >= 64) ? ~0ULL : ((1ULL << n_electrons) - 1);
  while (true) {
    out.push_back(m);
    // Gosper's hack: next larger integer with the same popcount.
    const std::uint64_t c = m & (~m + 1);
    const std::uint64_t r = m + c;
    if (r == 0) break;
    m = (((r ^ m) >> 2) / c) | r;
    if (limit != 0 && m >= limit) break;
  }
  return out;
}

std::vector<Determinant> enumerate_sector(int n_orb, int n_alpha, int n_beta,
                                          std::uint64_t max_count) {
  const cpp_int count = sector_size(n_orb, n_alpha, n_beta);
  if (count > max_count) {
    throw std::length_error("sector (" + std::to_string(n_orb) + "o," + std::to_string(n_alpha) +
                            "a," + std::to_string(n_beta) + "b) holds " + count.str() +
                            " determinants, above the enumeration limit of " +
                            std::to_string(max_count));
  }
  const auto alphas = enumerate_strings(n_orb, n_alpha);
  const auto betas = enumerate_strings(n_orb, n_beta);
  std::vector<Determinant> out;
  out.reserve(alphas.size() * betas.size());
  for (const auto a : alphas)
    for (const auto b : betas) out.push_back({a, b});
  return out;
}

SectorBasis::SectorBasis(Sector sector, std::uint64_t max_count) : sector_(sector) {
  const cpp_int count = sector_size(sector.n_orb, sector.n_alpha, sector.n_beta);
  if (count > max_count) {
    throw std::length_error("sector holds " + count.str() +
                            " determinants, above the simulation limit of " +
                            std::to_string(max_count));
  }
  alpha_ = enumerate_strings(sector.n_orb, sector.n_alpha);
  beta_ = enumerate_strings(sector.n_orb, sector.n_beta);
  binom_.assign(65, std::vector<std::uint64_t>(65, 0));
  for (int n = 0; n <= 64; ++n) {
    binom_[n][0] = 1;
    for (int k = 1; k <= n; ++k) binom_[n][k] = binom_[n - 1][k - 1] + (k <= n - 1 ? binom_[n - 1][k] : 0);
  }
}

std::size_t SectorBasis::string_rank(std::uint64_t mask) const {
  std::size_t rank = 0;
  int i = 1;
  for (; mask; mask &= mask - 1, ++i) rank += binom_[std::countr_zero(mask)][i];
  return rank;
}

namespace {

void apply_rotation(std::vector<double>& amps, const SectorBasis& basis, const GivensRotation& g,
                    double theta) {
  const double c = std::cos(theta / 2);
  const double s = std::sin(theta / 2);
  const auto& strings = g.spin == Spin::alpha ? basis.alpha_strings() : basis.beta_strings();
  const std::size_t n_beta = basis.beta_strings().size();
  const std::uint64_t bp = 1ULL << g.p;
  const std::uint64_t bq = 1ULL << g.q;
  for (std::size_t k = 0; k < strings.size(); ++k) {
    const std::uint64_t m = strings[k];
    if (!(m & bp) || (m & bq)) continue;
    const std::size_t partner = basis.string_rank(m ^ bp ^ bq);
    // a+_q a_p |m> = sign |m'>
    const double sign = move_phase(m, g.p, g.q);
    auto rotate = [&](std::size_t u, std::size_t v) {
      const double xu = amps[u];
      const double xv = amps[v];
      amps[u] = c * xu - sign * s * xv;
      amps[v] = sign * s * xu + c * xv;
    };
    if (g.spin == Spin::alpha) {
      for (std::size_t b = 0; b < n_beta; ++b) rotate(k * n_beta + b, partner * n_beta + b);
    } else {
      for (std::size_t a = 0; a < basis.alpha_strings().size(); ++a) {
        rotate(a * n_beta + k, a * n_beta + partner);
      }
    }
  }
}

}  // namespace

SectorState prepare_state(const AnsatzSpec& spec, std::span<const double> theta,
                          const SectorBasis& basis) {
  spec.validate();
  if (theta.size() != spec.parameter_count()) {
    throw std::invalid_argument("prepare_state: expected " + std::to_string(spec.parameter_count()) +
                                " parameters, got " + std::to_string(theta.size()));
  }
  if (spec.n_orb != basis.sector().n_orb) {
    throw std::invalid_argument("prepare_state: ansatz and sector disagree on n_orb");
  }
  SectorState state;
  state.amplitudes.assign(basis.size(), 0.0);
  const Sector& s = basis.sector();
  state.amplitudes[basis.index(hartree_fock_det(s.n_alpha, s.n_beta))] = 1.0;
  std::size_t k = 0;
  for (int layer = 0; layer < spec.n_layers; ++layer) {
    for (const auto& g : spec.plan) {
      const double angle = theta[k++];
      if (angle != 0.0) apply_rotation(state.amplitudes, basis, g, angle);
    }
  }
  return state;
}

std::vector<double> sampling_probabilities(const SectorState& state) {
  std::vector<double> p(state.amplitudes.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = state.amplitudes[i] * state.amplitudes[i];
  return p;
}

SampleBatch sample(const SectorState& state, const SectorBasis& basis, std::uint64_t shots,
                   const NoiseModel& noise, std::uint64_t seed) {
  if (shots == 0) throw std::invalid_argument("sample: shots must be positive");
  if (noise.p_flip < 0.0 || noise.p_flip > 1.0) {
    throw std::invalid_argument("sample: p_flip must lie in [0, 1]");
  }
  const auto probs = sampling_probabilities(state);
  std::vector<double> cumulative(probs.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    cumulative[i] = acc;
  }
  const int n_orb = basis.sector().n_orb;
  SampleBatch batch;
  batch.n_orb = n_orb;
  std::mt19937_64 rng(seed);
  for (std::uint64_t shot = 0; shot < shots; ++shot) {
    const double u = uniform01(rng) * acc;
    // upper_bound never selects a zero-probability entry.
    std::size_t idx = static_cast<std::size_t>(
        std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
    if (idx == cumulative.size()) {
      // u rounded up to the total: take the last populated entry.
      do --idx; while (idx > 0 && probs[idx] == 0.0);
    }
    std::string bits = to_string(basis.det(idx), n_orb);
    if (noise.p_flip > 0.0) {
      for (auto& ch : bits) {
        if (ch == '|') continue;
        if (uniform01(rng) < noise.p_flip) ch = ch == '0' ? '1' : '0';
      }
    }
    batch.add(bits);
  }
  return batch;
}

}  // namespace hivqe
