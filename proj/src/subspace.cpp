#include "hivqe/subspace.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "hivqe/parallel.hpp"

namespace hivqe {

Subspace::Subspace(Sector sector, std::span<const Determinant> dets) : sector_(sector) {
  for (const auto& d : dets) insert(d);
}

std::optional<std::size_t> Subspace::index_of(const Determinant& d) const {
  const auto it = index_.find(d);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool Subspace::insert(const Determinant& d) {
  if (!in_sector(d, sector_)) {
    throw std::invalid_argument("determinant " + to_string(d, sector_.n_orb) +
                                " is outside the (" + std::to_string(sector_.n_alpha) + "a," +
                                std::to_string(sector_.n_beta) + "b) sector");
  }
  const auto [it, inserted] = index_.emplace(d, dets_.size());
  if (inserted) dets_.push_back(d);
  return inserted;
}

Subspace Subspace::empty_copy() const {
  Subspace out(sector_);
  out.expanded_ = expanded_;
  return out;
}

void SampleBatch::add(std::string_view bitstring, std::uint64_t count) {
  std::string bits;
  bits.reserve(bitstring.size());
  for (std::size_t i = 0; i < bitstring.size(); ++i) {
    const char c = bitstring[i];
    if (c == '|' && i == static_cast<std::size_t>(n_orb)) continue;
    if (c != '0' && c != '1') {
      throw FormatError("bitstring '" + std::string(bitstring) + "': unexpected character");
    }
    bits.push_back(c);
  }
  if (bits.size() != static_cast<std::size_t>(2 * n_orb)) {
    throw FormatError("bitstring '" + std::string(bitstring) + "' has " +
                      std::to_string(bits.size()) + " bits, expected " +
                      std::to_string(2 * n_orb));
  }
  bits.insert(bits.begin() + n_orb, '|');
  counts[bits] += count;
  total_shots += count;
}

void write_batch(const SampleBatch& batch, std::ostream& out) {
  for (const auto& [bits, count] : batch.counts) out << bits << ' ' << count << '\n';
}

SampleBatch read_batch(std::istream& in, int n_orb) {
  SampleBatch batch;
  batch.n_orb = n_orb;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    std::string bits;
    std::uint64_t count = 0;
    if (!(fields >> bits) || bits[0] == '#') continue;
    if (!(fields >> count)) throw FormatError("sample line '" + line + "': missing count");
    batch.add(bits, count);
  }
  return batch;
}

std::uint64_t recover_channel(std::uint64_t mask, int n_orb, int target,
                              std::span<const double> occupancy) {
  if (occupancy.size() < static_cast<std::size_t>(n_orb)) {
    throw std::invalid_argument("recover_channel: occupancy hint shorter than n_orb");
  }
  while (std::popcount(mask) > target) {
    int pick = -1;
    double worst = -1.0;
    for (int p = 0; p < n_orb; ++p) {
      if (!((mask >> p) & 1ULL)) continue;
      const double miss = 1.0 - occupancy[p];
      if (miss > worst) {
        worst = miss;
        pick = p;
      }
    }
    mask &= ~(1ULL << pick);
  }
  while (std::popcount(mask) < target) {
    int pick = -1;
    double worst = -1.0;
    for (int p = 0; p < n_orb; ++p) {
      if ((mask >> p) & 1ULL) continue;
      const double miss = occupancy[p];
      if (miss > worst) {
        worst = miss;
        pick = p;
      }
    }
    mask |= 1ULL << pick;
  }
  return mask;
}

FilterResult filter_symmetry(const SampleBatch& batch, const Sector& sector, RecoveryMode mode,
                             const OccupancyHint* hint) {
  if (mode == RecoveryMode::recover && hint == nullptr) {
    throw std::invalid_argument("filter_symmetry: recovery needs an occupancy hint");
  }
  FilterResult out;
  std::unordered_map<Determinant, std::size_t, DeterminantHash> seen;
  auto keep = [&](const Determinant& d, std::uint64_t count) {
    const auto [it, inserted] = seen.emplace(d, out.dets.size());
    if (inserted) {
      out.dets.push_back(d);
      out.counts.push_back(count);
    } else {
      out.counts[it->second] += count;
    }
  };
  for (const auto& [bits, count] : batch.counts) {
    if (bits.size() != static_cast<std::size_t>(2 * sector.n_orb + 1)) {
      throw FormatError("bitstring '" + bits + "' does not match n_orb=" +
                        std::to_string(sector.n_orb));
    }
    Determinant d = parse_determinant(bits, sector.n_orb);
    if (in_sector(d, sector)) {
      keep(d, count);
      out.valid_shots += count;
      continue;
    }
    if (mode == RecoveryMode::discard) {
      out.discarded_shots += count;
      continue;
    }
    if (std::popcount(d.alpha) != sector.n_alpha) {
      d.alpha = recover_channel(d.alpha, sector.n_orb, sector.n_alpha, hint->alpha);
    }
    if (std::popcount(d.beta) != sector.n_beta) {
      d.beta = recover_channel(d.beta, sector.n_orb, sector.n_beta, hint->beta);
    }
    keep(d, count);
    out.recovered_shots += count;
  }
  return out;
}

namespace {

// Indices ordered by |amplitude| descending, determinant ascending on ties.
std::vector<std::size_t> rank_by_amplitude(const Subspace& sub, std::span<const double> amps) {
  std::vector<std::size_t> order(sub.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double ma = std::abs(amps[a]);
    const double mb = std::abs(amps[b]);
    if (ma != mb) return ma > mb;
    return sub[a] < sub[b];
  });
  return order;
}

void check_aligned(const Subspace& sub, std::span<const double> amps, const char* who) {
  if (amps.size() != sub.size()) {
    throw std::invalid_argument(std::string(who) + ": amplitude vector length " +
                                std::to_string(amps.size()) + " does not match subspace size " +
                                std::to_string(sub.size()));
  }
}

Subspace keep_marked(const Subspace& sub, const std::vector<char>& keep) {
  Subspace out = sub.empty_copy();
  for (std::size_t i = 0; i < sub.size(); ++i) {
    if (keep[i]) out.insert(sub[i]);
  }
  return out;
}

}  // namespace

Subspace cap_screen(const Subspace& sub, std::size_t k, const IntegralSet& ints,
                    const SolverOptions& opts) {
  if (k == 0) throw std::invalid_argument("cap_screen: k must be at least 1");
  if (sub.size() <= k) return sub;
  const CIVector c = ground_state(project(sub, ints), SolveMode::loose, opts);
  const Determinant hf = hartree_fock_det(sub.sector().n_alpha, sub.sector().n_beta);

  std::vector<char> keep(sub.size(), 0);
  std::size_t kept = 0;
  if (const auto hf_idx = sub.index_of(hf)) {
    keep[*hf_idx] = 1;
    kept = 1;
  }
  for (const std::size_t i : rank_by_amplitude(sub, c.amplitudes)) {
    if (kept >= k) break;
    if (keep[i]) continue;
    keep[i] = 1;
    ++kept;
  }
  return keep_marked(sub, keep);
}

Subspace amplitude_screen(const Subspace& sub, std::span<const double> amplitudes,
                          double threshold) {
  check_aligned(sub, amplitudes, "amplitude_screen");
  const Determinant hf = hartree_fock_det(sub.sector().n_alpha, sub.sector().n_beta);
  std::vector<char> keep(sub.size(), 0);
  for (std::size_t i = 0; i < sub.size(); ++i) {
    keep[i] = std::abs(amplitudes[i]) >= threshold || sub[i] == hf;
  }
  return keep_marked(sub, keep);
}

Subspace classical_expand(const Subspace& sub, std::span<const double> amplitudes, std::size_t m,
                          const IntegralSet& ints) {
  check_aligned(sub, amplitudes, "classical_expand");
  Subspace out = sub;
  std::optional<Determinant> ref;
  for (const std::size_t i : rank_by_amplitude(sub, amplitudes)) {
    if (!sub.is_expanded(sub[i])) {
      ref = sub[i];
      break;
    }
  }
  if (!ref) return out;
  out.mark_expanded(*ref);
  if (m == 0) return out;

  std::vector<Determinant> candidates;
  for (const auto& d : generate_singles_doubles(*ref, sub.sector().n_orb)) {
    if (!sub.contains(d)) candidates.push_back(d);
  }
  std::vector<double> coupling(candidates.size());
  parallel_for(candidates.size(), [&](std::size_t i) {
    coupling[i] = std::abs(slater_condon(*ref, candidates[i], ints));
  });
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (coupling[a] != coupling[b]) return coupling[a] > coupling[b];
    return candidates[a] < candidates[b];
  });
  const std::size_t take = std::min(m, order.size());
  for (std::size_t k = 0; k < take; ++k) out.insert(candidates[order[k]]);
  return out;
}

Subspace tensor_reconstruct(const Subspace& sub, bool closed_shell) {
  const Sector& s = sub.sector();
  if (closed_shell && s.n_alpha != s.n_beta) {
    throw std::invalid_argument("tensor_reconstruct: closed-shell collation needs n_alpha == n_beta");
  }
  std::vector<std::uint64_t> alphas, betas;
  std::unordered_set<std::uint64_t> seen_a, seen_b;
  for (const auto& d : sub) {
    if (seen_a.insert(d.alpha).second) alphas.push_back(d.alpha);
    if (seen_b.insert(d.beta).second) betas.push_back(d.beta);
  }
  if (closed_shell) {
    for (const auto b : betas) {
      if (seen_a.insert(b).second) alphas.push_back(b);
    }
    betas = alphas;
  }
  Subspace out = sub;
  for (const auto a : alphas)
    for (const auto b : betas) out.insert({a, b});
  return out;
}

Subspace unite(const Subspace& sub, std::span<const Determinant> dets) {
  Subspace out = sub;
  for (const auto& d : dets) out.insert(d);
  return out;
}

std::vector<double> realign(const Subspace& from, std::span<const double> amplitudes,
                            const Subspace& to) {
  check_aligned(from, amplitudes, "realign");
  std::vector<double> out(to.size(), 0.0);
  for (std::size_t i = 0; i < to.size(); ++i) {
    if (const auto j = from.index_of(to[i])) out[i] = amplitudes[*j];
  }
  return out;
}

void write_subspace(const Subspace& sub, std::ostream& out) {
  for (const auto& d : sub) out << to_string(d, sub.sector().n_orb) << '\n';
}

Subspace read_subspace(std::istream& in, const Sector& sector) {
  Subspace sub(sector);
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    std::string token;
    if (!(fields >> token) || token[0] == '#') continue;
    sub.insert(parse_determinant(token, sector.n_orb));
  }
  return sub;
}

}  // namespace hivqe
