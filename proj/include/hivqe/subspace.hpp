#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "hivqe/determinant.hpp"
#include "hivqe/hamiltonian.hpp"
#include "hivqe/integrals.hpp"

namespace hivqe {

/// Ordered, duplicate-free set of sector-valid determinants, plus the record
/// of determinants already used as classical-expansion references.
class Subspace {
 public:
  explicit Subspace(Sector sector) : sector_(sector) {}
  Subspace(Sector sector, std::span<const Determinant> dets);

  const Sector& sector() const { return sector_; }
  std::size_t size() const { return dets_.size(); }
  bool empty() const { return dets_.empty(); }
  const Determinant& operator[](std::size_t i) const { return dets_[i]; }
  const std::vector<Determinant>& dets() const { return dets_; }
  auto begin() const { return dets_.begin(); }
  auto end() const { return dets_.end(); }

  bool contains(const Determinant& d) const { return index_.count(d) != 0; }
  std::optional<std::size_t> index_of(const Determinant& d) const;

  /// Appends d if absent. Returns true when inserted; throws
  /// std::invalid_argument for a determinant outside the sector.
  bool insert(const Determinant& d);

  const std::unordered_set<Determinant, DeterminantHash>& expanded_refs() const {
    return expanded_;
  }
  bool is_expanded(const Determinant& d) const { return expanded_.count(d) != 0; }
  void mark_expanded(const Determinant& d) { expanded_.insert(d); }

  /// Same sector and expansion history, no determinants.
  Subspace empty_copy() const;

 private:
  Sector sector_;
  std::vector<Determinant> dets_;
  std::unordered_map<Determinant, std::size_t, DeterminantHash> index_;
  std::unordered_set<Determinant, DeterminantHash> expanded_;
};

/// Raw measurement outcomes. Keys are "alpha|beta" occupation strings
/// (2*n_orb bits, separator after the alpha half).
struct SampleBatch {
  int n_orb = 0;
  std::map<std::string, std::uint64_t> counts;
  std::uint64_t total_shots = 0;

  /// Adds `count` shots of `bitstring`, which may omit the '|' separator.
  /// Throws FormatError when the bit count is not 2*n_orb.
  void add(std::string_view bitstring, std::uint64_t count = 1);
};

/// "<bitstring> <count>" per line.
void write_batch(const SampleBatch& batch, std::ostream& out);
SampleBatch read_batch(std::istream& in, int n_orb);

enum class RecoveryMode { discard, recover };

/// Mean occupation per orbital and spin channel, each in [0, 1].
struct OccupancyHint {
  std::vector<double> alpha;
  std::vector<double> beta;
};

struct FilterResult {
  std::vector<Determinant> dets;     // distinct, first-seen order
  std::vector<std::uint64_t> counts; // shots per determinant
  std::uint64_t valid_shots = 0;     // shots valid as measured
  std::uint64_t recovered_shots = 0; // shots repaired by recovery
  std::uint64_t discarded_shots = 0;
};

FilterResult filter_symmetry(const SampleBatch& batch, const Sector& sector, RecoveryMode mode,
                             const OccupancyHint* hint = nullptr);

/// Repairs one spin channel toward `target` electrons using the occupancy
/// hint: flips the bits that disagree with the rounded hint, most confident
/// first, until the popcount matches.
std::uint64_t recover_channel(std::uint64_t mask, int n_orb, int target,
                              std::span<const double> occupancy);

/// Caps the subspace at k determinants, ranking by loose ground-state
/// amplitudes. The Hartree-Fock determinant survives whenever present.
Subspace cap_screen(const Subspace& sub, std::size_t k, const IntegralSet& ints,
                    const SolverOptions& opts = {});

/// Keeps determinants with |amplitude| >= threshold (plus Hartree-Fock).
Subspace amplitude_screen(const Subspace& sub, std::span<const double> amplitudes,
                          double threshold);

/// Expands around the largest-amplitude determinant not yet used as a
/// reference, adding the m singles/doubles with the largest |<ref|H|d>|.
Subspace classical_expand(const Subspace& sub, std::span<const double> amplitudes, std::size_t m,
                          const IntegralSet& ints);

/// Rebuilds the subspace as the product of its alpha and beta strings
/// (closed shell: the union of both string sets with itself).
Subspace tensor_reconstruct(const Subspace& sub, bool closed_shell);

/// Set union keeping first-seen order; expansion history carries over.
Subspace unite(const Subspace& sub, std::span<const Determinant> dets);

/// Amplitudes of `from` re-indexed onto `to`; determinants absent from
/// `from` get zero.
std::vector<double> realign(const Subspace& from, std::span<const double> amplitudes,
                            const Subspace& to);

/// One "alpha|beta" string per line.
void write_subspace(const Subspace& sub, std::ostream& out);
Subspace read_subspace(std::istream& in, const Sector& sector);

}  // namespace hivqe
