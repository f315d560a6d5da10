#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hivqe/hamiltonian.hpp"
#include "hivqe/integrals.hpp"
#include "hivqe/optimizer.hpp"
#include "hivqe/subspace.hpp"

namespace hivqe {

class RunError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::uint64_t shots = 1000;
  std::size_t k_cap = 0;  // 0 disables the pre-diagonalization cap
  std::size_t m_expand = 100;
  std::size_t expansions_per_iteration = 1;
  double amplitude_threshold = 1e-6;
  double convergence_eps = 1e-5;
  std::size_t convergence_window = 3;
  bool converge_on_cumulative = true;
  std::size_t max_iterations = 50;
  std::size_t stall_window = 10;
  bool tensor_reconstruct = false;
  bool closed_shell = false;
  double p_flip = 0.0;
  RecoveryMode recovery = RecoveryMode::discard;
  std::uint64_t seed = 7;
  int ansatz_layers = 2;
  SpsaSchedule spsa;
  SolverOptions solver;
  std::uint64_t sector_limit = 50'000'000;  // largest sector the simulator will hold

  void validate(const IntegralSet& ints) const;
};

/// Flat JSON object with every RunConfig key.
nlohmann::json config_to_json(const RunConfig& cfg);
/// Applies the keys present in `j`; unknown keys and ill-typed values throw.
void apply_config(RunConfig& cfg, const nlohmann::json& j);
/// Applies one "key=value" override; the value is read as JSON when it
/// parses, otherwise as a string.
void apply_override(RunConfig& cfg, std::string_view assignment);

struct IterationRecord {
  std::size_t iteration = 0;
  double e_cumulative = 0.0;
  double e_iteration = 0.0;
  std::size_t n_sampled = 0;        // distinct raw bitstrings
  std::size_t n_valid = 0;          // distinct determinants after filtering
  std::uint64_t valid_shots = 0;
  std::uint64_t invalid_shots = 0;  // shots outside the sector before recovery
  std::size_t n_after_union = 0;
  std::size_t n_after_cap = 0;
  std::size_t n_cumulative = 0;     // dimension of the cumulative diagonalization
  std::size_t n_after_screen = 0;
  std::size_t n_after_expand = 0;
  double theta_norm = 0.0;
  double e_plus = 0.0;
  double e_minus = 0.0;
  double wall_ms_sample = 0.0;
  double wall_ms_diag = 0.0;
};

enum class RunStatus { converged, stalled, max_iterations };
std::string to_string(RunStatus s);

struct RunResult {
  double energy = 0.0;
  double e_hf = 0.0;
  double e_corr = 0.0;
  Subspace subspace{Sector{}};
  std::vector<double> amplitudes;
  std::vector<IterationRecord> trace;
  std::optional<std::array<double, 3>> dipole;  // Debye
  RunStatus status = RunStatus::max_iterations;
  std::size_t iterations = 0;
  RunConfig config;
};

/// Optional callbacks and inputs around a run.
struct RunHooks {
  std::function<void(const IterationRecord&)> on_iteration;
  /// Receives each iteration's main sample batch with the seed that drew it.
  std::function<void(std::size_t iteration, std::uint64_t seed, const SampleBatch&)> on_samples;
  /// Determinants merged into the starting subspace (checkpoint restart).
  const Subspace* initial = nullptr;
};

RunResult run_hivqe(const RunConfig& cfg, const IntegralSet& ints,
                    const DipoleIntegrals* dipole = nullptr, const RunHooks& hooks = {});

/// result.json document (no wall-clock fields, so identical runs serialize
/// identically).
nlohmann::json result_to_json(const RunResult& r);

/// iter,E_cum,E_iter,n_dets_sampled,n_dets_valid,n_dets_cum,n_dets_post_screen,
/// wall_ms_sample,wall_ms_diag,theta_norm,e_plus,e_minus
std::string trace_to_csv(std::span<const IterationRecord> trace);

/// Spin-summed one-particle density matrix of a CI vector.
Eigen::MatrixXd compute_1rdm(std::span<const double> amplitudes, const Subspace& sub);

/// Per-spin mean occupations, used as the configuration-recovery target.
OccupancyHint occupancies(std::span<const double> amplitudes, const Subspace& sub);

inline constexpr double kAuToDebye = 2.541746;

/// Nuclear minus electronic dipole, in Debye.
std::array<double, 3> dipole_moment(const Eigen::MatrixXd& rdm1, const DipoleIntegrals& d);

struct PesEntry {
  std::string label;
  std::string fcidump;
  std::optional<double> e_ref;
};

struct PesPoint {
  std::string label;
  double e_hf = 0.0;
  double e_hivqe = 0.0;
  std::optional<double> e_ref;
  std::optional<double> abs_error;
  std::size_t n_dets = 0;
  RunStatus status = RunStatus::max_iterations;
};

/// One HI-VQE run per geometry. All files must share one sector.
std::vector<PesPoint> run_pes_sweep(std::span<const PesEntry> entries, const RunConfig& cfg);

/// Reads "label path [E_ref]" lines; '#' starts a comment. Relative paths are
/// resolved against the manifest's directory.
std::vector<PesEntry> read_pes_manifest(const std::string& path);

std::string pes_to_csv(std::span<const PesPoint> points);

}  // namespace hivqe
