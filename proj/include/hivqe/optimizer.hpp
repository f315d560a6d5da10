#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace hivqe {

/// Gain schedule for simultaneous-perturbation updates:
/// a_k = a / (k + 1 + A)^alpha, c_k = c / (k + 1)^gamma.
struct SpsaSchedule {
  double a = 0.1;
  double c = 0.1;
  double A = 10.0;
  double alpha = 0.602;
  double gamma = 0.101;

  double step_size(std::size_t k) const;
  double perturbation(std::size_t k) const;
};

struct ProbePair {
  std::vector<double> plus;
  std::vector<double> minus;
};

/// Two-evaluation gradient-free optimizer. Each step issues a probe pair
/// theta +/- c_k * delta with delta in {-1, +1}^n drawn from a stream seeded
/// by (seed, step), then consumes the two energies.
class SpsaOptimizer {
 public:
  SpsaOptimizer(std::vector<double> theta, SpsaSchedule schedule, std::uint64_t seed);

  const std::vector<double>& theta() const { return theta_; }
  std::size_t step() const { return step_; }
  const SpsaSchedule& schedule() const { return schedule_; }

  /// Lowest probe energy seen so far and the probe that produced it.
  std::optional<double> best_energy() const { return best_energy_; }
  const std::vector<double>& best_theta() const { return best_theta_; }

  bool has_pending() const { return pending_; }

  ProbePair propose();
  void update(double e_plus, double e_minus);

  /// Perturbation direction of the pending probe pair.
  const std::vector<double>& delta() const { return delta_; }

 private:
  std::vector<double> theta_;
  SpsaSchedule schedule_;
  std::uint64_t seed_;
  std::size_t step_ = 0;
  bool pending_ = false;
  std::vector<double> delta_;
  ProbePair probes_;
  std::optional<double> best_energy_;
  std::vector<double> best_theta_;
};

/// True once the last window+1 energies span less than eps, i.e. each of
/// the last `window` steps moved the energy by less than eps.
bool converged(std::span<const double> history, double eps = 1e-5, std::size_t window = 3);

/// Append-only per-iteration energy record.
class EnergyHistory {
 public:
  void append(double e) { values_.push_back(e); }
  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  bool converged(double eps = 1e-5, std::size_t window = 3) const {
    return hivqe::converged(values_, eps, window);
  }

 private:
  std::vector<double> values_;
};

}  // namespace hivqe
