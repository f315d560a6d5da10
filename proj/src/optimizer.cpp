#include "hivqe/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hivqe {

double SpsaSchedule::step_size(std::size_t k) const {
  return a / std::pow(static_cast<double>(k) + 1.0 + A, alpha);
}

double SpsaSchedule::perturbation(std::size_t k) const {
  return c / std::pow(static_cast<double>(k) + 1.0, gamma);
}

SpsaOptimizer::SpsaOptimizer(std::vector<double> theta, SpsaSchedule schedule, std::uint64_t seed)
    : theta_(std::move(theta)), schedule_(schedule), seed_(seed), best_theta_(theta_) {}

namespace {

// splitmix64 finalizer; decorrelates (seed, step) before seeding the engine.
std::uint64_t mix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

ProbePair SpsaOptimizer::propose() {
  std::mt19937_64 rng(mix(seed_ ^ mix(step_)));
  delta_.resize(theta_.size());
  for (auto& d : delta_) d = (rng() >> 63) ? 1.0 : -1.0;
  const double ck = schedule_.perturbation(step_);
  probes_.plus = theta_;
  probes_.minus = theta_;
  for (std::size_t i = 0; i < theta_.size(); ++i) {
    probes_.plus[i] += ck * delta_[i];
    probes_.minus[i] -= ck * delta_[i];
  }
  pending_ = true;
  return probes_;
}

void SpsaOptimizer::update(double e_plus, double e_minus) {
  if (!pending_) throw std::logic_error("SpsaOptimizer::update called without a pending probe pair");
  if (!best_energy_ || e_plus < *best_energy_) {
    best_energy_ = e_plus;
    best_theta_ = probes_.plus;
  }
  if (e_minus < *best_energy_) {
    best_energy_ = e_minus;
    best_theta_ = probes_.minus;
  }
  const double ck = schedule_.perturbation(step_);
  const double ak = schedule_.step_size(step_);
  if (ck != 0.0 && ak != 0.0 && e_plus != e_minus) {
    const double g = (e_plus - e_minus) / (2.0 * ck);
    // delta entries are +/-1, so 1/delta == delta.
    for (std::size_t i = 0; i < theta_.size(); ++i) theta_[i] -= ak * g * delta_[i];
  }
  ++step_;
  pending_ = false;
}

bool converged(std::span<const double> history, double eps, std::size_t window) {
  if (history.size() < window + 1) return false;
  const auto tail = history.subspan(history.size() - (window + 1));
  const auto [lo, hi] = std::minmax_element(tail.begin(), tail.end());
  return *hi - *lo < eps;
}

}  // namespace hivqe
