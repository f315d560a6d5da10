#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <random>
#include <string>
#include <utility>

#include <Eigen/Dense>
#include <json.hpp>

#include "hivqe/integrals.hpp"

namespace hivqe::support {

inline std::string fixture(const std::string& name) { return std::string(HIVQE_FIXTURE_DIR) + "/" + name; }

inline const nlohmann::json& reference() {
  static const nlohmann::json ref = [] {
    std::ifstream in(fixture("reference.json"));
    return nlohmann::json::parse(in);
  }();
  return ref;
}

inline double fci_reference(const std::string& system) {
  return reference().at(system).at("e_fci").get<double>();
}

inline double hf_reference(const std::string& system) {
  return reference().at(system).at("e_hf").get<double>();
}

/// Random real integrals with the full 8-fold symmetry.
inline IntegralSet random_integrals(int n_orb, int n_alpha, int n_beta, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  IntegralSet ints(n_orb, n_alpha, n_beta);
  ints.set_e_core(u(rng));
  for (int p = 0; p < n_orb; ++p)
    for (int q = 0; q <= p; ++q) ints.set_h1(p, q, u(rng));
  for (int p = 0; p < n_orb; ++p)
    for (int q = 0; q <= p; ++q)
      for (int r = 0; r < n_orb; ++r)
        for (int s = 0; s <= r; ++s) ints.set_eri(p, q, r, s, 0.5 * u(rng));
  return ints;
}

// Fock-space helpers. Spin orbital 2n layout: alpha p -> p, beta p -> n + p.
// The sign of a_j / a+_j is (-1)^(occupied spin orbitals below j).
inline std::optional<std::pair<std::uint64_t, int>> fock_annihilate(std::uint64_t x, int j) {
  if (!((x >> j) & 1ULL)) return std::nullopt;
  int below = 0;
  for (int k = 0; k < j; ++k) below += (x >> k) & 1ULL;
  return std::make_pair(x & ~(1ULL << j), below % 2 ? -1 : 1);
}

inline std::optional<std::pair<std::uint64_t, int>> fock_create(std::uint64_t x, int j) {
  if ((x >> j) & 1ULL) return std::nullopt;
  int below = 0;
  for (int k = 0; k < j; ++k) below += (x >> k) & 1ULL;
  return std::make_pair(x | (1ULL << j), below % 2 ? -1 : 1);
}

/// Dense matrix of a+_p a_q over the 2^(n_spin) Fock space.
inline Eigen::MatrixXd fock_hop(int n_spin, int p, int q) {
  const int dim = 1 << n_spin;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
  for (int x = 0; x < dim; ++x) {
    auto a = fock_annihilate(static_cast<std::uint64_t>(x), q);
    if (!a) continue;
    auto c = fock_create(a->first, p);
    if (!c) continue;
    m(static_cast<Eigen::Index>(c->first), x) += a->second * c->second;
  }
  return m;
}

}  // namespace hivqe::support
