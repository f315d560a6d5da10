#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "hivqe/determinant.hpp"
#include "hivqe/hamiltonian.hpp"
#include "hivqe/integrals.hpp"

namespace hivqe {

struct FciResult {
  double energy = 0.0;
  std::vector<Determinant> dets;  // full sector, (alpha, beta) ordered
  CIVector vector;
  std::uint64_t sector_size = 0;
};

/// Exact diagonalization over the whole sector. Throws std::length_error when
/// the sector exceeds `limit` determinants.
FciResult fci_ground(const IntegralSet& ints, std::uint64_t limit = 2'000'000,
                     const SolverOptions& opts = {});

/// Fock-space index of a determinant: alpha orbital p is spin orbital p,
/// beta orbital p is spin orbital n_orb + p.
inline std::uint64_t fock_index(const Determinant& d, int n_orb) {
  return d.alpha | (d.beta << n_orb);
}

/// Dense Hamiltonian over all 2^(2 n_orb) occupation states, built by
/// applying creation/annihilation operators with explicit sign tracking.
/// Limited to 8 spin orbitals.
Eigen::MatrixXd brute_force_hamiltonian(const IntegralSet& ints);

}  // namespace hivqe
