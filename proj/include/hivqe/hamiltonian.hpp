#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "hivqe/determinant.hpp"
#include "hivqe/integrals.hpp"

namespace hivqe {

class Subspace;

/// Hamiltonian projected onto a determinant list, stored as full symmetric
/// CSR (both triangles, columns ascending per row). The diagonal includes the
/// core energy and is always present.
class SparseHamiltonian {
 public:
  SparseHamiltonian() = default;

  std::size_t dim() const { return diag_.size(); }
  std::size_t nonzeros() const { return values_.size(); }
  const std::vector<std::uint64_t>& row_offsets() const { return row_ptr_; }
  const std::vector<std::uint32_t>& columns() const { return cols_; }
  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& diagonal() const { return diag_; }

  /// Stored value at (i, j), or 0 if the entry is structurally absent.
  double element(std::size_t i, std::size_t j) const;
  bool is_stored(std::size_t i, std::size_t j) const;

  /// y = H x. Each row is reduced serially in column order.
  void multiply(std::span<const double> x, std::span<double> y) const;

  /// Builds directly from CSR arrays; rows must have ascending columns and a
  /// diagonal entry. Intended for tests and synthetic matrices.
  static SparseHamiltonian from_csr(std::vector<std::uint64_t> row_ptr,
                                    std::vector<std::uint32_t> cols, std::vector<double> values);
  /// Builds from a dense symmetric matrix, dropping exact zeros off the diagonal.
  static SparseHamiltonian from_dense(const Eigen::MatrixXd& m);

  Eigen::MatrixXd to_dense() const;

 private:
  friend SparseHamiltonian project(std::span<const Determinant>, const IntegralSet&);
  void finalize_diagonal();

  std::vector<std::uint64_t> row_ptr_{0};
  std::vector<std::uint32_t> cols_;
  std::vector<double> values_;
  std::vector<double> diag_;
};

/// Projects H onto the determinants: entry (i,j) = <d_i|H|d_j> (+ e_core on
/// the diagonal). Pairs beyond double excitations are never stored.
SparseHamiltonian project(std::span<const Determinant> dets, const IntegralSet& ints);
SparseHamiltonian project(const Subspace& sub, const IntegralSet& ints);

/// Little-endian dump: u64 dim, u64 nnz, u64 row offsets[dim+1],
/// u32 columns[nnz], f64 values[nnz].
void write_binary(const SparseHamiltonian& h, std::ostream& out);
SparseHamiltonian read_binary(std::istream& in);

/// Normalized ground-state amplitudes aligned to a determinant ordering.
struct CIVector {
  std::vector<double> amplitudes;
  double energy = 0.0;
  double residual = 0.0;
  int iterations = 0;
};

enum class SolveMode { loose, tight };

struct SolverOptions {
  double loose_residual = 1e-3;
  int loose_max_iterations = 20;
  double tight_residual = 1e-8;
  int tight_max_iterations = 1000;
  std::size_t dense_limit = 512;
  std::size_t max_subspace = 25;
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// Lowest eigenpair. Dimensions up to `dense_limit` are solved directly;
/// larger ones go through Davidson. `guess` shorter than dim is zero padded.
/// The returned vector is normalized with its largest-magnitude entry positive.
CIVector ground_state(const SparseHamiltonian& h, SolveMode mode, const SolverOptions& opts = {},
                      std::span<const double> guess = {});

/// Davidson iteration with a diagonal preconditioner, regardless of size.
CIVector davidson(const SparseHamiltonian& h, SolveMode mode, const SolverOptions& opts = {},
                  std::span<const double> guess = {});

/// Rayleigh numerator c^T H c.
double energy_of(std::span<const double> c, const SparseHamiltonian& h);
inline double energy_of(const CIVector& c, const SparseHamiltonian& h) {
  return energy_of(c.amplitudes, h);
}

}  // namespace hivqe
