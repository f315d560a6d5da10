#pragma once

#include <array>
#include <cstddef>
#include <istream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace hivqe {

/// Raised for malformed FCIDUMP or dipole input. The message carries the
/// offending line number when one is known.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One- and two-electron integrals over spatial orbitals, chemist notation.
///
/// Two-electron integrals are stored once per 8-fold symmetry class in a
/// packed triangular table, so (pq|rs), (qp|rs), (pq|sr), (rs|pq) and the
/// remaining permutations all read the same slot. Orbital indices are 0-based.
class IntegralSet {
 public:
  IntegralSet() = default;
  IntegralSet(std::size_t n_orb, int n_alpha, int n_beta);

  std::size_t n_orb() const { return n_orb_; }
  int n_alpha() const { return n_alpha_; }
  int n_beta() const { return n_beta_; }
  int n_electrons() const { return n_alpha_ + n_beta_; }

  double e_core() const { return e_core_; }
  void set_e_core(double value) { e_core_ = value; }

  double h1(std::size_t p, std::size_t q) const { return one_body_[p * n_orb_ + q]; }
  void set_h1(std::size_t p, std::size_t q, double value);

  // Unchecked lookup for inner loops.
  double eri(std::size_t p, std::size_t q, std::size_t r, std::size_t s) const {
    return two_body_[pair_index(pair_index(p, q), pair_index(r, s))];
  }
  /// Bounds-checked lookup; throws std::out_of_range.
  double get_eri(std::size_t p, std::size_t q, std::size_t r, std::size_t s) const;
  void set_eri(std::size_t p, std::size_t q, std::size_t r, std::size_t s, double value);

  // Coulomb (pp|qq) and exchange (pq|qp) tables, kept in sync by set_eri.
  double coulomb(std::size_t p, std::size_t q) const { return coulomb_[p * n_orb_ + q]; }
  double exchange(std::size_t p, std::size_t q) const { return exchange_[p * n_orb_ + q]; }

  /// Visits every nonzero canonical two-electron entry as (p, q, r, s, value)
  /// with p >= q, r >= s and pq >= rs.
  template <typename Fn>
  void for_each_eri(Fn&& fn) const;

  /// Serializes to FCIDUMP text (1-based indices, canonical entries only).
  std::string to_fcidump() const;

 private:
  static std::size_t pair_index(std::size_t a, std::size_t b) {
    return a >= b ? a * (a + 1) / 2 + b : b * (b + 1) / 2 + a;
  }
  void check_index(std::size_t p) const;

  std::size_t n_orb_ = 0;
  int n_alpha_ = 0;
  int n_beta_ = 0;
  double e_core_ = 0.0;
  std::vector<double> one_body_;
  std::vector<double> two_body_;
  std::vector<double> coulomb_;
  std::vector<double> exchange_;
};

template <typename Fn>
void IntegralSet::for_each_eri(Fn&& fn) const {
  for (std::size_t p = 0; p < n_orb_; ++p) {
    for (std::size_t q = 0; q <= p; ++q) {
      const std::size_t pq = pair_index(p, q);
      for (std::size_t r = 0; r < n_orb_; ++r) {
        for (std::size_t s = 0; s <= r; ++s) {
          const std::size_t rs = pair_index(r, s);
          if (rs > pq) continue;
          const double v = two_body_[pair_index(pq, rs)];
          if (v != 0.0) fn(p, q, r, s, v);
        }
      }
    }
  }
}

IntegralSet parse_fcidump(std::string_view text);
IntegralSet read_fcidump(const std::string& path);

/// Reads only the namelist header; returns (NORB, NELEC, MS2).
std::array<int, 3> read_fcidump_header(const std::string& path);

/// Dipole integrals in the MO basis (atomic units), one symmetric table per
/// Cartesian axis, plus the nuclear contribution.
struct DipoleIntegrals {
  std::array<Eigen::MatrixXd, 3> components;
  Eigen::Vector3d nuclear = Eigen::Vector3d::Zero();
};

/// Parses the dipole sidecar: "axis p q value" records with 1-based orbital
/// indices and one "nuc dx dy dz" record. '#' starts a comment line.
DipoleIntegrals parse_dipole_file(std::string_view text, std::size_t n_orb);
DipoleIntegrals read_dipole_file(const std::string& path, std::size_t n_orb);

std::string read_text_file(const std::string& path);

}  // namespace hivqe
