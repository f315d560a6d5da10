#include "hivqe/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hivqe/parallel.hpp"
#include "hivqe/subspace.hpp"

namespace hivqe {

double SparseHamiltonian::element(std::size_t i, std::size_t j) const {
  const auto begin = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
  const auto end = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
  const auto it = std::lower_bound(begin, end, static_cast<std::uint32_t>(j));
  if (it == end || *it != j) return 0.0;
  return values_[static_cast<std::size_t>(it - cols_.begin())];
}

bool SparseHamiltonian::is_stored(std::size_t i, std::size_t j) const {
  const auto begin = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
  const auto end = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
  return std::binary_search(begin, end, static_cast<std::uint32_t>(j));
}

void SparseHamiltonian::multiply(std::span<const double> x, std::span<double> y) const {
  if (x.size() != dim() || y.size() != dim()) {
    throw std::invalid_argument("multiply: vector length does not match matrix dimension");
  }
  parallel_for(dim(), [&](std::size_t i) {
    double acc = 0.0;
    for (std::uint64_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) acc += values_[k] * x[cols_[k]];
    y[i] = acc;
  }, 1024);
}

void SparseHamiltonian::finalize_diagonal() {
  const std::size_t n = row_ptr_.size() - 1;
  diag_.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    bool found = false;
    for (std::uint64_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      if (cols_[k] == i) {
        diag_[i] = values_[k];
        found = true;
      }
    }
    if (!found) throw std::invalid_argument("sparse Hamiltonian row lacks a diagonal entry");
  }
}

SparseHamiltonian SparseHamiltonian::from_csr(std::vector<std::uint64_t> row_ptr,
                                              std::vector<std::uint32_t> cols,
                                              std::vector<double> values) {
  if (row_ptr.empty() || row_ptr.back() != cols.size() || cols.size() != values.size()) {
    throw std::invalid_argument("from_csr: inconsistent CSR arrays");
  }
  SparseHamiltonian h;
  h.row_ptr_ = std::move(row_ptr);
  h.cols_ = std::move(cols);
  h.values_ = std::move(values);
  h.finalize_diagonal();
  return h;
}

SparseHamiltonian SparseHamiltonian::from_dense(const Eigen::MatrixXd& m) {
  std::vector<std::uint64_t> row_ptr{0};
  std::vector<std::uint32_t> cols;
  std::vector<double> values;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (i == j || m(i, j) != 0.0) {
        cols.push_back(static_cast<std::uint32_t>(j));
        values.push_back(m(i, j));
      }
    }
    row_ptr.push_back(cols.size());
  }
  return from_csr(std::move(row_ptr), std::move(cols), std::move(values));
}

Eigen::MatrixXd SparseHamiltonian::to_dense() const {
  const auto n = static_cast<Eigen::Index>(dim());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < dim(); ++i) {
    for (std::uint64_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      m(static_cast<Eigen::Index>(i), cols_[k]) = values_[k];
    }
  }
  return m;
}

SparseHamiltonian project(std::span<const Determinant> dets, const IntegralSet& ints) {
  const std::size_t n = dets.size();
  if (n > std::numeric_limits<std::uint32_t>::max()) {
    throw std::length_error("project: subspace too large for 32-bit column indices");
  }

  // Group determinants by alpha string; within a group betas are ascending.
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(),
            [&](std::uint32_t a, std::uint32_t b) { return dets[a] < dets[b]; });

  struct Group {
    std::uint64_t alpha;
    std::size_t begin, end;  // range in `order`
  };
  std::vector<Group> groups;
  std::vector<std::uint32_t> group_of(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& d = dets[order[k]];
    if (groups.empty() || groups.back().alpha != d.alpha) groups.push_back({d.alpha, k, k});
    groups.back().end = k + 1;
    group_of[order[k]] = static_cast<std::uint32_t>(groups.size() - 1);
  }

  // Alpha groups within a double excitation of each other.
  std::vector<std::vector<std::uint32_t>> linked(groups.size());
  parallel_for(groups.size(), [&](std::size_t g) {
    for (std::size_t h = 0; h < groups.size(); ++h) {
      if (std::popcount(groups[g].alpha ^ groups[h].alpha) <= 4) {
        linked[g].push_back(static_cast<std::uint32_t>(h));
      }
    }
  }, 64);

  std::vector<std::vector<std::pair<std::uint32_t, double>>> rows(n);
  parallel_for(n, [&](std::size_t i) {
    const Determinant& di = dets[i];
    auto& row = rows[i];
    for (const std::uint32_t g : linked[group_of[i]]) {
      const Group& grp = groups[g];
      const int alpha_degree = std::popcount(di.alpha ^ grp.alpha) / 2;
      const int beta_budget = 2 - alpha_degree;
      auto visit = [&](std::size_t k) {
        const std::uint32_t j = order[k];
        const Determinant& dj = dets[j];
        if (std::popcount(di.beta ^ dj.beta) / 2 > beta_budget) return;
        if (j == i) {
          row.emplace_back(j, diagonal_energy(di, ints) + ints.e_core());
          return;
        }
        const double v = slater_condon(di, dj, ints);
        if (v != 0.0) row.emplace_back(j, v);
      };
      if (beta_budget == 0) {
        const auto first = order.begin() + static_cast<std::ptrdiff_t>(grp.begin);
        const auto last = order.begin() + static_cast<std::ptrdiff_t>(grp.end);
        const auto it = std::lower_bound(first, last, di.beta, [&](std::uint32_t a, std::uint64_t b) {
          return dets[a].beta < b;
        });
        if (it != last && dets[*it].beta == di.beta) visit(static_cast<std::size_t>(it - order.begin()));
      } else {
        for (std::size_t k = grp.begin; k < grp.end; ++k) visit(k);
      }
    }
    std::sort(row.begin(), row.end());
  }, 64);

  SparseHamiltonian h;
  h.row_ptr_.assign(1, 0);
  h.row_ptr_.reserve(n + 1);
  std::size_t nnz = 0;
  for (const auto& r : rows) nnz += r.size();
  h.cols_.reserve(nnz);
  h.values_.reserve(nnz);
  for (auto& r : rows) {
    for (const auto& [j, v] : r) {
      h.cols_.push_back(j);
      h.values_.push_back(v);
    }
    h.row_ptr_.push_back(h.cols_.size());
    std::vector<std::pair<std::uint32_t, double>>().swap(r);
  }
  h.finalize_diagonal();
  return h;
}

SparseHamiltonian project(const Subspace& sub, const IntegralSet& ints) {
  return project(std::span<const Determinant>(sub.dets()), ints);
}

namespace {

template <typename T>
void put(std::ostream& out, T v) {
  unsigned char bytes[sizeof(T)];
  std::uint64_t bits = 0;
  if constexpr (std::is_same_v<T, double>) {
    bits = std::bit_cast<std::uint64_t>(v);
  } else {
    bits = static_cast<std::uint64_t>(v);
  }
  for (std::size_t b = 0; b < sizeof(T); ++b) bytes[b] = static_cast<unsigned char>(bits >> (8 * b));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
    throw FormatError("sparse matrix dump truncated");
  }
  std::uint64_t bits = 0;
  for (std::size_t b = 0; b < sizeof(T); ++b) bits |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
  if constexpr (std::is_same_v<T, double>) {
    return std::bit_cast<double>(bits);
  } else {
    return static_cast<T>(bits);
  }
}

}  // namespace

void write_binary(const SparseHamiltonian& h, std::ostream& out) {
  put<std::uint64_t>(out, h.dim());
  put<std::uint64_t>(out, h.nonzeros());
  for (auto r : h.row_offsets()) put<std::uint64_t>(out, r);
  for (auto c : h.columns()) put<std::uint32_t>(out, c);
  for (auto v : h.values()) put<double>(out, v);
}

SparseHamiltonian read_binary(std::istream& in) {
  const auto dim = get<std::uint64_t>(in);
  const auto nnz = get<std::uint64_t>(in);
  std::vector<std::uint64_t> row_ptr(dim + 1);
  std::vector<std::uint32_t> cols(nnz);
  std::vector<double> values(nnz);
  for (auto& r : row_ptr) r = get<std::uint64_t>(in);
  for (auto& c : cols) c = get<std::uint32_t>(in);
  for (auto& v : values) v = get<double>(in);
  return SparseHamiltonian::from_csr(std::move(row_ptr), std::move(cols), std::move(values));
}

double energy_of(std::span<const double> c, const SparseHamiltonian& h) {
  if (c.size() != h.dim()) throw std::invalid_argument("energy_of: dimension mismatch");
  std::vector<double> hc(c.size());
  h.multiply(c, hc);
  double e = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) e += c[i] * hc[i];
  return e;
}

namespace {

void fix_sign(std::vector<double>& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (std::abs(v[i]) > std::abs(v[best])) best = i;
  }
  if (!v.empty() && v[best] < 0) {
    for (auto& x : v) x = -x;
  }
}

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::vector<double> residual_of(const SparseHamiltonian& h, std::span<const double> x, double e) {
  std::vector<double> r(x.size());
  h.multiply(x, r);
  for (std::size_t i = 0; i < x.size(); ++i) r[i] -= e * x[i];
  return r;
}

CIVector dense_ground_state(const SparseHamiltonian& h) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.to_dense());
  if (es.info() != Eigen::Success) throw ConvergenceError("dense eigensolver failed", 0.0);
  CIVector out;
  const Eigen::VectorXd v = es.eigenvectors().col(0);
  out.amplitudes.assign(v.data(), v.data() + v.size());
  fix_sign(out.amplitudes);
  const double n = norm(out.amplitudes);
  for (auto& x : out.amplitudes) x /= n;
  out.energy = es.eigenvalues()(0);
  out.residual = norm(residual_of(h, out.amplitudes, out.energy));
  return out;
}

}  // namespace

CIVector davidson(const SparseHamiltonian& h, SolveMode mode, const SolverOptions& opts,
                  std::span<const double> guess) {
  const std::size_t n = h.dim();
  if (n == 0) throw std::invalid_argument("ground_state: empty Hamiltonian");
  const double tol = mode == SolveMode::tight ? opts.tight_residual : opts.loose_residual;
  const int max_iter = mode == SolveMode::tight ? opts.tight_max_iterations : opts.loose_max_iterations;
  const std::size_t max_basis = std::max<std::size_t>(2, std::min(opts.max_subspace, n));
  const auto& diag = h.diagonal();

  std::vector<double> x0(n, 0.0);
  if (!guess.empty()) std::copy_n(guess.begin(), std::min(guess.size(), n), x0.begin());
  if (norm(x0) < 1e-14) {
    const auto lowest = std::min_element(diag.begin(), diag.end()) - diag.begin();
    std::fill(x0.begin(), x0.end(), 0.0);
    x0[static_cast<std::size_t>(lowest)] = 1.0;
  }
  {
    const double s = norm(x0);
    for (auto& v : x0) v /= s;
  }

  std::vector<std::vector<double>> basis;  // V
  std::vector<std::vector<double>> images; // H V
  Eigen::MatrixXd projected;               // V^T H V

  auto add_vector = [&](std::vector<double> v) {
    std::vector<double> hv(n);
    h.multiply(v, hv);
    const auto m = static_cast<Eigen::Index>(basis.size());
    Eigen::MatrixXd grown = Eigen::MatrixXd::Zero(m + 1, m + 1);
    grown.topLeftCorner(m, m) = projected;
    for (Eigen::Index k = 0; k < m; ++k) {
      const double t = dot(basis[static_cast<std::size_t>(k)], hv);
      grown(k, m) = t;
      grown(m, k) = t;
    }
    grown(m, m) = dot(v, hv);
    projected = std::move(grown);
    basis.push_back(std::move(v));
    images.push_back(std::move(hv));
  };

  add_vector(std::move(x0));

  CIVector out;
  std::vector<double> x(n), r(n);
  for (int iter = 1;; ++iter) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(projected);
    const double theta = es.eigenvalues()(0);
    const Eigen::VectorXd s = es.eigenvectors().col(0);
    std::fill(x.begin(), x.end(), 0.0);
    std::fill(r.begin(), r.end(), 0.0);
    for (std::size_t k = 0; k < basis.size(); ++k) {
      const double sk = s(static_cast<Eigen::Index>(k));
      for (std::size_t i = 0; i < n; ++i) {
        x[i] += sk * basis[k][i];
        r[i] += sk * images[k][i];
      }
    }
    for (std::size_t i = 0; i < n; ++i) r[i] -= theta * x[i];
    const double rnorm = norm(r);

    out.energy = theta;
    out.residual = rnorm;
    out.iterations = iter;
    if (rnorm <= tol || iter >= max_iter) {
      if (rnorm > tol && mode == SolveMode::tight) {
        throw ConvergenceError("Davidson did not converge in " + std::to_string(max_iter) +
                                   " iterations (residual " + std::to_string(rnorm) + ")",
                               rnorm);
      }
      break;
    }

    // Jacobi-preconditioned correction.
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) {
      double denom = theta - diag[i];
      if (std::abs(denom) < 1e-10) denom = denom < 0 ? -1e-10 : 1e-10;
      t[i] = r[i] / denom;
    }

    if (basis.size() >= max_basis) {
      // Collapse onto the current Ritz vector.
      const double xn = norm(x);
      for (auto& v : x) v /= xn;
      basis.clear();
      images.clear();
      projected.resize(0, 0);
      add_vector(x);
    }

    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& b : basis) {
        const double c = dot(b, t);
        for (std::size_t i = 0; i < n; ++i) t[i] -= c * b[i];
      }
    }
    const double tn = norm(t);
    if (tn < 1e-12) {
      // The correction lies in the current span: fall back to the raw residual.
      t = r;
      for (int pass = 0; pass < 2; ++pass) {
        for (const auto& b : basis) {
          const double c = dot(b, t);
          for (std::size_t i = 0; i < n; ++i) t[i] -= c * b[i];
        }
      }
      const double rn = norm(t);
      if (rn < 1e-14) break;
      for (auto& v : t) v /= rn;
    } else {
      for (auto& v : t) v /= tn;
    }
    add_vector(std::move(t));
  }

  const double xn = norm(x);
  out.amplitudes.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.amplitudes[i] = x[i] / xn;
  fix_sign(out.amplitudes);
  return out;
}

CIVector ground_state(const SparseHamiltonian& h, SolveMode mode, const SolverOptions& opts,
                      std::span<const double> guess) {
  if (h.dim() == 0) throw std::invalid_argument("ground_state: empty Hamiltonian");
  if (h.dim() <= opts.dense_limit) return dense_ground_state(h);
  return davidson(h, mode, opts, guess);
}

}  // namespace hivqe
