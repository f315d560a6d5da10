#include "hivqe/hamiltonian.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "hivqe/oracle.hpp"
#include "hivqe/sampler.hpp"
#include "hivqe/subspace.hpp"
#include "test_support.hpp"

using namespace hivqe;

namespace {

Eigen::MatrixXd random_symmetric(int n, std::uint64_t seed, double diag_spread) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) m(i, j) = m(j, i) = 0.05 * u(rng);
    m(i, i) = diag_spread * i / n + u(rng);
  }
  return m;
}

double dense_ground(const Eigen::MatrixXd& m) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m, Eigen::EigenvaluesOnly).eigenvalues()(0);
}

}  // namespace

TEST(Project, HartreeFockSingleton) {
  const auto ints = read_fcidump(support::fixture("h2_0.74.fcidump"));
  const auto hf = hartree_fock_det(ints);
  const auto h = project(std::span(&hf, 1), ints);
  ASSERT_EQ(h.dim(), 1u);
  EXPECT_NEAR(h.element(0, 0), support::hf_reference("h2_0.74"), 1e-9);
}

TEST(Project, FullSectorMatchesOperatorOracle) {
  for (const char* name : {"h2_0.74.fcidump", "h4_chain.fcidump"}) {
    const auto ints = read_fcidump(support::fixture(name));
    const Sector s = Sector::of(ints);
    const auto dets = enumerate_sector(s.n_orb, s.n_alpha, s.n_beta);
    const auto h = project(dets, ints);
    const Eigen::MatrixXd full = brute_force_hamiltonian(ints);
    for (std::size_t i = 0; i < dets.size(); ++i) {
      for (std::size_t j = 0; j < dets.size(); ++j) {
        const double ref = full(fock_index(dets[i], s.n_orb), fock_index(dets[j], s.n_orb));
        EXPECT_NEAR(h.element(i, j), ref, 1e-12);
        if (excitation_degree(dets[i], dets[j]) > 2) EXPECT_FALSE(h.is_stored(i, j));
      }
    }
  }
}

TEST(Project, SymmetricStorageAndMatvec) {
  const auto ints = support::random_integrals(6, 3, 3, 4);
  const auto dets = enumerate_sector(6, 3, 3);
  const auto h = project(dets, ints);
  const Eigen::MatrixXd dense = h.to_dense();
  EXPECT_LT((dense - dense.transpose()).cwiseAbs().maxCoeff(), 1e-15);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  Eigen::VectorXd x(h.dim());
  for (auto& v : x) v = g(rng);
  std::vector<double> y(h.dim());
  h.multiply(std::span<const double>(x.data(), x.size()), y);
  const Eigen::VectorXd ref = dense * x;
  for (std::size_t i = 0; i < h.dim(); ++i) EXPECT_NEAR(y[i], ref(i), 1e-12);
}

TEST(BinaryDump, RoundTrip) {
  const auto ints = support::random_integrals(4, 2, 2, 3);
  const auto h = project(enumerate_sector(4, 2, 2), ints);
  std::stringstream io(std::ios::in | std::ios::out | std::ios::binary);
  write_binary(h, io);
  const auto back = read_binary(io);
  EXPECT_EQ(back.row_offsets(), h.row_offsets());
  EXPECT_EQ(back.columns(), h.columns());
  EXPECT_EQ(back.values(), h.values());
  EXPECT_EQ(back.diagonal(), h.diagonal());
}

TEST(GroundState, TrivialMatrices) {
  Eigen::MatrixXd one(1, 1);
  one << -2.5;
  auto c = ground_state(SparseHamiltonian::from_dense(one), SolveMode::tight);
  EXPECT_DOUBLE_EQ(c.energy, -2.5);
  EXPECT_DOUBLE_EQ(c.amplitudes[0], 1.0);

  const Eigen::MatrixXd d = Eigen::Vector3d(3, 1, 2).asDiagonal();
  for (auto* solve : {&ground_state, &davidson}) {
    c = solve(SparseHamiltonian::from_dense(d), SolveMode::tight, {}, {});
    EXPECT_NEAR(c.energy, 1.0, 1e-12);
    EXPECT_NEAR(c.amplitudes[1], 1.0, 1e-10);
  }
}

TEST(Davidson, RandomSymmetricMatchesDense) {
  const Eigen::MatrixXd m = random_symmetric(300, 42, 5.0);
  const auto c = davidson(SparseHamiltonian::from_dense(m), SolveMode::tight);
  EXPECT_NEAR(c.energy, dense_ground(m), 1e-8);
  double norm = 0.0;
  for (double a : c.amplitudes) norm += a * a;
  EXPECT_NEAR(norm, 1.0, 1e-10);
  EXPECT_LE(c.residual, 1e-8);
}

TEST(Davidson, TightModeMatchesOracleOnFixtures) {
  for (const char* name : {"h4_chain", "lih_1.60", "h6_chain"}) {
    const auto ints = read_fcidump(support::fixture(std::string(name) + ".fcidump"));
    const Sector s = Sector::of(ints);
    const auto h = project(enumerate_sector(s.n_orb, s.n_alpha, s.n_beta), ints);
    const double dense = dense_ground(h.to_dense());
    EXPECT_NEAR(davidson(h, SolveMode::tight).energy, dense, 1e-9) << name;
    EXPECT_NEAR(dense, support::fci_reference(name), 1e-8) << name;
  }
}

TEST(Davidson, ThrowsWhenTightBudgetIsExhausted) {
  const Eigen::MatrixXd m = random_symmetric(200, 7, 0.1);
  SolverOptions opts;
  opts.tight_max_iterations = 2;
  EXPECT_THROW(davidson(SparseHamiltonian::from_dense(m), SolveMode::tight, opts), ConvergenceError);
  EXPECT_NO_THROW(davidson(SparseHamiltonian::from_dense(m), SolveMode::loose, opts));
}

TEST(Davidson, IndependentOfDeterminantOrder) {
  const auto ints = read_fcidump(support::fixture("lih_1.60.fcidump"));
  auto dets = enumerate_sector(6, 2, 2);
  const double e0 = davidson(project(dets, ints), SolveMode::tight).energy;
  std::mt19937_64 rng(9);
  for (int t = 0; t < 3; ++t) {
    std::shuffle(dets.begin(), dets.end(), rng);
    EXPECT_NEAR(davidson(project(dets, ints), SolveMode::tight).energy, e0, 1e-9);
  }
}

TEST(GroundState, InterlacingUnderRandomAugmentation) {
  const auto ints = read_fcidump(support::fixture("h6_chain.fcidump"));
  const auto all = enumerate_sector(6, 3, 3);
  std::mt19937_64 rng(5);
  for (int t = 0; t < 40; ++t) {
    std::vector<Determinant> pool = all;
    std::shuffle(pool.begin(), pool.end(), rng);
    const std::size_t n = 2 + rng() % 60;
    const std::size_t grow = 1 + rng() % 40;
    const double small = ground_state(project(std::span(pool).first(n), ints), SolveMode::tight).energy;
    const double big = ground_state(project(std::span(pool).first(n + grow), ints), SolveMode::tight).energy;
    EXPECT_LE(big, small + 1e-10);
  }
}

TEST(EnergyOf, QuadraticForm) {
  Eigen::MatrixXd m = random_symmetric(20, 3, 1.0);
  const auto h = SparseHamiltonian::from_dense(m);
  std::vector<double> e(20, 0.0);
  e[4] = 1.0;
  EXPECT_DOUBLE_EQ(energy_of(e, h), m(4, 4));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  Eigen::VectorXd v = es.eigenvectors().col(2);
  EXPECT_NEAR(energy_of(std::span<const double>(v.data(), 20), h), es.eigenvalues()(2), 1e-12);
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g;
  Eigen::VectorXd x(20);
  for (auto& a : x) a = g(rng);
  double sum = 0.0;
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 20; ++j) sum += x(i) * m(i, j) * x(j);
  EXPECT_NEAR(energy_of(std::span<const double>(x.data(), 20), h), sum, 1e-12);
}
