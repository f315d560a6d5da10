#include "hivqe/determinant.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "hivqe/oracle.hpp"
#include "hivqe/sampler.hpp"
#include "test_support.hpp"

using namespace hivqe;

TEST(HartreeFock, AufbauFilling) {
  EXPECT_EQ(hartree_fock_det(2, 2), (Determinant{0b0011, 0b0011}));
  EXPECT_EQ(hartree_fock_det(1, 0), (Determinant{0b01, 0}));
  const auto d = hartree_fock_det(5, 5);
  EXPECT_EQ(std::popcount(d.alpha), 5);
  EXPECT_EQ(std::popcount(d.beta), 5);
  EXPECT_EQ(to_string(hartree_fock_det(2, 2), 4), "1100|1100");
}

TEST(DeterminantText, RoundTrip) {
  const Determinant d{0b1010, 0b0101};
  const auto s = to_string(d, 4);
  EXPECT_EQ(s, "0101|1010");
  EXPECT_EQ(parse_determinant(s, 4), d);
  EXPECT_EQ(parse_determinant("01011010", 4), d);
  EXPECT_THROW(parse_determinant("0101|101", 4), std::exception);
}

TEST(Excitation, Identity) {
  const Determinant d{0b0011, 0b0101};
  const auto e = excitation_info(d, d);
  EXPECT_EQ(e.degree, 0);
  EXPECT_EQ(e.phase, 1);
}

TEST(Excitation, SingleWithoutCrossing) {
  const auto e = excitation_info({0b0011, 0b0011}, {0b0101, 0b0011});
  EXPECT_EQ(e.degree, 1);
  EXPECT_EQ(e.alpha_holes, std::vector<int>{1});
  EXPECT_EQ(e.alpha_particles, std::vector<int>{2});
  EXPECT_EQ(e.phase, 1);
}

// <d2| a+_p a_q |d1> from explicit operators on the Fock index.
TEST(Excitation, SingleWithCrossingMatchesOperatorSign) {
  const int n = 4;
  const Determinant d1{0b0011, 0b0000};  // orbitals 0,1
  const Determinant d2{0b0110, 0b0000};  // 0 -> 2 across occupied 1
  const auto e = excitation_info(d1, d2);
  ASSERT_EQ(e.degree, 1);
  auto a = support::fock_annihilate(fock_index(d1, n), 0);
  auto c = support::fock_create(a->first, 2);
  EXPECT_EQ(c->first, fock_index(d2, n));
  EXPECT_EQ(e.phase, a->second * c->second);
  EXPECT_EQ(e.phase, -1);
}

TEST(SlaterCondon, TripleExcitationVanishes) {
  const auto ints = support::random_integrals(4, 2, 2, 1);
  EXPECT_EQ(slater_condon({0b0011, 0b0011}, {0b1100, 0b0101}, ints), 0.0);
}

TEST(SlaterCondon, OneElectronLimit) {
  IntegralSet ints(2, 1, 0);
  ints.set_h1(0, 0, -0.7);
  ints.set_h1(1, 1, 0.2);
  ints.set_eri(0, 0, 0, 0, 0.9);
  EXPECT_DOUBLE_EQ(slater_condon({0b01, 0}, {0b01, 0}, ints), -0.7);
}

namespace {

// Sector-restricted slice of the operator matrix, in enumerate_sector order.
void expect_matches_operator_matrix(const IntegralSet& ints) {
  const Sector s = Sector::of(ints);
  const auto dets = enumerate_sector(s.n_orb, s.n_alpha, s.n_beta);
  const Eigen::MatrixXd full = brute_force_hamiltonian(ints);
  for (std::size_t i = 0; i < dets.size(); ++i) {
    for (std::size_t j = 0; j < dets.size(); ++j) {
      double sc = slater_condon(dets[i], dets[j], ints);
      if (i == j) sc += ints.e_core();
      const double ref = full(fock_index(dets[i], s.n_orb), fock_index(dets[j], s.n_orb));
      EXPECT_NEAR(sc, ref, 1e-12) << to_string(dets[i], s.n_orb) << " " << to_string(dets[j], s.n_orb);
    }
  }
}

}  // namespace

TEST(SlaterCondon, MatchesOperatorOracleOnFixtures) {
  for (const char* name : {"h2_0.74.fcidump", "h2_2.50.fcidump", "h4_chain.fcidump"}) {
    SCOPED_TRACE(name);
    expect_matches_operator_matrix(read_fcidump(support::fixture(name)));
  }
}

TEST(SlaterCondon, MatchesOperatorOracleOnRandomIntegrals) {
  const int sectors[][3] = {{4, 2, 2}, {4, 3, 1}, {4, 1, 2}, {3, 2, 1}, {4, 2, 0}, {2, 1, 1}};
  std::uint64_t seed = 100;
  for (const auto& s : sectors) {
    SCOPED_TRACE(seed);
    expect_matches_operator_matrix(support::random_integrals(s[0], s[1], s[2], seed++));
  }
}

TEST(SlaterCondon, HermitianAndPhaseInvolution) {
  const auto ints = support::random_integrals(6, 3, 2, 9);
  const auto dets = enumerate_sector(6, 3, 2);
  std::mt19937 rng(4);
  std::uniform_int_distribution<std::size_t> pick(0, dets.size() - 1);
  for (int t = 0; t < 2000; ++t) {
    const auto& a = dets[pick(rng)];
    const auto& b = dets[pick(rng)];
    EXPECT_EQ(slater_condon(a, b, ints), slater_condon(b, a, ints));
    if (excitation_degree(a, b) <= 2) {
      EXPECT_EQ(excitation_info(a, b).phase * excitation_info(b, a).phase, 1);
    }
  }
}

TEST(SinglesDoubles, MinimalSectorGivesThreeExcitations) {
  const auto out = generate_singles_doubles(hartree_fock_det(1, 1), 2);
  EXPECT_EQ(out.size(), 3u);
}

// Exhaustive enumeration of degree-1/2 neighbours as the oracle.
TEST(SinglesDoubles, MatchesExhaustiveEnumeration) {
  const int sectors[][3] = {{4, 2, 2}, {6, 3, 2}, {5, 1, 4}};
  for (const auto& s : sectors) {
    const Determinant ref = hartree_fock_det(s[1], s[2]);
    const auto out = generate_singles_doubles(ref, s[0]);
    const std::set<Determinant> got(out.begin(), out.end());
    EXPECT_EQ(got.size(), out.size());
    std::set<Determinant> expected;
    for (const auto& d : enumerate_sector(s[0], s[1], s[2])) {
      const int deg = excitation_degree(ref, d);
      if (deg == 1 || deg == 2) expected.insert(d);
    }
    EXPECT_EQ(got, expected);
    EXPECT_FALSE(got.count(ref));
    for (const auto& d : out) EXPECT_TRUE(in_sector(d, {s[0], s[1], s[2]}));
  }
  EXPECT_EQ(generate_singles_doubles(hartree_fock_det(2, 2), 4).size(), 26u);
}
