#include "hivqe/driver.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "hivqe/oracle.hpp"
#include "hivqe/sampler.hpp"
#include "test_support.hpp"

using namespace hivqe;

namespace {

IntegralSet load(const std::string& name) { return read_fcidump(support::fixture(name + ".fcidump")); }

RunConfig small_config() {
  RunConfig cfg;
  cfg.shots = 200;
  cfg.m_expand = 4;
  return cfg;
}

}  // namespace

TEST(RunHivqe, H2ReachesExactEnergyQuickly) {
  const auto ints = load("h2_0.74");
  RunConfig cfg;
  cfg.k_cap = 4;
  cfg.m_expand = 3;
  const auto r = run_hivqe(cfg, ints);
  EXPECT_EQ(r.status, RunStatus::converged);
  ASSERT_GE(r.trace.size(), 3u);
  EXPECT_NEAR(r.trace[2].e_cumulative, support::fci_reference("h2_0.74"), 1e-8);
  EXPECT_NEAR(r.energy, fci_ground(ints).energy, 1e-8);
  EXPECT_NEAR(r.e_corr, r.energy - r.e_hf, 1e-15);
}

TEST(RunHivqe, FrozenCircuitWithoutExpansionStaysAtHartreeFock) {
  const auto ints = load("lih_1.60");
  RunConfig cfg;
  cfg.shots = 5000;
  cfg.ansatz_layers = 0;
  cfg.m_expand = 0;
  cfg.k_cap = 1;
  const auto r = run_hivqe(cfg, ints);
  EXPECT_NEAR(r.energy, support::hf_reference("lih_1.60"), 1e-9);
  EXPECT_NEAR(r.energy, r.e_hf, 1e-12);
  EXPECT_EQ(r.subspace.size(), 1u);
  for (const auto& rec : r.trace) EXPECT_EQ(rec.n_sampled, 1u);
}

TEST(RunHivqe, VariationalAndConsistentOnFixtures) {
  for (const char* name : {"h2_1.50", "h4_chain", "lih_1.60", "h6_chain"}) {
    const auto ints = load(name);
    const auto r = run_hivqe(small_config(), ints);
    EXPECT_GE(r.energy, support::fci_reference(name) - 1e-9) << name;
    EXPECT_LE(r.energy, r.e_hf + 1e-12) << name;
    EXPECT_EQ(r.amplitudes.size(), r.subspace.size());
    for (const auto& d : r.subspace) EXPECT_TRUE(in_sector(d, Sector::of(ints)));
    EXPECT_EQ(result_to_json(r)["n_dets"].get<std::size_t>(), r.subspace.size());
    const double e = energy_of(r.amplitudes, project(r.subspace, ints));
    EXPECT_NEAR(e, r.energy, 1e-9) << name;
  }
}

TEST(RunHivqe, PureUnionStepsNeverRaiseTheEnergy) {
  const auto ints = load("h6_chain");
  RunConfig cfg = small_config();
  cfg.amplitude_threshold = 0.0;
  cfg.max_iterations = 12;
  const auto r = run_hivqe(cfg, ints);
  for (std::size_t i = 1; i < r.trace.size(); ++i) {
    EXPECT_LE(r.trace[i].e_cumulative, r.trace[i - 1].e_cumulative + 1e-10);
    EXPECT_GE(r.trace[i].n_cumulative, r.trace[i - 1].n_after_expand);
  }
}

TEST(RunHivqe, Deterministic) {
  const auto ints = load("lih_1.60");
  RunConfig cfg = small_config();
  cfg.p_flip = 0.02;
  cfg.recovery = RecoveryMode::recover;
  const auto a = result_to_json(run_hivqe(cfg, ints)).dump();
  const auto b = result_to_json(run_hivqe(cfg, ints)).dump();
  EXPECT_EQ(a, b);
  cfg.seed += 1;
  EXPECT_NE(result_to_json(run_hivqe(cfg, ints)).dump(), a);
}

TEST(RunHivqe, ZeroIterationsReportsHartreeFock) {
  const auto ints = load("h2_0.74");
  RunConfig cfg;
  cfg.max_iterations = 0;
  const auto r = run_hivqe(cfg, ints);
  EXPECT_EQ(r.status, RunStatus::max_iterations);
  EXPECT_EQ(r.iterations, 0u);
  EXPECT_TRUE(r.trace.empty());
  EXPECT_DOUBLE_EQ(r.energy, r.e_hf);
}

TEST(RunHivqe, AllSamplesInvalidIsAnError) {
  // Complementing an open-shell determinant swaps its spin populations.
  const auto ints = support::random_integrals(4, 3, 1, 1);
  RunConfig cfg;
  cfg.p_flip = 1.0;
  EXPECT_THROW(run_hivqe(cfg, ints), RunError);
}

TEST(RunHivqe, NoisyRecoveryRunStaysVariational) {
  const auto ints = load("h4_chain");
  RunConfig cfg = small_config();
  cfg.p_flip = 0.05;
  cfg.recovery = RecoveryMode::recover;
  const auto r = run_hivqe(cfg, ints);
  EXPECT_GE(r.energy, support::fci_reference("h4_chain") - 1e-9);
  for (const auto& rec : r.trace) EXPECT_GT(rec.invalid_shots, 0u);
}

TEST(RunHivqe, TensorReconstructionAndCapRespectLimits) {
  const auto ints = load("h6_chain");
  RunConfig cfg = small_config();
  cfg.tensor_reconstruct = true;
  cfg.closed_shell = true;
  cfg.k_cap = 40;
  cfg.max_iterations = 5;
  const auto r = run_hivqe(cfg, ints);
  for (const auto& rec : r.trace) EXPECT_LE(rec.n_after_cap, 40u);
  EXPECT_GE(r.energy, support::fci_reference("h6_chain") - 1e-9);
}

TEST(RunHivqe, RestartSubspaceIsMerged) {
  const auto ints = load("lih_1.60");
  const auto all = enumerate_sector(6, 2, 2);
  const Subspace seed_space(Sector::of(ints), all);
  RunConfig cfg = small_config();
  cfg.max_iterations = 1;
  RunHooks hooks;
  hooks.initial = &seed_space;
  const auto r = run_hivqe(cfg, ints, nullptr, hooks);
  EXPECT_NEAR(r.energy, support::fci_reference("lih_1.60"), 1e-8);
  const Subspace wrong({6, 3, 1});
  hooks.initial = &wrong;
  EXPECT_THROW(run_hivqe(cfg, ints, nullptr, hooks), RunError);
}

TEST(RunHivqe, HooksSeeEveryIteration) {
  const auto ints = load("h4_chain");
  std::size_t seen = 0, batches = 0;
  RunHooks hooks;
  hooks.on_iteration = [&](const IterationRecord& rec) { EXPECT_EQ(rec.iteration, ++seen); };
  hooks.on_samples = [&](std::size_t, std::uint64_t, const SampleBatch& b) {
    ++batches;
    EXPECT_EQ(b.total_shots, 200u);
  };
  const auto r = run_hivqe(small_config(), ints, nullptr, hooks);
  EXPECT_EQ(seen, r.trace.size());
  EXPECT_EQ(batches, r.trace.size());
}

TEST(Config, JsonRoundTripAndPrecedence) {
  RunConfig cfg;
  apply_config(cfg, nlohmann::json{{"shots", 321}, {"recovery", "recover"}, {"spsa_a", 0.3}});
  EXPECT_EQ(cfg.shots, 321u);
  EXPECT_EQ(cfg.recovery, RecoveryMode::recover);
  apply_override(cfg, "shots=99");
  apply_override(cfg, "recovery=discard");
  EXPECT_EQ(cfg.shots, 99u);
  EXPECT_EQ(cfg.recovery, RecoveryMode::discard);
  RunConfig back;
  apply_config(back, config_to_json(cfg));
  EXPECT_EQ(config_to_json(back), config_to_json(cfg));
}

TEST(Config, RejectsBadInput) {
  RunConfig cfg;
  EXPECT_THROW(apply_config(cfg, nlohmann::json{{"shotz", 1}}), std::invalid_argument);
  EXPECT_THROW(apply_config(cfg, nlohmann::json{{"shots", -1}}), std::invalid_argument);
  EXPECT_THROW(apply_config(cfg, nlohmann::json{{"closed_shell", 1}}), std::invalid_argument);
  EXPECT_THROW(apply_override(cfg, "shots"), std::invalid_argument);
  EXPECT_THROW(apply_override(cfg, "recovery=maybe"), std::invalid_argument);
  cfg.shots = 0;
  EXPECT_THROW(cfg.validate(load("h2_0.74")), std::invalid_argument);
}

TEST(TraceCsv, OneRowPerIteration) {
  const auto r = run_hivqe(small_config(), load("h4_chain"));
  const auto csv = trace_to_csv(r.trace);
  EXPECT_EQ(csv.rfind("iter,E_cum,E_iter,n_dets_sampled,n_dets_valid,n_dets_cum,n_dets_post_screen,"
                      "wall_ms_sample,wall_ms_diag",
                      0),
            0u);
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), r.trace.size() + 1);
}

TEST(OneRdm, HartreeFockOccupations) {
  const auto hf = hartree_fock_det(2, 1);
  const Subspace s({4, 2, 1}, std::span(&hf, 1));
  const auto g = compute_1rdm(std::vector<double>{1.0}, s);
  EXPECT_DOUBLE_EQ(g(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(g(1, 1), 1.0);
  EXPECT_DOUBLE_EQ(g.trace(), 3.0);
  EXPECT_EQ((g - Eigen::Vector4d(2, 1, 0, 0).asDiagonal().toDenseMatrix()).cwiseAbs().maxCoeff(), 0.0);
}

// <psi| sum_sigma a+_p,sigma a_q,sigma |psi> on the Fock space.
TEST(OneRdm, MatchesOperatorOracle) {
  const int n = 4;
  const Sector sec{n, 2, 1};
  const auto dets = enumerate_sector(n, 2, 1);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  for (int t = 0; t < 5; ++t) {
    std::vector<Determinant> pick;
    for (const auto& d : dets)
      if (rng() % 3) pick.push_back(d);
    const Subspace s(sec, pick);
    std::vector<double> c(s.size());
    double norm = 0.0;
    for (auto& x : c) norm += (x = g(rng)) * x;
    for (auto& x : c) x /= std::sqrt(norm);
    Eigen::VectorXd psi = Eigen::VectorXd::Zero(1 << (2 * n));
    for (std::size_t i = 0; i < s.size(); ++i) psi(fock_index(s[i], n)) = c[i];
    const auto gamma = compute_1rdm(c, s);
    EXPECT_NEAR(gamma.trace(), 3.0, 1e-12);
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q) {
        const double ref = psi.dot((support::fock_hop(2 * n, p, q) + support::fock_hop(2 * n, n + p, n + q)) * psi);
        EXPECT_NEAR(gamma(p, q), ref, 1e-10);
      }
  }
}

TEST(Dipole, ZeroDensityGivesNuclearTerm) {
  DipoleIntegrals d;
  for (auto& c : d.components) c = Eigen::MatrixXd::Ones(2, 2);
  d.nuclear = Eigen::Vector3d(0.1, -0.2, 0.3);
  const auto mu = dipole_moment(Eigen::MatrixXd::Zero(2, 2), d);
  EXPECT_DOUBLE_EQ(mu[0], 0.1 * kAuToDebye);
  EXPECT_DOUBLE_EQ(mu[1], -0.2 * kAuToDebye);
  EXPECT_DOUBLE_EQ(mu[2], 0.3 * kAuToDebye);
}

TEST(Dipole, HomonuclearH2VanishesAndLiHMatchesReference) {
  const auto h2 = load("h2_0.74");
  const auto h2_dip = read_dipole_file(support::fixture("h2_0.74.dipole"), h2.n_orb());
  const auto r = run_hivqe(RunConfig{}, h2, &h2_dip);
  ASSERT_TRUE(r.dipole);
  for (double x : *r.dipole) EXPECT_NEAR(x, 0.0, 1e-8);

  const auto lih = load("lih_1.60");
  const auto fci = fci_ground(lih);
  const Subspace full(Sector::of(lih), fci.dets);
  const auto mu = dipole_moment(compute_1rdm(fci.vector.amplitudes, full),
                                read_dipole_file(support::fixture("lih_1.60.dipole"), lih.n_orb()));
  const auto ref = support::reference().at("lih_1.60").at("dipole_fci_debye");
  for (int a = 0; a < 3; ++a) EXPECT_NEAR(mu[a], ref[a].get<double>(), 1e-6);
}

TEST(PesSweep, H2CurveMatchesOracle) {
  std::vector<PesEntry> entries;
  for (const char* label : {"h2_0.50", "h2_0.74", "h2_1.50", "h2_2.50"}) {
    entries.push_back({label, support::fixture(std::string(label) + ".fcidump"), support::fci_reference(label)});
  }
  const auto points = run_pes_sweep(entries, RunConfig{});
  ASSERT_EQ(points.size(), 4u);
  for (const auto& p : points) {
    EXPECT_LT(*p.abs_error, 1e-8) << p.label;
    EXPECT_NEAR(*p.abs_error, std::abs(p.e_hivqe - *p.e_ref), 0.0);
  }
  EXPECT_GT(std::abs(points[3].e_hf - *points[3].e_ref), std::abs(points[1].e_hf - *points[1].e_ref));
  const auto csv = pes_to_csv(points);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "label,E_hf,E_hivqe,E_ref,abs_error,hf_error,plot_error");
}

TEST(PesSweep, IdenticalGeometriesAndErrors) {
  const PesEntry e{"a", support::fixture("h4_chain.fcidump"), std::nullopt};
  std::vector<PesEntry> twice{e, e};
  twice[1].label = "b";
  const auto points = run_pes_sweep(twice, small_config());
  EXPECT_EQ(points[0].e_hivqe, points[1].e_hivqe);
  EXPECT_THROW(run_pes_sweep({}, RunConfig{}), std::invalid_argument);
  const std::vector<PesEntry> mixed{{"a", support::fixture("h2_0.74.fcidump"), {}},
                                    {"b", support::fixture("h4_chain.fcidump"), {}}};
  EXPECT_THROW(run_pes_sweep(mixed, RunConfig{}), std::invalid_argument);
}

TEST(PesManifest, RelativePathsAndReferences) {
  const auto dir = std::filesystem::temp_directory_path() / "hivqe_manifest_test";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "m.txt") << "# label path ref\np1 a.fcidump -1.5\n\np2 /abs/b.fcidump\n";
  const auto entries = read_pes_manifest((dir / "m.txt").string());
  ASSERT_EQ(entries.size(), 2u);
  EXPECT_EQ(entries[0].fcidump, (dir / "a.fcidump").string());
  EXPECT_EQ(*entries[0].e_ref, -1.5);
  EXPECT_EQ(entries[1].fcidump, "/abs/b.fcidump");
  EXPECT_FALSE(entries[1].e_ref);
  std::ofstream(dir / "bad.txt") << "p1\n";
  EXPECT_THROW(read_pes_manifest((dir / "bad.txt").string()), FormatError);
}
