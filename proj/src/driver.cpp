#include "hivqe/driver.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "hivqe/sampler.hpp"

namespace hivqe {

using nlohmann::json;

void RunConfig::validate(const IntegralSet& ints) const {
  if (shots == 0) throw std::invalid_argument("config: shots must be positive");
  if (amplitude_threshold < 0.0) throw std::invalid_argument("config: amplitude_threshold must be >= 0");
  if (convergence_eps < 0.0) throw std::invalid_argument("config: convergence_eps must be >= 0");
  if (p_flip < 0.0 || p_flip > 1.0) throw std::invalid_argument("config: p_flip must lie in [0, 1]");
  if (ansatz_layers < 0) throw std::invalid_argument("config: ansatz_layers must be >= 0");
  if (closed_shell && ints.n_alpha() != ints.n_beta()) {
    throw std::invalid_argument("config: closed_shell requires n_alpha == n_beta");
  }
}

std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::converged: return "converged";
    case RunStatus::stalled: return "stalled";
    case RunStatus::max_iterations: return "max_iterations";
  }
  return "unknown";
}

namespace {

struct ConfigField {
  std::function<json(const RunConfig&)> get;
  std::function<void(RunConfig&, const json&)> set;
};

template <typename T>
T as_count(const json& v, const std::string& key) {
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0)) {
    throw std::invalid_argument("config key '" + key + "' expects a non-negative integer");
  }
  return static_cast<T>(v.get<std::uint64_t>());
}

double as_real(const json& v, const std::string& key) {
  if (!v.is_number()) throw std::invalid_argument("config key '" + key + "' expects a number");
  return v.get<double>();
}

bool as_bool(const json& v, const std::string& key) {
  if (!v.is_boolean()) throw std::invalid_argument("config key '" + key + "' expects true/false");
  return v.get<bool>();
}

const std::map<std::string, ConfigField>& config_fields() {
  static const std::map<std::string, ConfigField> fields = [] {
    std::map<std::string, ConfigField> f;
#define HIVQE_COUNT(key, member, type)                                              \
  f[key] = {[](const RunConfig& c) { return json(c.member); },                      \
            [](RunConfig& c, const json& v) { c.member = as_count<type>(v, key); }}
#define HIVQE_REAL(key, member)                                                     \
  f[key] = {[](const RunConfig& c) { return json(c.member); },                      \
            [](RunConfig& c, const json& v) { c.member = as_real(v, key); }}
#define HIVQE_BOOL(key, member)                                                     \
  f[key] = {[](const RunConfig& c) { return json(c.member); },                      \
            [](RunConfig& c, const json& v) { c.member = as_bool(v, key); }}
    HIVQE_COUNT("shots", shots, std::uint64_t);
    HIVQE_COUNT("k_cap", k_cap, std::size_t);
    HIVQE_COUNT("m_expand", m_expand, std::size_t);
    HIVQE_COUNT("expansions_per_iteration", expansions_per_iteration, std::size_t);
    HIVQE_REAL("amplitude_threshold", amplitude_threshold);
    HIVQE_REAL("convergence_eps", convergence_eps);
    HIVQE_COUNT("convergence_window", convergence_window, std::size_t);
    HIVQE_COUNT("max_iterations", max_iterations, std::size_t);
    HIVQE_COUNT("stall_window", stall_window, std::size_t);
    HIVQE_BOOL("tensor_reconstruct", tensor_reconstruct);
    HIVQE_BOOL("closed_shell", closed_shell);
    HIVQE_REAL("p_flip", p_flip);
    HIVQE_COUNT("seed", seed, std::uint64_t);
    HIVQE_COUNT("ansatz_layers", ansatz_layers, int);
    HIVQE_REAL("spsa_a", spsa.a);
    HIVQE_REAL("spsa_c", spsa.c);
    HIVQE_REAL("spsa_A", spsa.A);
    HIVQE_REAL("spsa_alpha", spsa.alpha);
    HIVQE_REAL("spsa_gamma", spsa.gamma);
    HIVQE_REAL("loose_residual", solver.loose_residual);
    HIVQE_COUNT("loose_max_iterations", solver.loose_max_iterations, int);
    HIVQE_REAL("tight_residual", solver.tight_residual);
    HIVQE_COUNT("tight_max_iterations", solver.tight_max_iterations, int);
    HIVQE_COUNT("dense_limit", solver.dense_limit, std::size_t);
    HIVQE_COUNT("davidson_max_subspace", solver.max_subspace, std::size_t);
    HIVQE_COUNT("sector_limit", sector_limit, std::uint64_t);
#undef HIVQE_COUNT
#undef HIVQE_REAL
#undef HIVQE_BOOL
    f["recovery"] = {
        [](const RunConfig& c) { return json(c.recovery == RecoveryMode::recover ? "recover" : "discard"); },
        [](RunConfig& c, const json& v) {
          if (v == "discard") {
            c.recovery = RecoveryMode::discard;
          } else if (v == "recover") {
            c.recovery = RecoveryMode::recover;
          } else {
            throw std::invalid_argument("config key 'recovery' expects \"discard\" or \"recover\"");
          }
        }};
    f["convergence_energy"] = {
        [](const RunConfig& c) { return json(c.converge_on_cumulative ? "cumulative" : "iteration"); },
        [](RunConfig& c, const json& v) {
          if (v == "cumulative") {
            c.converge_on_cumulative = true;
          } else if (v == "iteration") {
            c.converge_on_cumulative = false;
          } else {
            throw std::invalid_argument(
                "config key 'convergence_energy' expects \"cumulative\" or \"iteration\"");
          }
        }};
    return f;
  }();
  return fields;
}

std::uint64_t mix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Independent RNG stream per (iteration, purpose).
std::uint64_t stream_seed(std::uint64_t seed, std::size_t iteration, unsigned purpose) {
  return mix(seed ^ mix(static_cast<std::uint64_t>(iteration) * 8 + purpose));
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

}  // namespace

json config_to_json(const RunConfig& cfg) {
  json j = json::object();
  for (const auto& [key, field] : config_fields()) j[key] = field.get(cfg);
  return j;
}

void apply_config(RunConfig& cfg, const json& j) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  const auto& fields = config_fields();
  for (const auto& [key, value] : j.items()) {
    const auto it = fields.find(key);
    if (it == fields.end()) throw std::invalid_argument("unknown config key '" + key + "'");
    it->second.set(cfg, value);
  }
}

void apply_override(RunConfig& cfg, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw std::invalid_argument("override '" + std::string(assignment) + "' is not KEY=VALUE");
  }
  const std::string key(assignment.substr(0, eq));
  const std::string raw(assignment.substr(eq + 1));
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  apply_config(cfg, json{{key, value}});
}

OccupancyHint occupancies(std::span<const double> amplitudes, const Subspace& sub) {
  const int n = sub.sector().n_orb;
  OccupancyHint occ{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  double total = 0.0;
  for (std::size_t i = 0; i < sub.size(); ++i) {
    const double w = amplitudes[i] * amplitudes[i];
    total += w;
    for (int p = 0; p < n; ++p) {
      if ((sub[i].alpha >> p) & 1ULL) occ.alpha[p] += w;
      if ((sub[i].beta >> p) & 1ULL) occ.beta[p] += w;
    }
  }
  if (total > 0.0) {
    for (auto& v : occ.alpha) v /= total;
    for (auto& v : occ.beta) v /= total;
  }
  return occ;
}

Eigen::MatrixXd compute_1rdm(std::span<const double> amplitudes, const Subspace& sub) {
  if (amplitudes.size() != sub.size()) {
    throw std::invalid_argument("compute_1rdm: amplitude vector does not match subspace");
  }
  const int n = sub.sector().n_orb;
  const std::uint64_t full = n >= 64 ? ~0ULL : ((1ULL << n) - 1);
  Eigen::MatrixXd gamma = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t j = 0; j < sub.size(); ++j) {
    const double cj = amplitudes[j];
    if (cj == 0.0) continue;
    const Determinant& dj = sub[j];
    for (int spin = 0; spin < 2; ++spin) {
      const std::uint64_t m = spin == 0 ? dj.alpha : dj.beta;
      for (std::uint64_t occ = m; occ; occ &= occ - 1) {
        const int q = std::countr_zero(occ);
        gamma(q, q) += cj * cj;
        // a+_p a_q |d_j> = phase |d_i>
        for (std::uint64_t vir = full & ~m; vir; vir &= vir - 1) {
          const int p = std::countr_zero(vir);
          const std::uint64_t moved = m ^ (1ULL << q) ^ (1ULL << p);
          const Determinant di = spin == 0 ? Determinant{moved, dj.beta} : Determinant{dj.alpha, moved};
          if (const auto i = sub.index_of(di)) {
            gamma(p, q) += amplitudes[*i] * cj * move_phase(m, q, p);
          }
        }
      }
    }
  }
  return gamma;
}

std::array<double, 3> dipole_moment(const Eigen::MatrixXd& rdm1, const DipoleIntegrals& d) {
  std::array<double, 3> out{};
  for (int a = 0; a < 3; ++a) {
    if (d.components[a].rows() != rdm1.rows() || d.components[a].cols() != rdm1.cols()) {
      throw std::invalid_argument("dipole_moment: integral and density shapes differ");
    }
    const double electronic = (rdm1.array() * d.components[a].array()).sum();
    out[a] = (d.nuclear[a] - electronic) * kAuToDebye;
  }
  return out;
}

RunResult run_hivqe(const RunConfig& cfg, const IntegralSet& ints, const DipoleIntegrals* dipole,
                    const RunHooks& hooks) {
  using clock = std::chrono::steady_clock;
  cfg.validate(ints);
  const Sector sector = Sector::of(ints);
  const Determinant hf = hartree_fock_det(ints);
  const SectorBasis basis(sector, cfg.sector_limit);
  const AnsatzSpec ansatz = AnsatzSpec::brick_wall(sector.n_orb, cfg.ansatz_layers);
  SpsaOptimizer optimizer(std::vector<double>(ansatz.parameter_count(), 0.0), cfg.spsa,
                          stream_seed(cfg.seed, 0, 7));
  const NoiseModel noise{cfg.p_flip};

  RunResult result;
  result.config = cfg;
  result.e_hf = diagonal_energy(hf, ints) + ints.e_core();

  Subspace cumulative(sector, std::span<const Determinant>(&hf, 1));
  if (hooks.initial != nullptr) {
    if (!(hooks.initial->sector() == sector)) {
      throw RunError("restart subspace belongs to a different sector");
    }
    cumulative = unite(cumulative, hooks.initial->dets());
  }
  std::vector<double> psi(cumulative.size(), 0.0);
  psi[0] = 1.0;
  Subspace psi_space = cumulative;

  double best_energy = result.e_hf;
  Subspace best_space = cumulative;
  std::vector<double> best_psi = psi;
  if (cumulative.size() > 1) {
    const CIVector c = ground_state(project(cumulative, ints), SolveMode::tight, cfg.solver);
    best_energy = c.energy;
    best_psi = c.amplitudes;
    psi = c.amplitudes;
  }

  OccupancyHint hint = occupancies(psi, cumulative);
  EnergyHistory history;
  std::size_t since_improvement = 0;
  result.status = RunStatus::max_iterations;

  // Energy of the subspace spanned by one sampling round of U(theta)|HF>.
  // A probe whose samples are all invalid carries no information; it scores
  // as the reference energy.
  auto sampled_energy = [&](std::span<const double> theta, std::uint64_t seed) {
    const SectorState state = prepare_state(ansatz, theta, basis);
    const SampleBatch batch = sample(state, basis, cfg.shots, noise, seed);
    const FilterResult f = filter_symmetry(batch, sector, cfg.recovery, &hint);
    if (f.dets.empty()) return result.e_hf;
    return ground_state(project(f.dets, ints), SolveMode::loose, cfg.solver).energy;
  };

  for (std::size_t it = 0; it < cfg.max_iterations; ++it) {
    IterationRecord rec;
    rec.iteration = it + 1;

    // (1)-(2) sample and filter
    auto t0 = clock::now();
    const SectorState state = prepare_state(ansatz, optimizer.theta(), basis);
    const std::uint64_t sample_seed = stream_seed(cfg.seed, it, 0);
    const SampleBatch batch = sample(state, basis, cfg.shots, noise, sample_seed);
    if (hooks.on_samples) hooks.on_samples(it + 1, sample_seed, batch);
    const FilterResult filtered = filter_symmetry(batch, sector, cfg.recovery, &hint);
    rec.wall_ms_sample = elapsed_ms(t0);
    rec.n_sampled = batch.counts.size();
    rec.n_valid = filtered.dets.size();
    rec.valid_shots = filtered.valid_shots;
    rec.invalid_shots = filtered.discarded_shots + filtered.recovered_shots;
    if (filtered.dets.empty()) {
      throw RunError("iteration " + std::to_string(it + 1) +
                     ": no sector-valid configurations survived filtering; raise shots or "
                     "enable recovery mode");
    }

    // (3)-(5) accumulate, cap, reconstruct
    cumulative = unite(cumulative, filtered.dets);
    rec.n_after_union = cumulative.size();
    if (cfg.k_cap > 0) cumulative = cap_screen(cumulative, cfg.k_cap, ints, cfg.solver);
    rec.n_after_cap = cumulative.size();
    if (cfg.tensor_reconstruct) {
      cumulative = tensor_reconstruct(cumulative, cfg.closed_shell);
      if (cfg.k_cap > 0 && cumulative.size() > 10 * cfg.k_cap) {
        throw RunError("iteration " + std::to_string(it + 1) + ": tensor reconstruction grew the subspace to " +
                       std::to_string(cumulative.size()) + " determinants, above 10*k_cap=" +
                       std::to_string(10 * cfg.k_cap) + "; lower m_expand or raise k_cap");
      }
    }
    rec.n_cumulative = cumulative.size();

    // (6) cumulative diagonalization
    t0 = clock::now();
    const std::vector<double> guess = realign(psi_space, psi, cumulative);
    const CIVector cum = ground_state(project(cumulative, ints), SolveMode::tight, cfg.solver, guess);
    psi = cum.amplitudes;
    psi_space = cumulative;
    rec.e_cumulative = cum.energy;

    // (7) iteration-only diagonalization
    rec.e_iteration =
        ground_state(project(filtered.dets, ints), SolveMode::loose, cfg.solver).energy;
    rec.wall_ms_diag = elapsed_ms(t0);

    if (cum.energy < best_energy - cfg.convergence_eps) {
      since_improvement = 0;
    } else {
      ++since_improvement;
    }
    if (cum.energy < best_energy) {
      best_energy = cum.energy;
      best_space = cumulative;
      best_psi = psi;
    }
    hint = occupancies(psi, cumulative);

    // (8) convergence
    history.append(cfg.converge_on_cumulative ? rec.e_cumulative : rec.e_iteration);
    result.iterations = it + 1;
    if (history.converged(cfg.convergence_eps, cfg.convergence_window)) {
      rec.n_after_screen = rec.n_after_expand = cumulative.size();
      rec.theta_norm = std::sqrt(std::inner_product(optimizer.theta().begin(), optimizer.theta().end(),
                                                    optimizer.theta().begin(), 0.0));
      result.trace.push_back(rec);
      if (hooks.on_iteration) hooks.on_iteration(rec);
      result.status = RunStatus::converged;
      break;
    }

    // (9)-(10) amplitude screen and classical expansion
    Subspace screened = amplitude_screen(cumulative, psi, cfg.amplitude_threshold);
    std::vector<double> amps = realign(cumulative, psi, screened);
    rec.n_after_screen = screened.size();
    for (std::size_t rep = 0; rep < cfg.expansions_per_iteration; ++rep) {
      Subspace expanded = classical_expand(screened, amps, cfg.m_expand, ints);
      amps = realign(screened, amps, expanded);
      screened = std::move(expanded);
    }
    rec.n_after_expand = screened.size();
    psi = realign(psi_space, psi, screened);
    psi_space = screened;
    cumulative = std::move(screened);

    // (11) optimizer step on iteration-only energies
    const ProbePair probes = optimizer.propose();
    rec.e_plus = sampled_energy(probes.plus, stream_seed(cfg.seed, it, 1));
    rec.e_minus = sampled_energy(probes.minus, stream_seed(cfg.seed, it, 2));
    optimizer.update(rec.e_plus, rec.e_minus);
    rec.theta_norm = std::sqrt(std::inner_product(optimizer.theta().begin(), optimizer.theta().end(),
                                                  optimizer.theta().begin(), 0.0));

    result.trace.push_back(rec);
    if (hooks.on_iteration) hooks.on_iteration(rec);

    if (cfg.stall_window > 0 && since_improvement >= cfg.stall_window) {
      result.status = RunStatus::stalled;
      break;
    }
  }

  result.energy = best_energy;
  result.e_corr = best_energy - result.e_hf;
  result.subspace = best_space;
  result.amplitudes = best_psi;
  if (dipole != nullptr) {
    result.dipole = dipole_moment(compute_1rdm(best_psi, best_space), *dipole);
  }
  return result;
}

json result_to_json(const RunResult& r) {
  const Sector& s = r.subspace.sector();
  json j;
  j["energy"] = r.energy;
  j["e_corr"] = r.e_corr;
  j["e_hf"] = r.e_hf;
  j["n_dets"] = r.subspace.size();
  j["converged"] = r.status == RunStatus::converged;
  j["status"] = to_string(r.status);
  j["iterations"] = r.iterations;
  j["dipole"] = r.dipole ? json(*r.dipole) : json(nullptr);
  j["config"] = config_to_json(r.config);
  j["seed"] = r.config.seed;
  j["n_orb"] = s.n_orb;
  j["n_alpha"] = s.n_alpha;
  j["n_beta"] = s.n_beta;
  j["n_qubits"] = 2 * s.n_orb;
  j["sector_size"] = sector_size(s.n_orb, s.n_alpha, s.n_beta).str();
  json energies = json::array();
  for (const auto& rec : r.trace) energies.push_back(rec.e_cumulative);
  j["energy_trace"] = energies;
  return j;
}

std::string trace_to_csv(std::span<const IterationRecord> trace) {
  std::ostringstream out;
  out << "iter,E_cum,E_iter,n_dets_sampled,n_dets_valid,n_dets_cum,n_dets_post_screen,"
         "wall_ms_sample,wall_ms_diag,theta_norm,e_plus,e_minus\n";
  char buf[512];
  for (const auto& r : trace) {
    std::snprintf(buf, sizeof buf, "%zu,%.8f,%.8f,%zu,%zu,%zu,%zu,%.3f,%.3f,%.8f,%.8f,%.8f\n",
                  r.iteration, r.e_cumulative, r.e_iteration, r.n_sampled, r.n_valid,
                  r.n_cumulative, r.n_after_screen, r.wall_ms_sample, r.wall_ms_diag, r.theta_norm,
                  r.e_plus, r.e_minus);
    out << buf;
  }
  return out.str();
}

std::vector<PesPoint> run_pes_sweep(std::span<const PesEntry> entries, const RunConfig& cfg) {
  if (entries.empty()) throw std::invalid_argument("PES sweep: no geometries given");
  std::vector<PesPoint> points;
  std::optional<Sector> sector;
  for (const auto& e : entries) {
    const IntegralSet ints = read_fcidump(e.fcidump);
    const Sector s = Sector::of(ints);
    if (sector && !(*sector == s)) {
      throw std::invalid_argument("PES sweep: '" + e.label + "' has a different sector (" +
                                  std::to_string(s.n_orb) + "o," + std::to_string(s.n_alpha) + "a," +
                                  std::to_string(s.n_beta) + "b) than the first geometry");
    }
    sector = s;
    const RunResult r = run_hivqe(cfg, ints);
    PesPoint p;
    p.label = e.label;
    p.e_hf = r.e_hf;
    p.e_hivqe = r.energy;
    p.e_ref = e.e_ref;
    if (e.e_ref) p.abs_error = std::abs(r.energy - *e.e_ref);
    p.n_dets = r.subspace.size();
    p.status = r.status;
    points.push_back(p);
  }
  return points;
}

std::vector<PesEntry> read_pes_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest: " + path);
  const auto dir = std::filesystem::path(path).parent_path();
  std::vector<PesEntry> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    PesEntry e;
    if (!(fields >> e.label) || e.label[0] == '#') continue;
    if (!(fields >> e.fcidump)) {
      throw FormatError("manifest line " + std::to_string(line_no) + ": expected 'label path [E_ref]'");
    }
    if (std::filesystem::path(e.fcidump).is_relative()) e.fcidump = (dir / e.fcidump).string();
    std::string ref;
    if (fields >> ref) {
      try {
        e.e_ref = std::stod(ref);
      } catch (const std::exception&) {
        throw FormatError("manifest line " + std::to_string(line_no) + ": bad reference energy '" + ref + "'");
      }
    }
    out.push_back(e);
  }
  return out;
}

std::string pes_to_csv(std::span<const PesPoint> points) {
  std::ostringstream out;
  // plot_error floors exact agreement at 1e-12 so log-scale plots stay finite.
  out << "label,E_hf,E_hivqe,E_ref,abs_error,hf_error,plot_error\n";
  char buf[256];
  for (const auto& p : points) {
    out << p.label;
    std::snprintf(buf, sizeof buf, ",%.8f,%.8f", p.e_hf, p.e_hivqe);
    out << buf;
    if (p.e_ref) {
      std::snprintf(buf, sizeof buf, ",%.8f,%.6e,%.6e,%.6e", *p.e_ref, *p.abs_error,
                    std::abs(p.e_hf - *p.e_ref), std::max(*p.abs_error, 1e-12));
      out << buf;
    } else {
      out << ",,,,";
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace hivqe
