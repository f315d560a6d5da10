#include "hivqe/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hivqe/driver.hpp"
#include "hivqe/oracle.hpp"
#include "hivqe/sampler.hpp"

namespace hivqe {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct ConfigInputs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
};

// defaults < config file < --set < --seed
RunConfig resolve_config(const ConfigInputs& in) {
  RunConfig cfg;
  if (!in.config_path.empty()) {
    const std::string text = read_text_file(in.config_path);
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw FormatError(in.config_path + ": not valid JSON");
    try {
      apply_config(cfg, j);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(in.config_path + ": " + e.what());
    }
  }
  for (const auto& o : in.overrides) apply_override(cfg, o);
  if (in.seed) cfg.seed = *in.seed;
  return cfg;
}

void write_file(const fs::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << contents;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void require_file(const std::string& path, const char* what) {
  if (!fs::is_regular_file(path)) throw std::runtime_error(std::string(what) + " not found: " + path);
}

void add_config_flags(CLI::App* cmd, ConfigInputs& in) {
  cmd->add_option("--config", in.config_path, "Flat JSON run configuration");
  cmd->add_option("--set", in.overrides, "Override one config key (KEY=VALUE), repeatable");
  cmd->add_option("--seed", in.seed, "Master random seed");
}

struct RunArgs {
  std::string fcidump;
  std::string dipole;
  std::string out_dir = ".";
  std::string restart;
  bool dump_matrix = false;
  bool log_samples = false;
  ConfigInputs config;
};

int cmd_run(const RunArgs& a, std::ostream& out) {
  require_file(a.fcidump, "FCIDUMP");
  const IntegralSet ints = read_fcidump(a.fcidump);
  std::optional<DipoleIntegrals> dipole;
  if (!a.dipole.empty()) {
    require_file(a.dipole, "dipole file");
    dipole = read_dipole_file(a.dipole, ints.n_orb());
  }
  const RunConfig cfg = resolve_config(a.config);
  const Sector sector = Sector::of(ints);

  fs::create_directories(a.out_dir);
  const fs::path dir(a.out_dir);

  RunHooks hooks;
  std::optional<Subspace> initial;
  if (!a.restart.empty()) {
    require_file(a.restart, "restart subspace");
    std::ifstream in(a.restart);
    initial = read_subspace(in, sector);
    hooks.initial = &*initial;
  }
  std::ofstream sample_log;
  if (a.log_samples) {
    sample_log.open(dir / "samples.txt");
    if (!sample_log) throw std::runtime_error("cannot write " + (dir / "samples.txt").string());
    hooks.on_samples = [&](std::size_t iteration, std::uint64_t seed, const SampleBatch& batch) {
      sample_log << "# iteration " << iteration << " seed " << seed << '\n';
      write_batch(batch, sample_log);
    };
  }

  const RunResult r = run_hivqe(cfg, ints, dipole ? &*dipole : nullptr, hooks);

  write_file(dir / "result.json", result_to_json(r).dump(2) + "\n");
  write_file(dir / "trace.csv", trace_to_csv(r.trace));
  std::ostringstream sub;
  write_subspace(r.subspace, sub);
  write_file(dir / "subspace.txt", sub.str());
  if (a.dump_matrix) {
    std::ostringstream bin(std::ios::binary);
    write_binary(project(r.subspace, ints), bin);
    write_file(dir / "hamiltonian.bin", bin.str());
  }

  char line[160];
  std::snprintf(line, sizeof line, "energy %.10f  n_dets %zu  iterations %zu  %s\n", r.energy,
                r.subspace.size(), r.iterations, to_string(r.status).c_str());
  out << line;
  return r.status == RunStatus::converged ? 0 : 2;
}

struct FciArgs {
  std::string fcidump;
  std::vector<int> sector;
  bool count_only = false;
  std::uint64_t limit = 2'000'000;
};

int cmd_fci(const FciArgs& a, std::ostream& out) {
  if (a.fcidump.empty() == a.sector.empty()) {
    throw std::invalid_argument("fci: give exactly one of --fcidump or --sector");
  }
  int n_orb, n_alpha, n_beta;
  if (!a.sector.empty()) {
    if (a.sector.size() != 3) throw std::invalid_argument("fci: --sector expects N_ORB,N_ALPHA,N_BETA");
    n_orb = a.sector[0];
    n_alpha = a.sector[1];
    n_beta = a.sector[2];
    if (n_orb < 0 || n_alpha < 0 || n_beta < 0 || n_alpha > n_orb || n_beta > n_orb) {
      throw std::invalid_argument("fci: --sector values out of range");
    }
  } else {
    require_file(a.fcidump, "FCIDUMP");
    const auto [norb, nelec, ms2] = read_fcidump_header(a.fcidump);
    n_orb = norb;
    n_alpha = (nelec + ms2) / 2;
    n_beta = (nelec - ms2) / 2;
  }
  const auto count = sector_size(n_orb, n_alpha, n_beta);
  json j;
  j["n_orb"] = n_orb;
  j["n_alpha"] = n_alpha;
  j["n_beta"] = n_beta;
  j["n_qubits"] = 2 * n_orb;
  if (count <= std::numeric_limits<std::uint64_t>::max()) {
    j["sector_size"] = count.convert_to<std::uint64_t>();
  } else {
    j["sector_size"] = count.str();
  }
  if (!a.count_only) {
    if (a.fcidump.empty()) throw std::invalid_argument("fci: energy requires --fcidump");
    if (count > a.limit) {
      throw std::length_error("fci: sector holds " + count.str() + " determinants, above the limit of " +
                              std::to_string(a.limit) + "; use --count-only");
    }
    const IntegralSet ints = read_fcidump(a.fcidump);
    const FciResult r = fci_ground(ints, a.limit);
    j["energy"] = r.energy;
    j["e_hf"] = diagonal_energy(hartree_fock_det(ints), ints) + ints.e_core();
  }
  out << j.dump() << '\n';
  return 0;
}

struct SweepArgs {
  std::string manifest;
  std::string out_dir = ".";
  ConfigInputs config;
};

int cmd_sweep(const SweepArgs& a, std::ostream& out) {
  require_file(a.manifest, "manifest");
  const auto entries = read_pes_manifest(a.manifest);
  for (const auto& e : entries) require_file(e.fcidump, "FCIDUMP");
  const RunConfig cfg = resolve_config(a.config);
  const auto points = run_pes_sweep(entries, cfg);
  fs::create_directories(a.out_dir);
  const std::string csv = pes_to_csv(points);
  write_file(fs::path(a.out_dir) / "pes.csv", csv);
  out << csv;
  return 0;
}

struct ReportArgs {
  std::vector<std::string> results;
  std::optional<double> e_ref;
  std::string out_dir = ".";
};

struct ReportRow {
  std::string source;
  int n_orb = 0;
  int n_qubits = 0;
  std::uint64_t m = 0;
  std::uint64_t n_dets = 0;
  double energy = 0.0;
  std::optional<double> error;
};

int cmd_report(const ReportArgs& a, std::ostream& out) {
  if (a.results.empty()) throw std::invalid_argument("report: no result files given");
  std::vector<ReportRow> rows;
  for (const auto& path : a.results) {
    require_file(path, "result file");
    const json j = json::parse(read_text_file(path), nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw FormatError(path + ": not a JSON object");
    try {
      ReportRow r;
      r.source = path;
      r.n_orb = j.at("n_orb").get<int>();
      r.n_qubits = 2 * r.n_orb;
      r.m = j.at("config").at("m_expand").get<std::uint64_t>();
      r.n_dets = j.at("n_dets").get<std::uint64_t>();
      r.energy = j.at("energy").get<double>();
      if (a.e_ref) r.error = std::abs(r.energy - *a.e_ref);
      rows.push_back(r);
    } catch (const json::exception& e) {
      throw FormatError(path + ": missing or ill-typed field (" + e.what() + ")");
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const ReportRow& x, const ReportRow& y) {
    if (x.n_qubits != y.n_qubits) return x.n_qubits < y.n_qubits;
    return x.m < y.m;
  });

  std::ostringstream csv, dat;
  csv << "source,n_qubits,m,n_dets,energy,error\n";
  dat << "# n_qubits m n_dets energy error\n";
  char buf[256];
  for (const auto& r : rows) {
    csv << r.source;
    std::snprintf(buf, sizeof buf, ",%d,%llu,%llu,%.10f,", r.n_qubits,
                  static_cast<unsigned long long>(r.m), static_cast<unsigned long long>(r.n_dets), r.energy);
    csv << buf;
    if (r.error) {
      std::snprintf(buf, sizeof buf, "%.6e", *r.error);
      csv << buf;
    }
    csv << '\n';
    std::snprintf(buf, sizeof buf, "%d %llu %llu %.10f ", r.n_qubits, static_cast<unsigned long long>(r.m),
                  static_cast<unsigned long long>(r.n_dets), r.energy);
    dat << buf;
    if (r.error) {
      std::snprintf(buf, sizeof buf, "%.6e\n", *r.error);
      dat << buf;
    } else {
      dat << "nan\n";
    }
  }
  fs::create_directories(a.out_dir);
  write_file(fs::path(a.out_dir) / "report.csv", csv.str());
  write_file(fs::path(a.out_dir) / "report.dat", dat.str());
  out << csv.str();
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"HI-VQE selected configuration interaction"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run HI-VQE on an FCIDUMP");
  run_cmd->add_option("--fcidump", run.fcidump, "Integral file")->required();
  run_cmd->add_option("--dipole", run.dipole, "MO dipole integrals for the final state");
  run_cmd->add_option("--out", run.out_dir, "Output directory");
  run_cmd->add_option("--restart", run.restart, "Seed the subspace from a subspace.txt");
  run_cmd->add_flag("--dump-matrix", run.dump_matrix, "Also write the final projected Hamiltonian");
  run_cmd->add_flag("--log-samples", run.log_samples, "Write every sample batch to samples.txt");
  add_config_flags(run_cmd, run.config);

  FciArgs fci;
  auto* fci_cmd = app.add_subcommand("fci", "Exact diagonalization over the full sector");
  fci_cmd->add_option("--fcidump", fci.fcidump, "Integral file");
  fci_cmd->add_option("--sector", fci.sector, "N_ORB,N_ALPHA,N_BETA (count only)")->delimiter(',');
  fci_cmd->add_flag("--count-only", fci.count_only, "Report the sector size without diagonalizing");
  fci_cmd->add_option("--limit", fci.limit, "Largest sector to diagonalize");

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "One run per geometry of a manifest");
  sweep_cmd->add_option("--manifest", sweep.manifest, "Lines of 'label path [E_ref]'")->required();
  sweep_cmd->add_option("--out", sweep.out_dir, "Output directory");
  add_config_flags(sweep_cmd, sweep.config);

  ReportArgs report;
  auto* report_cmd = app.add_subcommand("report", "Tabulate result.json files");
  report_cmd->add_option("results", report.results, "result.json files")->required();
  report_cmd->add_option("--ref", report.e_ref, "Reference energy for the error column");
  report_cmd->add_option("--out", report.out_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run_cmd) return cmd_run(run, out);
    if (*fci_cmd) return cmd_fci(fci, out);
    if (*sweep_cmd) return cmd_sweep(sweep, out);
    return cmd_report(report, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace hivqe
