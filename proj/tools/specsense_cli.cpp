// Benchmark CLI: single-realization demos, Monte Carlo sweeps over
// (solver, M, SNR) cells, and re-summarizing of existing record files.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <omp.h>

#include <CLI11.hpp>

#include "specsense/harness.hpp"

namespace {

using specsense::ExperimentConfig;
using specsense::Solver;

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  size_t pos = 0;
  while (pos <= s.size()) {
    const size_t comma = s.find(',', pos);
    if (comma == std::string::npos) {
      out.push_back(s.substr(pos));
      break;
    }
    out.push_back(s.substr(pos, comma - pos));
    pos = comma + 1;
  }
  return out;
}

std::vector<Solver> parse_solvers(const std::string& arg) {
  std::vector<Solver> out;
  for (const std::string& name : split_list(arg)) {
    const auto s = specsense::solver_from_name(name);
    if (!s) throw std::invalid_argument("unknown solver: " + name);
    out.push_back(*s);
  }
  return out;
}

std::vector<std::optional<double>> parse_snrs(const std::string& arg) {
  std::vector<std::optional<double>> out;
  for (const std::string& tok : split_list(arg)) {
    if (tok == "noiseless") {
      out.push_back(std::nullopt);
    } else {
      try {
        out.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw std::invalid_argument("--snr expects a number or 'noiseless': " + tok);
      }
    }
  }
  return out;
}

struct CommonOpts {
  std::string scenario = "paper";
  std::string solvers = "modified_omp,mndo,modified_bpdn";
  std::vector<int> m_values = {250};
  std::string snr = "noiseless";
  int trials = 100;
  uint64_t seed = 1;
  std::string out_dir = ".";
  bool fixed_phi = false;
  bool timing = false;
  int threads = 0;
  double gamma = -1.0;
  double eta = -1.0;
  int max_iter = -1;
  double rel_tol = -1.0;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--scenario", o.scenario, "Scenario JSON file, or the built-in name 'paper'");
  cmd->add_option("--solvers", o.solvers,
                  "Comma list of omp, modified_omp, bpdn, mndo, modified_bpdn");
  cmd->add_option("--m", o.m_values, "Measurement counts M")->delimiter(',');
  cmd->add_option("--snr", o.snr, "Comma list of SNR values in dB, or 'noiseless'");
  cmd->add_option("--trials", o.trials, "Trials per (solver, M, SNR) cell");
  cmd->add_option("--seed", o.seed, "Master seed");
  cmd->add_option("--out", o.out_dir, "Output directory");
  cmd->add_flag("--fixed-phi", o.fixed_phi, "Share one measurement matrix per M across trials");
  cmd->add_flag("--timing", o.timing,
                "Record wall times (off by default so records.csv is byte-reproducible)");
  cmd->add_option("--threads", o.threads, "OpenMP thread count (0 = default)");
  cmd->add_option("--gamma", o.gamma, "Override the l1 weight for bpdn/modified_bpdn");
  cmd->add_option("--eta", o.eta, "Override the residual target (greedy stop / mndo constraint)");
  cmd->add_option("--max-iter", o.max_iter, "Override the iteration cap");
  cmd->add_option("--rel-tol", o.rel_tol, "Override the proximal-gradient stopping tolerance");
}

ExperimentConfig to_config(const CommonOpts& o) {
  ExperimentConfig cfg;
  cfg.scenario = o.scenario;
  cfg.solvers = parse_solvers(o.solvers);
  cfg.m_values = o.m_values;
  cfg.snr_db_values = parse_snrs(o.snr);
  cfg.trials = o.trials;
  cfg.seed = o.seed;
  cfg.fixed_phi = o.fixed_phi;
  cfg.timing = o.timing;
  specsense::SolverOverrides ov;
  if (o.gamma >= 0.0) ov.gamma = o.gamma;
  if (o.eta >= 0.0) ov.eta = o.eta;
  if (o.max_iter >= 0) ov.max_iter = o.max_iter;
  if (o.rel_tol > 0.0) ov.rel_tol = o.rel_tol;
  for (Solver s : cfg.solvers) cfg.solver_params[s] = ov;
  return cfg;
}

int run_demo(const CommonOpts& o) {
  ExperimentConfig cfg = to_config(o);
  cfg.timing = true;  // demo prints timings; files stay deterministic
  const std::filesystem::path dir(o.out_dir);
  std::filesystem::create_directories(dir);
  const int m = cfg.m_values.front();
  const std::optional<double> snr = cfg.snr_db_values.front();

  bool wrote_truth = false;
  for (Solver s : cfg.solvers) {
    const specsense::DemoResult demo = specsense::run_single_demo(cfg, s, m, snr);
    if (!wrote_truth) {
      specsense::write_spectrum_dat(demo.truth.values, (dir / "spectrum_true.dat").string());
      wrote_truth = true;
    }
    specsense::write_spectrum_dat(demo.result.f_hat,
                                  (dir / ("spectrum_" + specsense::solver_name(s) + ".dat")).string());
    specsense::write_residual_history_dat(
        demo.result, (dir / ("residual_" + specsense::solver_name(s) + ".dat")).string());
    const std::string snr_label = snr ? "snr=" + std::to_string(*snr) + "dB" : "noiseless";
    std::printf("%-14s M=%d %s  mse=%.6g  iters=%d  time=%.4fs%s%s\n",
                specsense::solver_name(s).c_str(), m, snr_label.c_str(), demo.mse,
                demo.result.iterations, demo.result.wall_time_s,
                demo.result.flags ? "  flags=" : "",
                specsense::flags_to_string(demo.result.flags).c_str());
  }
  return 0;
}

int run_sweep(const CommonOpts& o) {
  const ExperimentConfig cfg = to_config(o);
  const std::filesystem::path dir(o.out_dir);
  std::filesystem::create_directories(dir);

  const std::vector<specsense::TrialRecord> records = specsense::run_monte_carlo(cfg);
  specsense::write_records_csv(records, (dir / "records.csv").string());
  const std::vector<specsense::SummaryRow> rows = specsense::summarize(records);
  specsense::write_summary_csv(rows, (dir / "summary.csv").string());
  bool any_noisy = false;
  for (const auto& r : rows) any_noisy = any_noisy || r.snr_db.has_value();
  if (any_noisy) {
    for (int m : cfg.m_values) {
      specsense::write_mse_vs_snr_dat(rows, m,
                                      (dir / ("mse_vs_snr_" + std::to_string(m) + ".dat")).string());
    }
  }
  std::printf("wrote %zu records to %s\n", records.size(), (dir / "records.csv").string().c_str());
  for (const auto& r : rows) {
    const std::string snr_label = r.snr_db ? std::to_string(*r.snr_db) + " dB" : "noiseless";
    std::printf("%-14s M=%-4d %-10s mean_mse=%.6g median=%.6g time=%.4fs (%d trials)\n",
                specsense::solver_name(r.solver).c_str(), r.m, snr_label.c_str(), r.mean_mse,
                r.median_mse, r.mean_time_s, r.trials);
  }
  return 0;
}

int run_summarize(const CommonOpts& o) {
  const std::filesystem::path dir(o.out_dir);
  const auto records = specsense::read_records_csv((dir / "records.csv").string());
  const auto rows = specsense::summarize(records);
  specsense::write_summary_csv(rows, (dir / "summary.csv").string());
  std::vector<int> ms;
  bool any_noisy = false;
  for (const auto& r : rows) {
    if (std::find(ms.begin(), ms.end(), r.m) == ms.end()) ms.push_back(r.m);
    any_noisy = any_noisy || r.snr_db.has_value();
  }
  if (any_noisy) {
    for (int m : ms) {
      specsense::write_mse_vs_snr_dat(rows, m,
                                      (dir / ("mse_vs_snr_" + std::to_string(m) + ".dat")).string());
    }
  }
  std::printf("summarized %zu records into %s\n", records.size(),
              (dir / "summary.csv").string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sub-Nyquist wideband spectrum reconstruction benchmark"};
  app.require_subcommand(1);

  CommonOpts demo_opts, sweep_opts, sum_opts;
  CLI::App* demo = app.add_subcommand("demo", "One seeded realization, spectrum plot data per solver");
  add_common(demo, demo_opts);
  CLI::App* sweep = app.add_subcommand("sweep", "Monte Carlo sweep over (solver, M, SNR) cells");
  add_common(sweep, sweep_opts);
  CLI::App* summarize = app.add_subcommand("summarize", "Rebuild summary.csv from an --out directory");
  summarize->add_option("--out", sum_opts.out_dir, "Directory holding records.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // bad flags -> usage error
  }

  try {
    const CommonOpts& active = demo->parsed() ? demo_opts : (sweep->parsed() ? sweep_opts : sum_opts);
    if (active.threads > 0) omp_set_num_threads(active.threads);
    if (demo->parsed()) return run_demo(demo_opts);
    if (sweep->parsed()) return run_sweep(sweep_opts);
    return run_summarize(sum_opts);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return 2;
  }
}
