#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "specsense/convex.hpp"
#include "specsense/greedy.hpp"
#include "specsense/sensing.hpp"
#include "specsense/solver_result.hpp"
#include "specsense/spectrum.hpp"

namespace specsense {

// Configuration-driven Monte Carlo experiments: seeded spectrum realizations,
// per-trial measurement systems, solver runs, CSV summaries and plot data.
// Every output is a pure function of the configuration; per-trial seeds are
// derived from the master seed and the trial index, so runs are reproducible
// and growing `trials` only appends records.

enum class Solver { kOmp, kModifiedOmp, kBpdn, kMndo, kModifiedBpdn };

std::string solver_name(Solver s);
std::optional<Solver> solver_from_name(const std::string& name);
const std::vector<Solver>& all_solvers();

struct Scenario {
  CategoryPartition partition;
  OccupancyRule rule;
};

// "paper" gives the built-in 1000-bin benchmark scenario (category fills
// 1.0 / 0.10 / 0.02, unit amplitudes); anything else is read as a JSON file
// with fields n_bins, boundaries, categories, occupancy{s1,s2,s3},
// amplitude{kind,low,high}.
Scenario load_scenario(const std::string& name_or_path);

struct SolverOverrides {
  std::optional<double> gamma;
  std::optional<double> eta;
  std::optional<int> max_iter;
  std::optional<double> rel_tol;
};

struct ExperimentConfig {
  std::string scenario = "paper";
  std::vector<Solver> solvers = {Solver::kModifiedOmp, Solver::kMndo, Solver::kModifiedBpdn};
  std::vector<int> m_values = {250};
  std::vector<std::optional<double>> snr_db_values = {std::nullopt};  // nullopt = noiseless
  int trials = 100;
  uint64_t seed = 1;
  bool fixed_phi = false;  // share one matrix per M instead of per-trial draws
  bool timing = false;     // record wall times (off keeps records byte-reproducible)
  std::map<Solver, SolverOverrides> solver_params;
};

struct TrialRecord {
  Solver solver = Solver::kOmp;
  int m = 0;
  std::optional<double> snr_db;
  int trial = 0;
  double mse = 0.0;
  int iterations = 0;
  double wall_time_s = 0.0;
  std::string flags;
};

struct SummaryRow {
  Solver solver = Solver::kOmp;
  int m = 0;
  std::optional<double> snr_db;
  double mean_mse = 0.0;
  double median_mse = 0.0;
  double std_mse = 0.0;
  double mean_time_s = 0.0;
  int trials = 0;
};

// Inputs shared by every solver within one (m, snr, trial) cell.
struct TrialInputs {
  SpectrumVector truth;
  MeasurementSystem system;
  MeasurementVector y;
  double noise_sigma = 0.0;
  double fista_step = 0.0;  // 1/(1.05 L), filled when a convex solver will run
};

TrialInputs make_trial_inputs(const Scenario& scenario, int m, std::optional<double> snr_db,
                              int trial, const ExperimentConfig& config, bool need_step);

// Runs one solver with the documented default parameters (overridable):
//   greedy:  max_iter = M/2, eta = 1e-6 ||y||; noisy runs additionally stop
//            at the noise floor for the remaining degrees of freedom
//   bpdn:    gamma = 1e-4 ||Phi^T y||_inf noiseless, sigma sqrt(2 ln N) noisy
//   mndo:    eta = 1e-4 ||y|| noiseless, sigma sqrt(M + 2 sqrt(2M)) noisy
SolverResult run_solver(Solver solver, const TrialInputs& inputs, const Scenario& scenario,
                        const ExperimentConfig& config);

struct DemoResult {
  SpectrumVector truth;
  SolverResult result;
  double mse = 0.0;
};

// One seeded realization (trial 0 of the Monte Carlo derivation).
DemoResult run_single_demo(const ExperimentConfig& config, Solver solver, int m,
                           std::optional<double> snr_db);

// All (solver, m, snr, trial) cells, in canonical order (solver, then m, then
// snr with noiseless first, then trial). Trials may execute concurrently; the
// output order is always the same.
std::vector<TrialRecord> run_monte_carlo(const ExperimentConfig& config);

// Per-cell mean/median/std of the MSE plus mean wall time.
std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& records);

// CSV and plot-data files. Floating-point fields use shortest round-trip
// formatting, so identical records give byte-identical files.
void write_records_csv(const std::vector<TrialRecord>& records, const std::string& path);
std::vector<TrialRecord> read_records_csv(const std::string& path);
void write_summary_csv(const std::vector<SummaryRow>& rows, const std::string& path);
void write_spectrum_dat(const std::vector<double>& values, const std::string& path);
void write_residual_history_dat(const SolverResult& result, const std::string& path);
// Mean MSE vs SNR for one M, one column per solver present in `rows`.
void write_mse_vs_snr_dat(const std::vector<SummaryRow>& rows, int m, const std::string& path);

}  // namespace specsense
