#include "specsense/harness.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include <json.hpp>

#include "specsense/kernels.hpp"
#include "specsense/rng.hpp"

namespace specsense {

namespace {

constexpr uint64_t kRoleSpectrum = 1;
constexpr uint64_t kRolePhi = 2;
constexpr uint64_t kRoleNoise = 3;

std::string fmt(double v) {
  char buf[40];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

std::string fmt(int v) {
  char buf[16];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{}) throw std::invalid_argument("bad number in CSV: " + s);
  return v;
}

int parse_int(const std::string& s) {
  int v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{}) throw std::invalid_argument("bad integer in CSV: " + s);
  return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  size_t pos = 0;
  for (;;) {
    const size_t comma = line.find(',', pos);
    if (comma == std::string::npos) {
      out.push_back(line.substr(pos));
      break;
    }
    out.push_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
  return out;
}

// (has-snr, value) sort key so noiseless cells come first.
std::tuple<int, int, int, double> cell_key(Solver s, int m, const std::optional<double>& snr) {
  return {static_cast<int>(s), m, snr.has_value() ? 1 : 0, snr.value_or(0.0)};
}

bool is_convex(Solver s) {
  return s == Solver::kBpdn || s == Solver::kMndo || s == Solver::kModifiedBpdn;
}

SolverOverrides overrides_for(const ExperimentConfig& config, Solver s) {
  const auto it = config.solver_params.find(s);
  return it == config.solver_params.end() ? SolverOverrides{} : it->second;
}

}  // namespace

std::string solver_name(Solver s) {
  switch (s) {
    case Solver::kOmp: return "omp";
    case Solver::kModifiedOmp: return "modified_omp";
    case Solver::kBpdn: return "bpdn";
    case Solver::kMndo: return "mndo";
    case Solver::kModifiedBpdn: return "modified_bpdn";
  }
  return "unknown";
}

std::optional<Solver> solver_from_name(const std::string& name) {
  for (Solver s : all_solvers()) {
    if (solver_name(s) == name) return s;
  }
  return std::nullopt;
}

const std::vector<Solver>& all_solvers() {
  static const std::vector<Solver> kAll = {Solver::kOmp, Solver::kModifiedOmp, Solver::kBpdn,
                                           Solver::kMndo, Solver::kModifiedBpdn};
  return kAll;
}

Scenario load_scenario(const std::string& name_or_path) {
  if (name_or_path == "paper") {
    Scenario sc;
    sc.partition = paper_scenario();
    sc.rule.s1_fill = 1.0;
    sc.rule.s2_fill = 0.10;
    sc.rule.s3_fill = 0.02;
    sc.rule.amplitude = {AmplitudeRule::Kind::kConstant, 1.0, 1.0};
    return sc;
  }
  std::ifstream in(name_or_path);
  if (!in) throw std::invalid_argument("cannot open scenario file: " + name_or_path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw std::invalid_argument("scenario JSON parse error: " + std::string(e.what()));
  }

  Scenario sc;
  try {
    const int n_bins = j.at("n_bins").get<int>();
    const auto boundaries = j.at("boundaries").get<std::vector<int>>();
    const auto categories = j.at("categories").get<std::vector<int>>();
    sc.partition = build_partition(n_bins, boundaries, categories);
    if (j.contains("occupancy")) {
      const auto& occ = j.at("occupancy");
      sc.rule.s1_fill = occ.value("s1", 1.0);
      sc.rule.s2_fill = occ.value("s2", 0.0);
      sc.rule.s3_fill = occ.value("s3", 0.0);
    }
    if (j.contains("amplitude")) {
      const auto& amp = j.at("amplitude");
      const std::string kind = amp.value("kind", "constant");
      if (kind == "constant") {
        const double v = amp.value("low", 1.0);
        sc.rule.amplitude = {AmplitudeRule::Kind::kConstant, v, v};
      } else if (kind == "uniform") {
        sc.rule.amplitude = {AmplitudeRule::Kind::kUniform, amp.value("low", 0.5), amp.value("high", 1.5)};
      } else {
        throw std::invalid_argument("amplitude kind must be constant or uniform");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("scenario JSON field error: " + std::string(e.what()));
  }
  return sc;
}

TrialInputs make_trial_inputs(const Scenario& scenario, int m, std::optional<double> snr_db,
                              int trial, const ExperimentConfig& config, bool need_step) {
  TrialInputs in;
  const uint64_t t = static_cast<uint64_t>(trial);
  in.truth = generate_spectrum(scenario.partition, scenario.rule,
                               derive_seed(config.seed, {kRoleSpectrum, t}));
  const uint64_t phi_trial = config.fixed_phi ? 0 : t;
  in.system = gaussian_system(m, scenario.partition.n_bins,
                              derive_seed(config.seed, {kRolePhi, phi_trial, static_cast<uint64_t>(m)}));
  in.y = measure(in.system, in.truth);
  if (snr_db) {
    const uint64_t snr_bits = std::bit_cast<uint64_t>(*snr_db);
    in.y = add_awgn(in.y, *snr_db, in.system, in.truth,
                    derive_seed(config.seed, {kRoleNoise, t, static_cast<uint64_t>(m), snr_bits}));
    in.noise_sigma = in.y.noise_sigma;
  }
  if (need_step) in.fista_step = 1.0 / (1.05 * lipschitz_estimate(in.system));
  return in;
}

SolverResult run_solver(Solver solver, const TrialInputs& inputs, const Scenario& scenario,
                        const ExperimentConfig& config) {
  const SolverOverrides ov = overrides_for(config, solver);
  const MeasurementSystem& sys = inputs.system;
  const bool noiseless = inputs.noise_sigma == 0.0;
  const double y_norm = nrm2(inputs.y.values);

  if (solver == Solver::kOmp || solver == Solver::kModifiedOmp) {
    const int max_iter = ov.max_iter.value_or(sys.m / 2);
    // A fixed floor plus (for noisy runs) the noise-level stop inside the
    // solver; an explicit --eta override replaces both.
    const double eta = ov.eta.value_or(1e-6 * y_norm);
    const double sigma = ov.eta ? 0.0 : (noiseless ? 0.0 : inputs.noise_sigma);
    if (solver == Solver::kOmp) return omp_solve(sys, inputs.y, max_iter, eta, sigma);
    return modified_omp_solve(sys, inputs.y, scenario.partition, max_iter, eta, sigma);
  }

  ProxConfig cfg;
  cfg.max_iter = ov.max_iter.value_or(5000);
  cfg.rel_tol = ov.rel_tol.value_or(1e-8);
  cfg.step = inputs.fista_step;

  if (solver == Solver::kMndo) {
    const double eta = ov.eta.value_or(
        noiseless ? 1e-4 * y_norm
                  : inputs.noise_sigma * std::sqrt(sys.m + 2.0 * std::sqrt(2.0 * sys.m)));
    return mndo(sys, inputs.y, blocks_from_partition(scenario.partition), eta, cfg);
  }

  double gamma;
  if (ov.gamma) {
    gamma = *ov.gamma;
  } else if (noiseless) {
    std::vector<double> corr(static_cast<size_t>(sys.n));
    correlations(sys.phi_cols, sys.m, sys.n, inputs.y.values, corr);
    double cmax = 0.0;
    for (double c : corr) cmax = std::max(cmax, std::abs(c));
    gamma = 1e-4 * cmax;
  } else {
    gamma = inputs.noise_sigma * std::sqrt(2.0 * std::log(static_cast<double>(sys.n)));
  }
  if (solver == Solver::kBpdn) return bpdn(sys, inputs.y, gamma, cfg);
  return modified_bpdn(sys, inputs.y, split_from_partition(scenario.partition), gamma, cfg);
}

DemoResult run_single_demo(const ExperimentConfig& config, Solver solver, int m,
                           std::optional<double> snr_db) {
  const Scenario scenario = load_scenario(config.scenario);
  if (m <= 0 || m >= scenario.partition.n_bins)
    throw std::invalid_argument("m must satisfy 0 < m < n_bins");
  const TrialInputs inputs = make_trial_inputs(scenario, m, snr_db, 0, config, is_convex(solver));
  DemoResult demo;
  demo.truth = inputs.truth;
  demo.result = run_solver(solver, inputs, scenario, config);
  if (!config.timing) demo.result.wall_time_s = 0.0;
  demo.mse = normalized_mse(std::span<const double>(demo.result.f_hat),
                            std::span<const double>(inputs.truth.values));
  return demo;
}

std::vector<TrialRecord> run_monte_carlo(const ExperimentConfig& config) {
  const Scenario scenario = load_scenario(config.scenario);
  if (config.trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (config.solvers.empty()) throw std::invalid_argument("no solvers selected");
  if (config.m_values.empty()) throw std::invalid_argument("no measurement counts selected");
  if (config.snr_db_values.empty()) throw std::invalid_argument("no SNR values selected");
  for (int m : config.m_values) {
    if (m <= 0 || m >= scenario.partition.n_bins)
      throw std::invalid_argument("every m must satisfy 0 < m < n_bins");
  }

  // Canonical cell order regardless of how the request was written.
  std::vector<Solver> solvers = config.solvers;
  std::sort(solvers.begin(), solvers.end());
  solvers.erase(std::unique(solvers.begin(), solvers.end()), solvers.end());
  std::vector<int> ms = config.m_values;
  std::sort(ms.begin(), ms.end());
  ms.erase(std::unique(ms.begin(), ms.end()), ms.end());
  std::vector<std::optional<double>> snrs = config.snr_db_values;
  std::sort(snrs.begin(), snrs.end(), [](const auto& a, const auto& b) {
    if (a.has_value() != b.has_value()) return !a.has_value();
    return a.value_or(0.0) < b.value_or(0.0);
  });
  snrs.erase(std::unique(snrs.begin(), snrs.end()), snrs.end());

  const int n_solvers = static_cast<int>(solvers.size());
  const int n_ms = static_cast<int>(ms.size());
  const int n_snrs = static_cast<int>(snrs.size());
  const int trials = config.trials;
  const long n_items = static_cast<long>(n_ms) * n_snrs * trials;

  bool need_step = false;
  for (Solver s : solvers) need_step = need_step || is_convex(s);

  std::vector<TrialRecord> records(static_cast<size_t>(n_solvers) * n_ms * n_snrs * trials);

#pragma omp parallel for schedule(dynamic)
  for (long item = 0; item < n_items; ++item) {
    const int mi = static_cast<int>(item / (static_cast<long>(n_snrs) * trials));
    const int qi = static_cast<int>((item / trials) % n_snrs);
    const int t = static_cast<int>(item % trials);

    TrialInputs inputs;
    bool inputs_ok = true;
    std::string input_error;
    try {
      inputs = make_trial_inputs(scenario, ms[static_cast<size_t>(mi)], snrs[static_cast<size_t>(qi)], t,
                                 config, need_step);
    } catch (const std::exception&) {
      inputs_ok = false;
      input_error = "error";
    }

    for (int si = 0; si < n_solvers; ++si) {
      const size_t slot =
          ((static_cast<size_t>(si) * n_ms + mi) * n_snrs + qi) * static_cast<size_t>(trials) + t;
      TrialRecord& rec = records[slot];
      rec.solver = solvers[static_cast<size_t>(si)];
      rec.m = ms[static_cast<size_t>(mi)];
      rec.snr_db = snrs[static_cast<size_t>(qi)];
      rec.trial = t;
      if (!inputs_ok) {
        rec.mse = std::numeric_limits<double>::quiet_NaN();
        rec.flags = input_error;
        continue;
      }
      try {
        const SolverResult res = run_solver(rec.solver, inputs, scenario, config);
        rec.mse = normalized_mse(std::span<const double>(res.f_hat),
                                 std::span<const double>(inputs.truth.values));
        rec.iterations = res.iterations;
        rec.wall_time_s = config.timing ? res.wall_time_s : 0.0;
        rec.flags = flags_to_string(res.flags);
      } catch (const std::exception&) {
        rec.mse = std::numeric_limits<double>::quiet_NaN();
        rec.flags = "error";
      }
    }
  }
  return records;
}

std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& records) {
  if (records.empty()) throw std::invalid_argument("summarize needs at least one record");
  std::map<std::tuple<int, int, int, double>, std::vector<const TrialRecord*>> cells;
  for (const TrialRecord& r : records) cells[cell_key(r.solver, r.m, r.snr_db)].push_back(&r);

  std::vector<SummaryRow> rows;
  rows.reserve(cells.size());
  for (const auto& [key, recs] : cells) {
    SummaryRow row;
    row.solver = recs.front()->solver;
    row.m = recs.front()->m;
    row.snr_db = recs.front()->snr_db;
    row.trials = static_cast<int>(recs.size());
    std::vector<double> mses;
    mses.reserve(recs.size());
    double time_sum = 0.0;
    for (const TrialRecord* r : recs) {
      mses.push_back(r->mse);
      time_sum += r->wall_time_s;
    }
    double sum = 0.0;
    for (double v : mses) sum += v;
    row.mean_mse = sum / static_cast<double>(mses.size());
    double sq = 0.0;
    for (double v : mses) sq += (v - row.mean_mse) * (v - row.mean_mse);
    row.std_mse = std::sqrt(sq / static_cast<double>(mses.size()));
    std::sort(mses.begin(), mses.end());
    const size_t n = mses.size();
    row.median_mse = n % 2 == 1 ? mses[n / 2] : 0.5 * (mses[n / 2 - 1] + mses[n / 2]);
    row.mean_time_s = time_sum / static_cast<double>(n);
    rows.push_back(row);
  }
  return rows;
}

void write_records_csv(const std::vector<TrialRecord>& records, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "solver,m,snr_db,trial,mse,iterations,wall_time_s,flags\n";
  for (const TrialRecord& r : records) {
    out << solver_name(r.solver) << ',' << fmt(r.m) << ','
        << (r.snr_db ? fmt(*r.snr_db) : std::string()) << ',' << fmt(r.trial) << ',' << fmt(r.mse)
        << ',' << fmt(r.iterations) << ',' << fmt(r.wall_time_s) << ',' << r.flags << '\n';
  }
}

std::vector<TrialRecord> read_records_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string line;
  if (!std::getline(in, line) || line != "solver,m,snr_db,trial,mse,iterations,wall_time_s,flags")
    throw std::runtime_error("unrecognized records header in " + path);
  std::vector<TrialRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 8) throw std::runtime_error("malformed records row: " + line);
    TrialRecord r;
    const auto solver = solver_from_name(f[0]);
    if (!solver) throw std::runtime_error("unknown solver in records: " + f[0]);
    r.solver = *solver;
    r.m = parse_int(f[1]);
    if (!f[2].empty()) r.snr_db = parse_double(f[2]);
    r.trial = parse_int(f[3]);
    r.mse = parse_double(f[4]);
    r.iterations = parse_int(f[5]);
    r.wall_time_s = parse_double(f[6]);
    r.flags = f[7];
    records.push_back(std::move(r));
  }
  return records;
}

void write_summary_csv(const std::vector<SummaryRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "solver,m,snr_db,mean_mse,median_mse,std_mse,mean_time_s,trials\n";
  for (const SummaryRow& r : rows) {
    out << solver_name(r.solver) << ',' << fmt(r.m) << ','
        << (r.snr_db ? fmt(*r.snr_db) : std::string()) << ',' << fmt(r.mean_mse) << ','
        << fmt(r.median_mse) << ',' << fmt(r.std_mse) << ',' << fmt(r.mean_time_s) << ','
        << fmt(r.trials) << '\n';
  }
}

void write_spectrum_dat(const std::vector<double>& values, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "# bin amplitude\n";
  for (size_t i = 0; i < values.size(); ++i) {
    out << fmt(static_cast<int>(i) + 1) << ' ' << fmt(values[i]) << '\n';
  }
}

void write_residual_history_dat(const SolverResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "# step residual_norm\n";
  if (result.residual_norm_history.empty()) {
    out << "0 " << fmt(result.residual_norm) << '\n';
    return;
  }
  for (size_t i = 0; i < result.residual_norm_history.size(); ++i) {
    out << fmt(static_cast<int>(i)) << ' ' << fmt(result.residual_norm_history[i]) << '\n';
  }
}

void write_mse_vs_snr_dat(const std::vector<SummaryRow>& rows, int m, const std::string& path) {
  std::vector<Solver> solvers;
  std::vector<double> snrs;
  for (const SummaryRow& r : rows) {
    if (r.m != m || !r.snr_db) continue;
    if (std::find(solvers.begin(), solvers.end(), r.solver) == solvers.end()) solvers.push_back(r.solver);
    if (std::find(snrs.begin(), snrs.end(), *r.snr_db) == snrs.end()) snrs.push_back(*r.snr_db);
  }
  std::sort(solvers.begin(), solvers.end());
  std::sort(snrs.begin(), snrs.end());

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "# snr_db";
  for (Solver s : solvers) out << ' ' << solver_name(s);
  out << '\n';
  for (double snr : snrs) {
    out << fmt(snr);
    for (Solver s : solvers) {
      double mean = std::numeric_limits<double>::quiet_NaN();
      for (const SummaryRow& r : rows) {
        if (r.solver == s && r.m == m && r.snr_db && *r.snr_db == snr) mean = r.mean_mse;
      }
      out << ' ' << fmt(mean);
    }
    out << '\n';
  }
}

}  // namespace specsense
