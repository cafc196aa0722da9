// Compares the OpenMP kernels against the serial reference implementations
// and times a full solve of each algorithm on the built-in scenario.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <omp.h>

#include "specsense/convex.hpp"
#include "specsense/greedy.hpp"
#include "specsense/harness.hpp"
#include "specsense/kernels.hpp"
#include "specsense/sensing.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <typename Fn>
double time_best_of(int reps, Fn&& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = Clock::now();
    fn();
    best = std::min(best, seconds_since(t0));
  }
  return best;
}

void bench_kernels(int m, int n) {
  const auto sys = specsense::gaussian_system(m, n, 7);
  std::vector<double> x(static_cast<size_t>(n), 1.0);
  std::vector<double> r(static_cast<size_t>(m), 0.5);
  std::vector<double> out_m(static_cast<size_t>(m));
  std::vector<double> out_n(static_cast<size_t>(n));
  const double gflop = 2.0 * m * n * 1e-9;
  const int reps = 50;

  const double t_mv = time_best_of(reps, [&] { specsense::matvec_rows(sys.phi_rows, m, n, x, out_m); });
  const double t_mv_ref =
      time_best_of(reps, [&] { specsense::ref::matvec_rows(sys.phi_rows, m, n, x, out_m); });
  const double t_corr = time_best_of(reps, [&] { specsense::correlations(sys.phi_cols, m, n, r, out_n); });
  const double t_corr_ref =
      time_best_of(reps, [&] { specsense::ref::correlations(sys.phi_cols, m, n, r, out_n); });

  std::printf("%-22s %4dx%-5d  omp %8.3f GF/s   serial %8.3f GF/s   speedup %.2fx\n",
              "matvec (Phi x)", m, n, gflop / t_mv, gflop / t_mv_ref, t_mv_ref / t_mv);
  std::printf("%-22s %4dx%-5d  omp %8.3f GF/s   serial %8.3f GF/s   speedup %.2fx\n",
              "correlations (Phi^T r)", m, n, gflop / t_corr, gflop / t_corr_ref, t_corr_ref / t_corr);
}

void bench_solvers() {
  specsense::ExperimentConfig cfg;
  cfg.solvers = {specsense::Solver::kModifiedOmp, specsense::Solver::kMndo,
                 specsense::Solver::kModifiedBpdn, specsense::Solver::kOmp, specsense::Solver::kBpdn};
  cfg.timing = true;
  for (specsense::Solver s : cfg.solvers) {
    const auto demo = specsense::run_single_demo(cfg, s, 250, std::nullopt);
    std::printf("%-14s M=250 noiseless  mse=%-12.4g iters=%-5d %.4f s\n",
                specsense::solver_name(s).c_str(), demo.mse, demo.result.iterations,
                demo.result.wall_time_s);
  }
}

}  // namespace

int main(int argc, char** argv) {
  int threads = 0;
  if (argc > 1) threads = std::stoi(argv[1]);
  if (threads > 0) omp_set_num_threads(threads);
  std::printf("threads: %d\n", omp_get_max_threads());

  bench_kernels(250, 1000);
  bench_kernels(500, 1000);
  bench_kernels(500, 4000);
  std::printf("\nfull solves (built-in scenario):\n");
  bench_solvers();
  return 0;
}
