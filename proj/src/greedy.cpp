#include "specsense/greedy.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "specsense/kernels.hpp"

namespace specsense {

namespace {

using Clock = std::chrono::steady_clock;

struct GreedyLoop {
  const MeasurementSystem& sys;
  const MeasurementVector& y;
  IncrementalQR qr;
  GreedyState state;
  std::vector<char> in_set;  // 1-based membership mask

  explicit GreedyLoop(const MeasurementSystem& s, const MeasurementVector& yy)
      : sys(s), y(yy), qr(s.m), in_set(static_cast<size_t>(s.n) + 1, 0) {
    state.residual = y.values;
  }

  // With a known noise level, a correlation below the universal threshold
  // sigma sqrt(2 ln N) is indistinguishable from noise: there is nothing
  // detectable left to select.
  double correlation_floor(double noise_sigma) const {
    if (noise_sigma <= 0.0) return 0.0;
    return noise_sigma * std::sqrt(2.0 * std::log(static_cast<double>(sys.n)));
  }

  // Appends bin (1-based) to the set and the factorization.
  void add_bin(int bin) {
    state.lambda_set.push_back(bin);
    in_set[static_cast<size_t>(bin)] = 1;
    qr.append(sys.column(bin - 1));
  }

  // Least-squares refit over the current set and residual update
  // res = y - Theta_t x_t.
  void refit(std::vector<double>& x) {
    x.assign(state.lambda_set.size(), 0.0);
    qr.solve(y.values, x);
    state.residual = y.values;
    for (size_t k = 0; k < state.lambda_set.size(); ++k) {
      if (x[k] != 0.0) axpy(-x[k], sys.column(state.lambda_set[k] - 1), state.residual);
    }
    state.residual_norm_history.push_back(nrm2(state.residual));
  }

  SolverResult finish(const std::vector<double>& x, unsigned flags, Clock::time_point start) const {
    SolverResult r;
    r.f_hat.assign(static_cast<size_t>(sys.n), 0.0);
    for (size_t k = 0; k < state.lambda_set.size(); ++k)
      r.f_hat[static_cast<size_t>(state.lambda_set[k] - 1)] = x[k];
    r.selected = state.lambda_set;
    r.residual_norm =
        state.residual_norm_history.empty() ? nrm2(y.values) : state.residual_norm_history.back();
    r.iterations = state.iteration;
    r.residual_norm_history = state.residual_norm_history;
    r.flags = flags | (qr.degenerate() ? kFlagDegenerate : 0u);
    r.wall_time_s = std::chrono::duration<double>(Clock::now() - start).count();
    return r;
  }
};

struct Pick {
  int index = -1;  // 0-based column
  double corr_abs = 0.0;
};

std::optional<Pick> best_correlation(std::span<const double> residual, const MeasurementSystem& sys,
                                     const std::vector<char>& excluded) {
  std::vector<double> corr(static_cast<size_t>(sys.n));
  correlations(sys.phi_cols, sys.m, sys.n, residual, corr);
  Pick best;
  for (int j = 0; j < sys.n; ++j) {
    if (excluded[static_cast<size_t>(j) + 1]) continue;
    const double a = std::abs(corr[static_cast<size_t>(j)]);
    if (a > best.corr_abs) {
      best.corr_abs = a;
      best.index = j;
    }
  }
  if (best.index < 0 || best.corr_abs == 0.0) return std::nullopt;
  return best;
}

}  // namespace

std::optional<int> select_index(std::span<const double> residual, const MeasurementSystem& sys,
                                const std::vector<char>& excluded) {
  const auto pick = best_correlation(residual, sys, excluded);
  if (!pick) return std::nullopt;
  return pick->index;
}

SolverResult omp_solve(const MeasurementSystem& sys, const MeasurementVector& y, int max_iter,
                       double eta, double noise_sigma) {
  if (static_cast<int>(y.values.size()) != sys.m) throw std::invalid_argument("measurement length mismatch");
  if (max_iter < 0 || max_iter > sys.m) throw std::invalid_argument("max_iter must be in [0, M]");
  if (eta < 0.0) throw std::invalid_argument("eta must be nonnegative");

  const auto start = Clock::now();
  GreedyLoop loop(sys, y);
  std::vector<double> x;
  unsigned flags = 0;
  const double corr_floor = loop.correlation_floor(noise_sigma);

  if (nrm2(loop.state.residual) > eta) {
    bool clean_stop = false;
    while (loop.state.iteration < max_iter) {
      const auto pick = best_correlation(loop.state.residual, sys, loop.in_set);
      if (!pick) {
        flags |= kFlagStall;
        break;
      }
      if (corr_floor > 0.0 && pick->corr_abs <= corr_floor) {
        clean_stop = true;  // nothing detectable above the noise remains
        break;
      }
      ++loop.state.iteration;
      loop.add_bin(pick->index + 1);
      loop.refit(x);
      if (loop.state.residual_norm_history.back() <= eta) {
        clean_stop = true;
        break;
      }
    }
    if (!clean_stop && !(flags & kFlagStall)) flags |= kFlagNotConverged;
  }
  return loop.finish(x, flags, start);
}

SolverResult modified_omp_solve(const MeasurementSystem& sys, const MeasurementVector& y,
                                const CategoryPartition& partition, int max_iter, double eta,
                                double noise_sigma) {
  if (static_cast<int>(y.values.size()) != sys.m) throw std::invalid_argument("measurement length mismatch");
  if (partition.n_bins != sys.n) throw std::invalid_argument("partition size does not match system");
  if (max_iter < 0 || max_iter > sys.m) throw std::invalid_argument("max_iter must be in [0, M]");
  if (eta < 0.0) throw std::invalid_argument("eta must be nonnegative");

  const std::vector<int> s1 = partition.category_bins(1);
  if (static_cast<int>(s1.size()) > sys.m)
    throw std::invalid_argument("category-1 set larger than M: initial fit underdetermined");

  const auto start = Clock::now();
  GreedyLoop loop(sys, y);
  std::vector<double> x;
  unsigned flags = 0;
  const double corr_floor = loop.correlation_floor(noise_sigma);

  // Category-1 bins are known occupied: fit them before the first selection.
  for (int bin : s1) loop.add_bin(bin);
  if (!s1.empty()) loop.refit(x);

  const double initial_norm = loop.state.residual_norm_history.empty()
                                  ? nrm2(loop.state.residual)
                                  : loop.state.residual_norm_history.back();
  if (initial_norm > eta) {
    bool clean_stop = false;
    while (loop.state.iteration < max_iter) {
      const auto pick = best_correlation(loop.state.residual, sys, loop.in_set);
      if (!pick) {
        flags |= kFlagStall;
        break;
      }
      if (corr_floor > 0.0 && pick->corr_abs <= corr_floor) {
        clean_stop = true;
        break;
      }
      const int bin = pick->index + 1;
      const int sub = partition.subsection_of(bin);
      std::vector<int> to_add;
      if (partition.category_of[static_cast<size_t>(sub)] == 2) {
        const Subsection& u = partition.subsections[static_cast<size_t>(sub)];
        for (int b = u.first; b <= u.last; ++b) {
          if (!loop.in_set[static_cast<size_t>(b)]) to_add.push_back(b);
        }
      } else {
        to_add.push_back(bin);
      }
      if (static_cast<int>(loop.state.lambda_set.size() + to_add.size()) > sys.m) {
        flags |= kFlagCapacityStop;
        break;
      }
      ++loop.state.iteration;
      for (int b : to_add) loop.add_bin(b);
      loop.refit(x);
      if (loop.state.residual_norm_history.back() <= eta) {
        clean_stop = true;
        break;
      }
    }
    if (!clean_stop && !(flags & (kFlagStall | kFlagCapacityStop))) flags |= kFlagNotConverged;
  }
  return loop.finish(x, flags, start);
}

}  // namespace specsense
