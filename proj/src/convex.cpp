#include "specsense/convex.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "specsense/kernels.hpp"
#include "specsense/rng.hpp"

namespace specsense {

namespace {
using Clock = std::chrono::steady_clock;
}

BlockStructure make_blocks(int n_bins, std::vector<Subsection> blocks) {
  std::sort(blocks.begin(), blocks.end(),
            [](const Subsection& a, const Subsection& b) { return a.first < b.first; });
  int cursor = 1;
  for (const Subsection& b : blocks) {
    if (b.first != cursor || b.last < b.first)
      throw std::invalid_argument("blocks must partition {1..n_bins}");
    cursor = b.last + 1;
  }
  if (cursor != n_bins + 1) throw std::invalid_argument("blocks must cover all bins");
  return {n_bins, std::move(blocks)};
}

BlockStructure blocks_from_partition(const CategoryPartition& partition) {
  return make_blocks(partition.n_bins, partition.subsections);
}

std::vector<int> DenseSparseSplit::dense_bins() const {
  std::vector<int> out;
  for (int b = 1; b <= n_bins; ++b)
    if (is_dense[static_cast<size_t>(b)]) out.push_back(b);
  return out;
}

std::vector<int> DenseSparseSplit::sparse_bins() const {
  std::vector<int> out;
  for (int b = 1; b <= n_bins; ++b)
    if (!is_dense[static_cast<size_t>(b)]) out.push_back(b);
  return out;
}

DenseSparseSplit make_split(int n_bins, const std::vector<int>& dense_bins) {
  DenseSparseSplit s;
  s.n_bins = n_bins;
  s.is_dense.assign(static_cast<size_t>(n_bins) + 1, 0);
  for (int b : dense_bins) {
    if (b < 1 || b > n_bins) throw std::invalid_argument("dense bin out of range");
    s.is_dense[static_cast<size_t>(b)] = 1;
  }
  return s;
}

DenseSparseSplit split_from_partition(const CategoryPartition& partition) {
  return make_split(partition.n_bins, partition.category_bins(1));
}

std::vector<double> soft_threshold(std::span<const double> v, double tau) {
  if (tau < 0.0) throw std::invalid_argument("tau must be nonnegative");
  std::vector<double> out(v.size());
  for (size_t i = 0; i < v.size(); ++i) {
    const double a = std::abs(v[i]) - tau;
    out[i] = a > 0.0 ? (v[i] > 0.0 ? a : -a) : 0.0;
  }
  return out;
}

std::vector<double> group_soft_threshold(std::span<const double> v, const BlockStructure& blocks,
                                         double tau) {
  if (tau < 0.0) throw std::invalid_argument("tau must be nonnegative");
  if (static_cast<int>(v.size()) != blocks.n_bins) throw std::invalid_argument("length mismatch");
  std::vector<double> out(v.size(), 0.0);
  for (const Subsection& b : blocks.blocks) {
    double norm2 = 0.0;
    for (int i = b.first; i <= b.last; ++i) norm2 += v[static_cast<size_t>(i - 1)] * v[static_cast<size_t>(i - 1)];
    const double norm = std::sqrt(norm2);
    if (norm <= tau) continue;  // block annihilated (covers norm == 0)
    const double scale = 1.0 - tau / norm;
    for (int i = b.first; i <= b.last; ++i) out[static_cast<size_t>(i - 1)] = scale * v[static_cast<size_t>(i - 1)];
  }
  return out;
}

FistaResult fista(const GradientFn& gradient, const ProxFn& prox, const ObjectiveFn& objective,
                  std::vector<double> x0, const ProxConfig& cfg) {
  if (cfg.step <= 0.0) throw std::invalid_argument("fista needs a positive step");
  if (cfg.rel_tol <= 0.0) throw std::invalid_argument("rel_tol must be positive");

  const size_t n = x0.size();
  FistaResult res;
  std::vector<double> x = std::move(x0);
  std::vector<double> z = x;
  std::vector<double> x_new(n), g(n);
  double theta = 1.0;

  const double obj0 = objective(x);
  const double divergence_cap = 10.0 * std::abs(obj0) + 1e-12;
  double obj_prev = obj0;
  if (cfg.monotone) res.objective_history.push_back(obj0);

  for (int k = 1; k <= cfg.max_iter; ++k) {
    res.iterations = k;
    gradient(z, g);
    for (size_t i = 0; i < n; ++i) x_new[i] = z[i] - cfg.step * g[i];
    prox(x_new, cfg.step);

    if (cfg.monotone) {
      const double obj_new = objective(x_new);
      if (obj_new > obj_prev) {
        // Momentum overshot: restart from the last iterate.
        theta = 1.0;
        gradient(x, g);
        for (size_t i = 0; i < n; ++i) x_new[i] = x[i] - cfg.step * g[i];
        prox(x_new, cfg.step);
        obj_prev = objective(x_new);
      } else {
        obj_prev = obj_new;
      }
      res.objective_history.push_back(obj_prev);
      if (obj_prev > divergence_cap) {
        res.diverged = true;
        res.x = std::move(x);
        return res;
      }
    } else if (k % 25 == 0) {
      const double obj_now = objective(x_new);
      if (obj_now > divergence_cap) {
        res.diverged = true;
        res.x = std::move(x);
        return res;
      }
    }

    double dx2 = 0.0, xn2 = 0.0, restart_dot = 0.0;
    for (size_t i = 0; i < n; ++i) {
      const double d = x_new[i] - x[i];
      dx2 += d * d;
      xn2 += x_new[i] * x_new[i];
      restart_dot += (z[i] - x_new[i]) * d;
    }

    // Adaptive restart: kill the momentum when it points against descent.
    if (restart_dot > 0.0) theta = 1.0;
    const double theta_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
    const double beta = (theta - 1.0) / theta_new;
    for (size_t i = 0; i < n; ++i) z[i] = x_new[i] + beta * (x_new[i] - x[i]);
    std::swap(x, x_new);
    theta = theta_new;

    if (std::sqrt(dx2) <= cfg.rel_tol * std::max(1.0, std::sqrt(xn2))) {
      res.converged = true;
      break;
    }
  }
  res.x = std::move(x);
  return res;
}

double lipschitz_estimate(const MeasurementSystem& sys, int iterations) {
  Rng rng(derive_seed(sys.seed, {0x9142, static_cast<uint64_t>(sys.m)}));
  std::vector<double> v(static_cast<size_t>(sys.n));
  for (double& e : v) e = rng.normal();
  std::vector<double> w(static_cast<size_t>(sys.m)), u(static_cast<size_t>(sys.n));
  double lambda = 1.0;
  const double inv0 = 1.0 / nrm2(v);
  for (double& e : v) e *= inv0;
  for (int it = 0; it < iterations; ++it) {
    matvec_rows(sys.phi_rows, sys.m, sys.n, v, w);
    correlations(sys.phi_cols, sys.m, sys.n, w, u);
    lambda = nrm2(u);
    if (lambda == 0.0) return 1.0;
    const double inv = 1.0 / lambda;
    for (size_t i = 0; i < u.size(); ++i) v[i] = u[i] * inv;
  }
  return lambda;
}

namespace {

struct LeastSquaresPieces {
  const MeasurementSystem& sys;
  const MeasurementVector& y;
  mutable std::vector<double> tmp;  // scratch, length M

  explicit LeastSquaresPieces(const MeasurementSystem& s, const MeasurementVector& yy)
      : sys(s), y(yy), tmp(static_cast<size_t>(s.m)) {}

  void residual_into_tmp(const std::vector<double>& x) const {
    matvec_rows(sys.phi_rows, sys.m, sys.n, x, tmp);
    for (int i = 0; i < sys.m; ++i) tmp[static_cast<size_t>(i)] -= y.values[static_cast<size_t>(i)];
  }

  void gradient(const std::vector<double>& x, std::vector<double>& g) const {
    residual_into_tmp(x);
    correlations(sys.phi_cols, sys.m, sys.n, tmp, g);
  }

  double data_fit(const std::vector<double>& x) const {
    residual_into_tmp(x);
    return 0.5 * dot(tmp, tmp);
  }

  double residual_norm(const std::vector<double>& x) const {
    residual_into_tmp(x);
    return nrm2(tmp);
  }
};

double resolve_step(const MeasurementSystem& sys, const ProxConfig& cfg) {
  if (cfg.step > 0.0) return cfg.step;
  return 1.0 / (1.05 * lipschitz_estimate(sys));
}

SolverResult pack_result(const MeasurementSystem& sys, const LeastSquaresPieces& pieces,
                         FistaResult fr, Clock::time_point start) {
  SolverResult r;
  r.f_hat = std::move(fr.x);
  for (int i = 0; i < sys.n; ++i)
    if (r.f_hat[static_cast<size_t>(i)] != 0.0) r.selected.push_back(i + 1);
  r.residual_norm = pieces.residual_norm(r.f_hat);
  r.iterations = fr.iterations;
  if (!fr.converged) r.flags |= kFlagNotConverged;
  if (fr.diverged) r.flags |= kFlagDiverged;
  r.wall_time_s = std::chrono::duration<double>(Clock::now() - start).count();
  return r;
}

}  // namespace

SolverResult bpdn(const MeasurementSystem& sys, const MeasurementVector& y, double gamma,
                  const ProxConfig& cfg) {
  if (gamma < 0.0) throw std::invalid_argument("gamma must be nonnegative");
  const auto start = Clock::now();
  LeastSquaresPieces pieces(sys, y);
  ProxConfig run = cfg;
  run.step = resolve_step(sys, cfg);

  FistaResult fr = fista(
      [&](const std::vector<double>& x, std::vector<double>& g) { pieces.gradient(x, g); },
      [&](std::vector<double>& v, double step) {
        const double tau = step * gamma;
        if (tau <= 0.0) return;
        for (double& e : v) {
          const double a = std::abs(e) - tau;
          e = a > 0.0 ? (e > 0.0 ? a : -a) : 0.0;
        }
      },
      [&](const std::vector<double>& x) {
        double l1 = 0.0;
        for (double e : x) l1 += std::abs(e);
        return pieces.data_fit(x) + gamma * l1;
      },
      std::vector<double>(static_cast<size_t>(sys.n), 0.0), run);
  return pack_result(sys, pieces, std::move(fr), start);
}

SolverResult modified_bpdn(const MeasurementSystem& sys, const MeasurementVector& y,
                           const DenseSparseSplit& split, double gamma, const ProxConfig& cfg) {
  if (gamma < 0.0) throw std::invalid_argument("gamma must be nonnegative");
  if (split.n_bins != sys.n) throw std::invalid_argument("split size does not match system");
  const auto start = Clock::now();
  LeastSquaresPieces pieces(sys, y);
  ProxConfig run = cfg;
  run.step = resolve_step(sys, cfg);

  FistaResult fr = fista(
      [&](const std::vector<double>& x, std::vector<double>& g) { pieces.gradient(x, g); },
      [&](std::vector<double>& v, double step) {
        const double tau = step * gamma;
        if (tau <= 0.0) return;
        for (int b = 1; b <= split.n_bins; ++b) {
          if (split.is_dense[static_cast<size_t>(b)]) continue;
          double& e = v[static_cast<size_t>(b - 1)];
          const double a = std::abs(e) - tau;
          e = a > 0.0 ? (e > 0.0 ? a : -a) : 0.0;
        }
      },
      [&](const std::vector<double>& x) {
        double l1 = 0.0;
        for (int b = 1; b <= split.n_bins; ++b)
          if (!split.is_dense[static_cast<size_t>(b)]) l1 += std::abs(x[static_cast<size_t>(b - 1)]);
        return pieces.data_fit(x) + gamma * l1;
      },
      std::vector<double>(static_cast<size_t>(sys.n), 0.0), run);
  return pack_result(sys, pieces, std::move(fr), start);
}

SolverResult mndo(const MeasurementSystem& sys, const MeasurementVector& y,
                  const BlockStructure& blocks, double eta, const ProxConfig& cfg) {
  if (eta < 0.0) throw std::invalid_argument("eta must be nonnegative");
  if (blocks.n_bins != sys.n) throw std::invalid_argument("blocks do not match system");
  const auto start = Clock::now();
  LeastSquaresPieces pieces(sys, y);

  const double y_norm = nrm2(y.values);
  if (eta >= y_norm) {
    // Zero is feasible and has the minimum possible group norm.
    SolverResult r;
    r.f_hat.assign(static_cast<size_t>(sys.n), 0.0);
    r.residual_norm = y_norm;
    r.wall_time_s = std::chrono::duration<double>(Clock::now() - start).count();
    return r;
  }

  ProxConfig run = cfg;
  run.step = resolve_step(sys, cfg);

  auto solve_penalized = [&](double lambda, std::vector<double> x0) {
    return fista(
        [&](const std::vector<double>& x, std::vector<double>& g) { pieces.gradient(x, g); },
        [&](std::vector<double>& v, double step) {
          v = group_soft_threshold(v, blocks, step * lambda);
        },
        [&](const std::vector<double>& x) {
          double gn = 0.0;
          for (const Subsection& b : blocks.blocks) {
            double n2 = 0.0;
            for (int i = b.first; i <= b.last; ++i)
              n2 += x[static_cast<size_t>(i - 1)] * x[static_cast<size_t>(i - 1)];
            gn += std::sqrt(n2);
          }
          return pieces.data_fit(x) + lambda * gn;
        },
        std::move(x0), run);
  };

  // lambda at or above the largest block correlation norm keeps the solution
  // at zero, which brackets the target residual from above.
  std::vector<double> corr(static_cast<size_t>(sys.n));
  correlations(sys.phi_cols, sys.m, sys.n, y.values, corr);
  double lambda_hi = 0.0;
  for (const Subsection& b : blocks.blocks) {
    double n2 = 0.0;
    for (int i = b.first; i <= b.last; ++i) n2 += corr[static_cast<size_t>(i - 1)] * corr[static_cast<size_t>(i - 1)];
    lambda_hi = std::max(lambda_hi, std::sqrt(n2));
  }
  double lambda_lo = 0.0;

  // Bisection on lambda. Early bracketing steps run on a reduced iteration
  // budget; once a candidate lands near the band (or the bracket is tight)
  // the full budget is spent so the residual read-out is trustworthy.
  const int cheap_cap = std::min(700, cfg.max_iter);
  std::vector<double> warm(static_cast<size_t>(sys.n), 0.0);
  std::vector<double> best_feasible_x;  // largest lambda with residual <= eta
  double best_feasible_lambda = -1.0;
  std::vector<double> closest_x;  // fallback: smallest residual seen overall
  double closest_r = -1.0;
  int total_iterations = 0;
  unsigned flags = 0;
  bool in_band = false;
  bool refine = false;

  for (int outer = 0; outer < 30; ++outer) {
    const double lambda = 0.5 * (lambda_lo + lambda_hi);
    run.max_iter = refine ? cfg.max_iter : cheap_cap;
    FistaResult fr = solve_penalized(lambda, warm);
    total_iterations += fr.iterations;
    if (fr.diverged) flags |= kFlagDiverged;
    warm = fr.x;
    const double r = pieces.residual_norm(fr.x);
    if (closest_r < 0.0 || r < closest_r) {
      closest_r = r;
      closest_x = fr.x;
    }
    if (r <= eta && lambda > best_feasible_lambda) {
      best_feasible_lambda = lambda;
      best_feasible_x = fr.x;
    }
    if (r > eta) {
      lambda_hi = lambda;
    } else if (r < 0.95 * eta) {
      lambda_lo = lambda;
    } else if (refine || fr.converged) {
      in_band = true;
      break;
    } else {
      // In the band on a truncated solve: re-run the same lambda fully
      // (brackets unchanged, so the next midpoint is this lambda again).
      refine = true;
      continue;
    }
    if (outer >= 12) refine = true;
  }

  std::vector<double> chosen;
  if (in_band) {
    chosen = warm;
  } else {
    // Re-polish the best feasible lambda with the full budget, then decide.
    run.max_iter = cfg.max_iter;
    if (best_feasible_lambda >= 0.0) {
      FistaResult fr = solve_penalized(best_feasible_lambda, best_feasible_x);
      total_iterations += fr.iterations;
      chosen = std::move(fr.x);
      const double r = pieces.residual_norm(chosen);
      if (r >= 0.95 * eta && r <= eta)
        in_band = true;
      else if (closest_r < 0.0 || std::abs(r - eta) < std::abs(closest_r - eta))
        closest_x = chosen;
    }
    if (!in_band) {
      flags |= kFlagBandMissed;
      if (chosen.empty()) chosen = closest_x.empty() ? warm : closest_x;
    }
  }

  FistaResult packed;
  packed.x = std::move(chosen);
  packed.iterations = total_iterations;
  packed.converged = true;
  SolverResult r = pack_result(sys, pieces, std::move(packed), start);
  r.flags |= flags;
  return r;
}

}  // namespace specsense
