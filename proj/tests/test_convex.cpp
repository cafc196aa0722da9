#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "oracles.hpp"
#include "specsense/convex.hpp"
#include "specsense/kernels.hpp"
#include "specsense/least_squares.hpp"
#include "specsense/rng.hpp"
#include "specsense/sensing.hpp"

using namespace specsense;

namespace {

SpectrumVector random_sparse(int n, int k, uint64_t seed) {
  Rng rng(seed);
  SpectrumVector f;
  f.values.assign(static_cast<size_t>(n), 0.0);
  for (int p : sample_without_replacement(n, k, rng)) f.values[static_cast<size_t>(p)] = rng.uniform(0.5, 1.5);
  return f;
}

double linf_correlation(const MeasurementSystem& sys, const std::vector<double>& r) {
  std::vector<double> c(static_cast<size_t>(sys.n));
  correlations(sys.phi_cols, sys.m, sys.n, r, c);
  double mx = 0.0;
  for (double e : c) mx = std::max(mx, std::abs(e));
  return mx;
}

std::vector<double> residual_of(const MeasurementSystem& sys, const MeasurementVector& y,
                                const std::vector<double>& x) {
  std::vector<double> r(static_cast<size_t>(sys.m));
  matvec_rows(sys.phi_rows, sys.m, sys.n, x, r);
  for (int i = 0; i < sys.m; ++i) r[static_cast<size_t>(i)] -= y.values[static_cast<size_t>(i)];
  return r;
}

}  // namespace

TEST_CASE("soft threshold matches the definition and the grid oracle") {
  const std::vector<double> v = {3.0, -1.0, 0.5};
  const auto out = soft_threshold(v, 1.0);
  CHECK(out == std::vector<double>{2.0, 0.0, 0.0});

  const auto same = soft_threshold(v, 0.0);
  CHECK(same == v);

  CHECK_THROWS_AS(soft_threshold(v, -0.1), std::invalid_argument);

  Rng rng(3);
  for (int rep = 0; rep < 5; ++rep) {
    const double tau = rep * 0.35 + 0.1;
    std::vector<double> w(8);
    for (double& e : w) e = rng.uniform(-3.0, 3.0);
    const auto mine = soft_threshold(w, tau);
    for (size_t i = 0; i < w.size(); ++i) {
      CHECK(std::abs(mine[i] - oracles::grid_prox_l1(w[i], tau)) <= 1e-4);
    }
  }
}

TEST_CASE("group soft threshold shrinks whole blocks") {
  const auto blocks = make_blocks(2, {{1, 2}});
  const std::vector<double> v = {3.0, 4.0};  // norm 5

  CHECK(group_soft_threshold(v, blocks, 5.0) == std::vector<double>{0.0, 0.0});
  const auto half = group_soft_threshold(v, blocks, 2.5);
  CHECK(half[0] == doctest::Approx(1.5));
  CHECK(half[1] == doctest::Approx(2.0));

  CHECK_THROWS_AS(make_blocks(4, {{1, 2}}), std::invalid_argument);
  CHECK_THROWS_AS(make_blocks(4, {{1, 3}, {3, 4}}), std::invalid_argument);
}

TEST_CASE("group soft threshold matches the numeric prox oracle") {
  Rng rng(7);
  const auto blocks = make_blocks(8, {{1, 3}, {4, 4}, {5, 8}});
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<double> v(8);
    for (double& e : v) e = rng.uniform(-2.0, 2.0);
    const double tau = 0.2 + 0.4 * rep / 10.0;
    const auto mine = group_soft_threshold(v, blocks, tau);
    for (const Subsection& b : blocks.blocks) {
      std::vector<double> seg(v.begin() + b.first - 1, v.begin() + b.last);
      const auto oracle = oracles::numeric_group_prox(seg, tau);
      for (int i = b.first; i <= b.last; ++i) {
        CHECK(std::abs(mine[static_cast<size_t>(i - 1)] -
                       oracle[static_cast<size_t>(i - b.first)]) <= 1e-6);
      }
    }
  }
}

TEST_CASE("fista fixed point of a separable quadratic") {
  const std::vector<double> c = {1.0, -2.0, 0.5, 4.0};
  ProxConfig cfg;
  cfg.step = 0.9;
  cfg.rel_tol = 1e-12;
  const auto res = fista(
      [&](const std::vector<double>& x, std::vector<double>& g) {
        g.resize(x.size());
        for (size_t i = 0; i < x.size(); ++i) g[i] = x[i] - c[i];
      },
      [](std::vector<double>&, double) {},
      [&](const std::vector<double>& x) {
        double s = 0.0;
        for (size_t i = 0; i < x.size(); ++i) s += (x[i] - c[i]) * (x[i] - c[i]);
        return 0.5 * s;
      },
      std::vector<double>(4, 0.0), cfg);
  CHECK(res.converged);
  for (size_t i = 0; i < c.size(); ++i) CHECK(res.x[i] == doctest::Approx(c[i]).epsilon(1e-8));
}

TEST_CASE("fista with zero gradient and an l1 prox shrinks to exactly zero") {
  ProxConfig cfg;
  cfg.step = 1.0;
  cfg.rel_tol = 1e-14;
  cfg.max_iter = 200;
  const auto res = fista(
      [](const std::vector<double>& x, std::vector<double>& g) { g.assign(x.size(), 0.0); },
      [](std::vector<double>& v, double step) {
        for (double& e : v) {
          const double a = std::abs(e) - 0.2 * step;
          e = a > 0.0 ? (e > 0.0 ? a : -a) : 0.0;
        }
      },
      [](const std::vector<double>& x) {
        double s = 0.0;
        for (double e : x) s += std::abs(e);
        return 0.2 * s;
      },
      std::vector<double>{1.0, -0.7, 0.3}, cfg);
  for (double e : res.x) CHECK(e == 0.0);
}

TEST_CASE("fista flags a diverging objective") {
  ProxConfig cfg;
  cfg.step = 0.5;
  cfg.max_iter = 500;
  const auto res = fista(
      // Wrong-sign gradient: ascends the quadratic instead of descending.
      [](const std::vector<double>& x, std::vector<double>& g) {
        g.resize(x.size());
        for (size_t i = 0; i < x.size(); ++i) g[i] = -(x[i] - 3.0);
      },
      [](std::vector<double>&, double) {},
      [](const std::vector<double>& x) {
        double s = 0.0;
        for (double e : x) s += (e - 3.0) * (e - 3.0);
        return 0.5 * s;
      },
      std::vector<double>{10.0, -5.0}, cfg);
  CHECK(res.diverged);
}

TEST_CASE("fista monotone mode records a non-increasing objective") {
  const auto sys = gaussian_system(12, 30, 17);
  const auto f = random_sparse(30, 4, 18);
  const auto y = measure(sys, f);
  ProxConfig cfg;
  cfg.monotone = true;
  cfg.max_iter = 300;
  cfg.rel_tol = 1e-12;
  cfg.step = 1.0 / (1.05 * lipschitz_estimate(sys));

  std::vector<double> tmp(static_cast<size_t>(sys.m));
  const double gamma = 0.05;
  const auto res = fista(
      [&](const std::vector<double>& x, std::vector<double>& g) {
        matvec_rows(sys.phi_rows, sys.m, sys.n, x, tmp);
        for (int i = 0; i < sys.m; ++i) tmp[static_cast<size_t>(i)] -= y.values[static_cast<size_t>(i)];
        g.resize(x.size());
        correlations(sys.phi_cols, sys.m, sys.n, tmp, g);
      },
      [&](std::vector<double>& v, double step) {
        for (double& e : v) {
          const double a = std::abs(e) - gamma * step;
          e = a > 0.0 ? (e > 0.0 ? a : -a) : 0.0;
        }
      },
      [&](const std::vector<double>& x) {
        matvec_rows(sys.phi_rows, sys.m, sys.n, x, tmp);
        double fit = 0.0;
        for (int i = 0; i < sys.m; ++i) {
          const double d = tmp[static_cast<size_t>(i)] - y.values[static_cast<size_t>(i)];
          fit += d * d;
        }
        double l1 = 0.0;
        for (double e : x) l1 += std::abs(e);
        return 0.5 * fit + gamma * l1;
      },
      std::vector<double>(static_cast<size_t>(sys.n), 0.0), cfg);

  REQUIRE(res.objective_history.size() > 2);
  for (size_t i = 1; i < res.objective_history.size(); ++i)
    CHECK(res.objective_history[i] <= res.objective_history[i - 1] * (1.0 + 1e-12) + 1e-15);
}

TEST_CASE("fista rejects a nonpositive step") {
  ProxConfig cfg;
  cfg.step = 0.0;
  CHECK_THROWS_AS(fista([](const std::vector<double>&, std::vector<double>&) {},
                        [](std::vector<double>&, double) {},
                        [](const std::vector<double>&) { return 0.0; }, std::vector<double>{1.0},
                        cfg),
                  std::invalid_argument);
}

TEST_CASE("the power-method Lipschitz estimate matches the Gram spectrum") {
  const auto sys = gaussian_system(20, 40, 23);
  std::vector<double> gram(40 * 40);
  for (int i = 0; i < 40; ++i) {
    for (int j = 0; j < 40; ++j) {
      gram[static_cast<size_t>(i) * 40 + j] = dot(sys.column(i), sys.column(j));
    }
  }
  std::vector<double> values, vectors;
  jacobi_eigendecompose(gram, 40, values, vectors);
  double lmax = 0.0;
  for (double v : values) lmax = std::max(lmax, v);
  CHECK(lipschitz_estimate(sys) == doctest::Approx(lmax).epsilon(0.02));
}

TEST_CASE("fista lasso agrees with the coordinate-descent oracle") {
  const auto sys = gaussian_system(8, 16, 29);
  const auto f = random_sparse(16, 3, 30);
  const auto y = measure(sys, f);
  const double gamma = 0.1 * linf_correlation(sys, y.values);

  ProxConfig cfg;
  cfg.max_iter = 50000;
  cfg.rel_tol = 1e-13;
  const auto mine = bpdn(sys, y, gamma, cfg);

  const auto cd = oracles::lasso_coordinate_descent(sys.phi_cols, sys.m, sys.n, y.values, gamma, 20000);
  const double obj_mine =
      oracles::lasso_objective(sys.phi_cols, sys.m, sys.n, y.values, gamma, mine.f_hat);
  const double obj_cd = oracles::lasso_objective(sys.phi_cols, sys.m, sys.n, y.values, gamma, cd);
  CHECK(obj_mine <= obj_cd + 1e-6);
  CHECK(std::abs(obj_mine - obj_cd) <= 1e-6 * std::max(1.0, obj_cd));
}

TEST_CASE("bpdn degenerate regimes") {
  const auto sys = gaussian_system(15, 45, 31);
  const auto f = random_sparse(45, 4, 32);
  const auto y = measure(sys, f);
  ProxConfig cfg;

  SUBCASE("gamma above the max correlation gives the zero solution") {
    const auto res = bpdn(sys, y, 1.01 * linf_correlation(sys, y.values), cfg);
    for (double v : res.f_hat) CHECK(v == 0.0);
  }

  SUBCASE("zero measurement gives the zero solution") {
    MeasurementVector zero;
    zero.values.assign(15, 0.0);
    const auto res = bpdn(sys, zero, 0.3, cfg);
    for (double v : res.f_hat) CHECK(v == 0.0);
  }

  SUBCASE("negative gamma is rejected") {
    CHECK_THROWS_AS(bpdn(sys, y, -1.0, cfg), std::invalid_argument);
  }
}

TEST_CASE("bpdn recovers an easy sparse instance about as well as omp does") {
  const auto sys = gaussian_system(100, 200, 37);
  const auto f = random_sparse(200, 5, 38);
  const auto y = measure(sys, f);
  const double gamma = 1e-4 * linf_correlation(sys, y.values);
  ProxConfig cfg;
  cfg.max_iter = 20000;
  cfg.rel_tol = 1e-10;
  const auto res = bpdn(sys, y, gamma, cfg);
  CHECK(normalized_mse(std::span<const double>(res.f_hat), std::span<const double>(f.values)) < 1e-2);
  for (int b : f.support()) {
    CHECK(res.f_hat[static_cast<size_t>(b - 1)] != 0.0);
  }
}

TEST_CASE("bpdn satisfies the subgradient optimality conditions at convergence") {
  const auto sys = gaussian_system(20, 40, 41);
  const auto f = random_sparse(40, 5, 42);
  const auto y = measure(sys, f);
  const double gamma = 0.2 * linf_correlation(sys, y.values);
  ProxConfig cfg;
  cfg.max_iter = 100000;
  cfg.rel_tol = 1e-14;
  const auto res = bpdn(sys, y, gamma, cfg);

  std::vector<double> grad(static_cast<size_t>(sys.n));
  const auto r = residual_of(sys, y, res.f_hat);
  correlations(sys.phi_cols, sys.m, sys.n, r, grad);
  const double tol = 1e-3;
  for (int j = 0; j < sys.n; ++j) {
    const double x = res.f_hat[static_cast<size_t>(j)];
    const double g = grad[static_cast<size_t>(j)];
    if (x == 0.0) {
      CHECK(std::abs(g) <= gamma * (1.0 + tol));
    } else {
      CHECK(std::abs(g + gamma * (x > 0.0 ? 1.0 : -1.0)) <= tol * gamma);
    }
  }
}

TEST_CASE("mndo returns zero when eta admits it") {
  const auto sys = gaussian_system(16, 32, 47);
  const auto f = random_sparse(32, 3, 48);
  const auto y = measure(sys, f);
  const auto blocks = make_blocks(32, {{1, 8}, {9, 16}, {17, 24}, {25, 32}});
  const auto res = mndo(sys, y, blocks, 2.0 * nrm2(y.values), ProxConfig{});
  for (double v : res.f_hat) CHECK(v == 0.0);
  CHECK(res.residual_norm == doctest::Approx(nrm2(y.values)));
}

TEST_CASE("mndo lands the residual inside the target band") {
  const auto sys = gaussian_system(20, 40, 53);
  SpectrumVector f;
  f.values.assign(40, 0.0);
  for (int b = 5; b <= 8; ++b) f.values[static_cast<size_t>(b - 1)] = 1.0;
  for (int b = 13; b <= 16; ++b) f.values[static_cast<size_t>(b - 1)] = 0.8;
  const auto y = measure(sys, f);
  const auto blocks = make_blocks(40, {{1, 4}, {5, 8}, {9, 12}, {13, 16}, {17, 40}});

  const double eta = 0.3 * nrm2(y.values);
  ProxConfig cfg;
  cfg.max_iter = 20000;
  cfg.rel_tol = 1e-11;
  const auto res = mndo(sys, y, blocks, eta, cfg);
  CHECK((res.flags & kFlagBandMissed) == 0);
  CHECK(res.residual_norm <= eta * (1.0 + 1e-9));
  CHECK(res.residual_norm >= 0.95 * eta * (1.0 - 1e-9));
}

TEST_CASE("mndo solutions keep whole blocks alive or dead") {
  const auto sys = gaussian_system(20, 40, 59);
  const auto f = random_sparse(40, 5, 60);
  const auto y = measure(sys, f);
  const auto blocks = make_blocks(40, {{1, 10}, {11, 20}, {21, 30}, {31, 40}});
  const auto res = mndo(sys, y, blocks, 0.25 * nrm2(y.values), ProxConfig{});

  for (const Subsection& b : blocks.blocks) {
    int zeros = 0;
    for (int i = b.first; i <= b.last; ++i)
      zeros += res.f_hat[static_cast<size_t>(i - 1)] == 0.0 ? 1 : 0;
    CHECK((zeros == 0 || zeros == b.size()));
  }
}

TEST_CASE("modified bpdn with an empty dense set reduces to bpdn") {
  const auto sys = gaussian_system(15, 30, 61);
  const auto f = random_sparse(30, 4, 62);
  const auto y = measure(sys, f);
  const double gamma = 0.05 * linf_correlation(sys, y.values);
  ProxConfig cfg;
  cfg.max_iter = 3000;

  const auto plain = bpdn(sys, y, gamma, cfg);
  const auto split = make_split(30, {});
  const auto modified = modified_bpdn(sys, y, split, gamma, cfg);
  REQUIRE(plain.f_hat.size() == modified.f_hat.size());
  for (size_t i = 0; i < plain.f_hat.size(); ++i)
    CHECK(plain.f_hat[i] == doctest::Approx(modified.f_hat[i]).epsilon(1e-12));
}

TEST_CASE("modified bpdn with gamma 0 is least-squares consistent") {
  const auto sys = gaussian_system(15, 30, 67);
  const auto f = random_sparse(30, 4, 68);
  const auto y = measure(sys, f);
  const auto split = make_split(30, {1, 2, 3});
  ProxConfig cfg;
  cfg.max_iter = 60000;
  cfg.rel_tol = 1e-14;
  const auto res = modified_bpdn(sys, y, split, 0.0, cfg);

  const auto r = residual_of(sys, y, res.f_hat);
  CHECK(linf_correlation(sys, r) <= 1e-6 * linf_correlation(sys, y.values));
}

TEST_CASE("modified bpdn leaves the dense set unpenalized") {
  const auto sys = gaussian_system(20, 40, 71);
  // Signal on the dense set only; a large gamma cannot suppress it.
  SpectrumVector f;
  f.values.assign(40, 0.0);
  f.values[0] = 1.0;
  f.values[1] = 1.5;
  const auto y = measure(sys, f);
  const auto split = make_split(40, {1, 2});
  ProxConfig cfg;
  cfg.max_iter = 20000;
  cfg.rel_tol = 1e-12;
  const auto res = modified_bpdn(sys, y, split, 10.0, cfg);
  CHECK(res.f_hat[0] == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(res.f_hat[1] == doctest::Approx(1.5).epsilon(1e-4));
  for (int j = 2; j < 40; ++j) CHECK(res.f_hat[static_cast<size_t>(j)] == 0.0);
}

TEST_CASE("split_from_partition puts exactly the category-1 bins in T") {
  const auto p = build_partition(20, {5, 10, 15}, {1, 2, 3, 1});
  const auto split = split_from_partition(p);
  std::vector<int> expect;
  for (int b = 1; b <= 5; ++b) expect.push_back(b);
  for (int b = 16; b <= 20; ++b) expect.push_back(b);
  CHECK(split.dense_bins() == expect);
  CHECK(split.sparse_bins().size() == 10);
}
