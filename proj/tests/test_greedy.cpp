#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

#include "oracles.hpp"
#include "specsense/greedy.hpp"
#include "specsense/kernels.hpp"
#include "specsense/rng.hpp"
#include "specsense/sensing.hpp"
#include "specsense/spectrum.hpp"

using namespace specsense;

namespace {

SpectrumVector sparse_signal(int n, const std::vector<int>& bins, double value = 1.0) {
  SpectrumVector f;
  f.values.assign(static_cast<size_t>(n), 0.0);
  for (int b : bins) f.values[static_cast<size_t>(b - 1)] = value;
  return f;
}

SpectrumVector random_sparse(int n, int k, uint64_t seed, double lo = 0.5, double hi = 1.5) {
  Rng rng(seed);
  SpectrumVector f;
  f.values.assign(static_cast<size_t>(n), 0.0);
  for (int p : sample_without_replacement(n, k, rng)) f.values[static_cast<size_t>(p)] = rng.uniform(lo, hi);
  return f;
}

// All category-3 partition: no prior knowledge at all.
CategoryPartition flat_partition(int n) { return build_partition(n, {}, {3}); }

}  // namespace

TEST_CASE("select_index finds the best column and breaks ties low") {
  // Exactly orthonormal columns via unit vectors.
  MeasurementSystem sys;
  sys.m = 6;
  sys.n = 6;
  sys.phi_cols.assign(36, 0.0);
  for (int j = 0; j < 6; ++j) sys.phi_cols[static_cast<size_t>(j) * 6 + j] = 1.0;
  sys.phi_rows = sys.phi_cols;

  std::vector<char> excluded(7, 0);
  std::vector<double> residual(6, 0.0);
  residual[4] = 2.0;  // equals column 5 (1-based) scaled
  auto pick = select_index(residual, sys, excluded);
  REQUIRE(pick.has_value());
  CHECK(*pick == 4);

  SUBCASE("excluded indices are skipped") {
    excluded[5] = 1;  // exclude bin 5 == column index 4
    residual[2] = 1.0;
    pick = select_index(residual, sys, excluded);
    REQUIRE(pick.has_value());
    CHECK(*pick == 2);
  }

  SUBCASE("zero residual stalls") {
    std::vector<double> zero(6, 0.0);
    CHECK(!select_index(zero, sys, excluded).has_value());
  }
}

TEST_CASE("exact duplicate columns tie-break to the smallest index") {
  auto sys = gaussian_system(10, 20, 3);
  // Make column 7 an exact copy of column 3 (0-based), then correlate with 3.
  for (int i = 0; i < sys.m; ++i)
    sys.phi_cols[static_cast<size_t>(7) * sys.m + i] = sys.phi_cols[static_cast<size_t>(3) * sys.m + i];
  std::vector<double> residual(sys.column(3).begin(), sys.column(3).end());
  std::vector<char> excluded(21, 0);
  const auto pick = select_index(residual, sys, excluded);
  REQUIRE(pick.has_value());
  CHECK(*pick == 3);
}

TEST_CASE("select_index agrees with the exhaustive scan") {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const auto sys = gaussian_system(10, 20, 50 + seed);
    Rng rng(60 + seed);
    std::vector<double> residual(10);
    for (double& e : residual) e = rng.normal();
    std::vector<char> excluded(21, 0);

    int best = -1;
    double best_abs = -1.0;
    for (int j = 0; j < 20; ++j) {
      const double c = std::abs(dot(sys.column(j), residual));
      if (c > best_abs) {
        best_abs = c;
        best = j;
      }
    }
    const auto pick = select_index(residual, sys, excluded);
    REQUIRE(pick.has_value());
    CHECK(*pick == best);
  }
}

TEST_CASE("omp on a zero measurement returns immediately") {
  const auto sys = gaussian_system(20, 40, 5);
  MeasurementVector y;
  y.values.assign(20, 0.0);
  const auto res = omp_solve(sys, y, 10, 1e-9);
  CHECK(res.iterations == 0);
  CHECK(res.selected.empty());
  for (double v : res.f_hat) CHECK(v == 0.0);
}

TEST_CASE("omp validates max_iter") {
  const auto sys = gaussian_system(10, 30, 6);
  MeasurementVector y;
  y.values.assign(10, 1.0);
  CHECK_THROWS_AS(omp_solve(sys, y, 11, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(omp_solve(sys, y, -1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(omp_solve(sys, y, 5, -1.0), std::invalid_argument);
}

TEST_CASE("omp recovers 5-sparse signals at M=100, N=200 on >= 95 of 100 seeds") {
  int exact = 0;
  for (uint64_t seed = 0; seed < 100; ++seed) {
    const auto sys = gaussian_system(100, 200, 1000 + seed);
    const auto f = random_sparse(200, 5, 2000 + seed);
    const auto y = measure(sys, f);
    const auto res = omp_solve(sys, y, 50, 1e-6 * nrm2(y.values));
    if (normalized_mse(std::span<const double>(res.f_hat), std::span<const double>(f.values)) < 1e-10)
      ++exact;
  }
  CHECK(exact >= 95);
}

TEST_CASE("omp picks the active column first for 1-sparse signals on >= 95 of 100 seeds") {
  int hits = 0;
  for (uint64_t seed = 0; seed < 100; ++seed) {
    const auto sys = gaussian_system(100, 200, 3000 + seed);
    Rng rng(4000 + seed);
    const int j = static_cast<int>(rng.bounded(200));
    const auto f = sparse_signal(200, {j + 1}, 0.5 + rng.uniform());
    const auto y = measure(sys, f);
    const auto res = omp_solve(sys, y, 5, 1e-6 * nrm2(y.values));
    if (!res.selected.empty() && res.selected.front() == j + 1) ++hits;
  }
  CHECK(hits >= 95);
}

TEST_CASE("residual norms are non-increasing and orthogonal to the chosen columns") {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const auto sys = gaussian_system(30, 80, 500 + seed);
    const auto f = random_sparse(80, 6, 600 + seed);
    auto y = measure(sys, f);
    if (seed % 2 == 1) y = add_awgn(y, 12.0, sys, f, 700 + seed);

    const auto res = omp_solve(sys, y, 15, 0.0);
    const double slack = 1e-12 * nrm2(y.values);  // once at numerical zero, bits jitter
    for (size_t i = 1; i < res.residual_norm_history.size(); ++i)
      CHECK(res.residual_norm_history[i] <= res.residual_norm_history[i - 1] + slack);

    std::vector<double> r = y.values;
    for (size_t k = 0; k < res.selected.size(); ++k)
      axpy(-res.f_hat[static_cast<size_t>(res.selected[k] - 1)], sys.column(res.selected[k] - 1), r);
    const double bound = 1e-8 * nrm2(y.values);
    for (int b : res.selected) CHECK(std::abs(dot(sys.column(b - 1), r)) <= bound);
  }
}

TEST_CASE("modified omp with an all-category-3 partition equals plain omp") {
  const auto partition = flat_partition(80);
  for (uint64_t seed = 0; seed < 8; ++seed) {
    const auto sys = gaussian_system(30, 80, 800 + seed);
    const auto f = random_sparse(80, 6, 900 + seed);
    auto y = measure(sys, f);
    if (seed % 2 == 1) y = add_awgn(y, 10.0, sys, f, 950 + seed);

    const auto a = omp_solve(sys, y, 15, 1e-6 * nrm2(y.values));
    const auto b = modified_omp_solve(sys, y, partition, 15, 1e-6 * nrm2(y.values));
    CHECK(a.selected == b.selected);
    REQUIRE(a.f_hat.size() == b.f_hat.size());
    for (size_t i = 0; i < a.f_hat.size(); ++i)
      CHECK(std::abs(a.f_hat[i] - b.f_hat[i]) <= 1e-10);
  }
}

TEST_CASE("modified omp seeds the selection with the category-1 set") {
  // Partition of 60 bins: S1 = {1..8}, S2 = {9..20} (two blocks), rest S3.
  const auto partition = build_partition(60, {8, 14, 20}, {1, 2, 2, 3});
  const auto sys = gaussian_system(30, 60, 71);
  const auto f = sparse_signal(60, {1, 2, 3, 4, 5, 6, 7, 8});
  const auto y = measure(sys, f);

  const auto res = modified_omp_solve(sys, y, partition, 15, 1e-6 * nrm2(y.values));
  CHECK(res.iterations == 0);  // S1 already explains the measurement
  std::set<int> sel(res.selected.begin(), res.selected.end());
  for (int b = 1; b <= 8; ++b) CHECK(sel.count(b) == 1);
  CHECK(normalized_mse(std::span<const double>(res.f_hat), std::span<const double>(f.values)) < 1e-10);
}

TEST_CASE("a selection inside a category-2 block pulls in the whole block") {
  const auto partition = build_partition(60, {8, 14, 20}, {1, 2, 2, 3});
  int good = 0;
  for (uint64_t seed = 0; seed < 100; ++seed) {
    const auto sys = gaussian_system(30, 60, 1100 + seed);
    // Support: all of S1 plus the occupied block {9..14}.
    const auto f = sparse_signal(60, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14});
    const auto y = measure(sys, f);
    const auto res = modified_omp_solve(sys, y, partition, 15, 1e-6 * nrm2(y.values));
    if (res.iterations < 1) continue;
    std::set<int> sel(res.selected.begin(), res.selected.end());
    bool has_all = true;
    for (int b = 1; b <= 14; ++b) has_all = has_all && sel.count(b) == 1;
    if (has_all && res.residual_norm_history.size() >= 2) ++good;
  }
  CHECK(good >= 95);
}

TEST_CASE("category-2 blocks are selected atomically (block closure)") {
  const auto partition = build_partition(60, {8, 14, 20}, {1, 2, 2, 3});
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const auto sys = gaussian_system(30, 60, 1300 + seed);
    const auto f = random_sparse(60, 9, 1400 + seed);
    auto y = measure(sys, f);
    y = add_awgn(y, 8.0, sys, f, 1450 + seed);
    const auto res = modified_omp_solve(sys, y, partition, 15, 0.5);

    std::set<int> sel(res.selected.begin(), res.selected.end());
    for (size_t k = 0; k < partition.subsections.size(); ++k) {
      if (partition.category_of[k] != 2) continue;
      int inside = 0;
      for (int b = partition.subsections[k].first; b <= partition.subsections[k].last; ++b)
        inside += sel.count(b);
      const bool none = inside == 0;
      const bool all = inside == partition.subsections[k].size();
      CHECK((none || all));
    }
    // And the category-1 set is always present.
    for (int b : partition.category_bins(1)) CHECK(sel.count(b) == 1);
  }
}

TEST_CASE("modified omp rejects an underdetermined category-1 fit") {
  const auto partition = build_partition(60, {40}, {1, 3});  // |S1| = 40 > M = 30
  const auto sys = gaussian_system(30, 60, 81);
  MeasurementVector y;
  y.values.assign(30, 1.0);
  CHECK_THROWS_AS(modified_omp_solve(sys, y, partition, 10, 0.0), std::invalid_argument);
}

TEST_CASE("a block add that would exceed M stops with the capacity flag") {
  // Two 6-wide category-2 blocks, M = 8: the second add would need 12 columns.
  const auto partition = build_partition(20, {6, 12}, {2, 2, 3});
  const auto sys = gaussian_system(8, 20, 91);
  const auto f = sparse_signal(20, {1, 2, 3, 7, 8, 9});
  const auto y = measure(sys, f);
  const auto res = modified_omp_solve(sys, y, partition, 8, 0.0);
  CHECK((res.flags & kFlagCapacityStop) != 0);
  CHECK(res.selected.size() <= 8);
}

TEST_CASE("modified omp reconstructs the built-in scenario exactly from 250 measurements") {
  const auto partition = paper_scenario();
  OccupancyRule rule;
  rule.s1_fill = 1.0;
  rule.s2_fill = 0.10;
  rule.s3_fill = 0.02;
  const auto f = generate_spectrum(partition, rule, 12345);
  const auto sys = gaussian_system(250, 1000, 54321);
  const auto y = measure(sys, f);

  const auto res = modified_omp_solve(sys, y, partition, 125, 1e-6 * nrm2(y.values));
  CHECK(normalized_mse(std::span<const double>(res.f_hat), std::span<const double>(f.values)) <
        1e-10);
  std::set<int> sel(res.selected.begin(), res.selected.end());
  for (int b : f.support()) CHECK(sel.count(b) == 1);
  CHECK(res.selected.size() <= 250);

  // Plain omp cannot cope at this sampling rate; the priors carry the win.
  const auto plain = omp_solve(sys, y, 125, 1e-6 * nrm2(y.values));
  CHECK(normalized_mse(std::span<const double>(plain.f_hat), std::span<const double>(f.values)) >
        0.1);
}

TEST_CASE("the reported estimate equals an independent refit on the final set") {
  const auto sys = gaussian_system(40, 100, 101);
  const auto f = random_sparse(100, 7, 102);
  const auto y = measure(sys, f);
  const auto res = omp_solve(sys, y, 20, 1e-6 * nrm2(y.values));

  const int t = static_cast<int>(res.selected.size());
  REQUIRE(t > 0);
  std::vector<double> cols(static_cast<size_t>(sys.m) * t);
  for (int k = 0; k < t; ++k) {
    const auto col = sys.column(res.selected[static_cast<size_t>(k)] - 1);
    std::copy(col.begin(), col.end(), cols.begin() + static_cast<size_t>(k) * sys.m);
  }
  const auto oracle = oracles::normal_equations_ls(cols, sys.m, t, y.values);
  for (int k = 0; k < t; ++k) {
    CHECK(res.f_hat[static_cast<size_t>(res.selected[static_cast<size_t>(k)] - 1)] ==
          doctest::Approx(oracle[static_cast<size_t>(k)]).epsilon(1e-8));
  }
}
