#include "specsense/kernels.hpp"

#include <cmath>
#include <cstddef>

namespace specsense {

namespace {

// Work threshold below which the OpenMP fork/join overhead dominates.
constexpr long kParallelFlops = 1 << 16;

// Four independent accumulators break the FP dependency chain; partials are
// combined in a fixed order so the result is identical for every schedule.
inline double dot4(const double* a, const double* b, size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

}  // namespace

double dot(std::span<const double> a, std::span<const double> b) {
  return dot4(a.data(), b.data(), a.size());
}

double nrm2(std::span<const double> a) {
  return std::sqrt(dot4(a.data(), a.data(), a.size()));
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  const size_t n = x.size();
  for (size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void matvec_rows(std::span<const double> a_rows, int m, int n,
                 std::span<const double> x, std::span<double> y) {
  const double* a = a_rows.data();
  const double* xv = x.data();
  double* yv = y.data();
  const long flops = static_cast<long>(m) * n;
#pragma omp parallel for schedule(static) if (flops >= kParallelFlops)
  for (int i = 0; i < m; ++i) {
    yv[i] = dot4(a + static_cast<size_t>(i) * n, xv, static_cast<size_t>(n));
  }
}

void correlations(std::span<const double> a_cols, int m, int n,
                  std::span<const double> r, std::span<double> out) {
  const double* a = a_cols.data();
  const double* rv = r.data();
  double* ov = out.data();
  const long flops = static_cast<long>(m) * n;
#pragma omp parallel for schedule(static) if (flops >= kParallelFlops)
  for (int j = 0; j < n; ++j) {
    ov[j] = dot4(a + static_cast<size_t>(j) * m, rv, static_cast<size_t>(m));
  }
}

namespace ref {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double nrm2(std::span<const double> a) { return std::sqrt(ref::dot(a, a)); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void matvec_rows(std::span<const double> a_rows, int m, int n,
                 std::span<const double> x, std::span<double> y) {
  for (int i = 0; i < m; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += a_rows[static_cast<size_t>(i) * n + j] * x[j];
    y[i] = s;
  }
}

void correlations(std::span<const double> a_cols, int m, int n,
                  std::span<const double> r, std::span<double> out) {
  for (int j = 0; j < n; ++j) {
    double s = 0.0;
    for (int i = 0; i < m; ++i) s += a_cols[static_cast<size_t>(j) * m + i] * r[i];
    out[j] = s;
  }
}

}  // namespace ref

}  // namespace specsense
