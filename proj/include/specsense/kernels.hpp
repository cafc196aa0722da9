#pragma once

#include <cstddef>
#include <span>

namespace specsense {

// Dense linear-algebra kernels used by every solver.
//
// The primary versions parallelise over output elements with OpenMP and use
// multi-accumulator inner loops. Each output element is still produced by one
// thread in a fixed accumulation order, so results do not depend on the
// thread count. specsense::ref holds the naive serial versions used as the
// test reference and the benchmark baseline.

double dot(std::span<const double> a, std::span<const double> b);
double nrm2(std::span<const double> a);

// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

// y = A x for row-major A (m x n): one contiguous row dot per output element.
void matvec_rows(std::span<const double> a_rows, int m, int n,
                 std::span<const double> x, std::span<double> y);

// out = A^T r for column-major A (m x n): one contiguous column dot per output.
void correlations(std::span<const double> a_cols, int m, int n,
                  std::span<const double> r, std::span<double> out);

namespace ref {

double dot(std::span<const double> a, std::span<const double> b);
double nrm2(std::span<const double> a);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void matvec_rows(std::span<const double> a_rows, int m, int n,
                 std::span<const double> x, std::span<double> y);
void correlations(std::span<const double> a_cols, int m, int n,
                  std::span<const double> r, std::span<double> out);

}  // namespace ref

}  // namespace specsense
