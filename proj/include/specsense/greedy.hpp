#pragma once

#include <optional>
#include <span>
#include <vector>

#include "specsense/least_squares.hpp"
#include "specsense/sensing.hpp"
#include "specsense/solver_result.hpp"
#include "specsense/spectrum.hpp"

namespace specsense {

// Orthogonal matching pursuit and its category-aware variant.
//
// Both solvers iterate: pick the column most correlated with the residual,
// grow the index set, re-fit by least squares, update the residual, and stop
// once the residual norm drops to eta or the iteration cap is reached.
//
// The category-aware variant additionally
//   - starts from the full category-1 index set (least-squares fit before the
//     first selection),
//   - pulls in a whole category-2 subsection whenever any of its bins is
//     selected,
//   - treats category-3 bins one at a time like plain OMP.

// Loop state, exposed for tests that inspect the per-iteration invariants.
struct GreedyState {
  std::vector<int> lambda_set;  // 1-based selected bins, selection order
  std::vector<double> residual;
  std::vector<double> residual_norm_history;
  int iteration = 0;
};

// Index of the column with the largest |<residual, column_j>| among columns
// not in `excluded` (0-based column indices; ties break to the smallest
// index). Returns nullopt when every admissible correlation is exactly zero.
std::optional<int> select_index(std::span<const double> residual, const MeasurementSystem& sys,
                                const std::vector<char>& excluded);

// Plain OMP. max_iter must be <= M. When noise_sigma > 0 the loop also stops
// once the residual energy is consistent with pure noise on the remaining
// M - |selected| degrees of freedom (a chi-square upper bound), which keeps
// low-SNR runs from fitting noise after the signal is explained.
SolverResult omp_solve(const MeasurementSystem& sys, const MeasurementVector& y, int max_iter,
                       double eta, double noise_sigma = 0.0);

// Category-aware OMP. Requires |S1| <= M so the initial fit is determined;
// stops with kFlagCapacityStop if a subsection add would push past M columns.
SolverResult modified_omp_solve(const MeasurementSystem& sys, const MeasurementVector& y,
                                const CategoryPartition& partition, int max_iter, double eta,
                                double noise_sigma = 0.0);

}  // namespace specsense
