#pragma once

#include <functional>
#include <span>
#include <vector>

#include "specsense/sensing.hpp"
#include "specsense/solver_result.hpp"
#include "specsense/spectrum.hpp"

namespace specsense {

// The three convex baselines, all solved by one in-house accelerated
// proximal-gradient loop:
//   bpdn           min 1/2 ||y - Phi f||^2 + gamma ||f||_1
//   mndo           min sum_k ||f_k||_2  s.t. ||y - Phi f||_2 <= eta
//                  (solved along the Lagrangian path with a bisection on the
//                  penalty weight)
//   modified_bpdn  min 1/2 ||y - Phi f||^2 + gamma ||f_{T^c}||_1
// The data fit is squared in all three so the smooth part has a Lipschitz
// gradient.

struct ProxConfig {
  int max_iter = 5000;
  double rel_tol = 1e-8;   // relative iterate-change stopping tolerance
  double step = 0.0;       // 1/L; <= 0 means estimate L by the power method
  bool monotone = false;   // enforce a non-increasing objective via restarts
};

// Frequency blocks for the group norm. Blocks must partition {1..n_bins}.
struct BlockStructure {
  int n_bins = 0;
  std::vector<Subsection> blocks;  // 1-based inclusive ranges
};

BlockStructure make_blocks(int n_bins, std::vector<Subsection> blocks);
// Every partition subsection becomes one block.
BlockStructure blocks_from_partition(const CategoryPartition& partition);

// "Dense" bins T are left unpenalized; the complement T^c carries the l1 term.
struct DenseSparseSplit {
  int n_bins = 0;
  std::vector<char> is_dense;  // size n_bins + 1, indexed by 1-based bin

  std::vector<int> dense_bins() const;
  std::vector<int> sparse_bins() const;
};

DenseSparseSplit make_split(int n_bins, const std::vector<int>& dense_bins);
// T = all category-1 bins; categories 2 and 3 land in T^c, where adjacent
// subsections merge into unstructured runs.
DenseSparseSplit split_from_partition(const CategoryPartition& partition);

// prox of tau ||.||_1: elementwise sign(v) * max(|v| - tau, 0).
std::vector<double> soft_threshold(std::span<const double> v, double tau);

// prox of tau * sum_k ||v_k||_2: per block v_k * max(1 - tau/||v_k||, 0).
std::vector<double> group_soft_threshold(std::span<const double> v, const BlockStructure& blocks,
                                         double tau);

struct FistaResult {
  std::vector<double> x;
  int iterations = 0;
  bool converged = false;
  bool diverged = false;
  std::vector<double> objective_history;  // filled when cfg.monotone is set
};

using GradientFn = std::function<void(const std::vector<double>&, std::vector<double>&)>;
using ProxFn = std::function<void(std::vector<double>&, double)>;  // in place, given step
using ObjectiveFn = std::function<double(const std::vector<double>&)>;

// Accelerated proximal gradient with adaptive momentum restart. Stops when
// the relative iterate change drops below cfg.rel_tol or at cfg.max_iter;
// flags divergence when the objective grows to 10x its starting value.
FistaResult fista(const GradientFn& gradient, const ProxFn& prox, const ObjectiveFn& objective,
                  std::vector<double> x0, const ProxConfig& cfg);

// Largest eigenvalue of Phi^T Phi by 50 power-method iterations.
double lipschitz_estimate(const MeasurementSystem& sys, int iterations = 50);

SolverResult bpdn(const MeasurementSystem& sys, const MeasurementVector& y, double gamma,
                  const ProxConfig& cfg);

SolverResult mndo(const MeasurementSystem& sys, const MeasurementVector& y,
                  const BlockStructure& blocks, double eta, const ProxConfig& cfg);

SolverResult modified_bpdn(const MeasurementSystem& sys, const MeasurementVector& y,
                           const DenseSparseSplit& split, double gamma, const ProxConfig& cfg);

}  // namespace specsense
