#pragma once

#include <string>
#include <vector>

namespace specsense {

// Outcome flags shared by all solvers.
enum SolverFlag : unsigned {
  kFlagStall = 1u << 0,         // residual nonzero but orthogonal to every column
  kFlagCapacityStop = 1u << 1,  // adding the next selection would exceed M columns
  kFlagDegenerate = 1u << 2,    // rank-deficient least-squares step
  kFlagNotConverged = 1u << 3,  // iteration cap hit before the stopping tolerance
  kFlagBandMissed = 1u << 4,    // residual-target bracket not reached
  kFlagDiverged = 1u << 5,      // objective blew up, best iterate returned
};

std::string flags_to_string(unsigned flags);
unsigned flags_from_string(const std::string& s);

struct SolverResult {
  std::vector<double> f_hat;          // length N; exactly zero off the selected set
  std::vector<int> selected;          // 1-based bin indices, in selection order
  double residual_norm = 0.0;         // final ||y - Phi f_hat||_2
  int iterations = 0;
  double wall_time_s = 0.0;
  std::vector<double> residual_norm_history;
  unsigned flags = 0;
};

}  // namespace specsense
