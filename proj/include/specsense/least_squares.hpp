#pragma once

#include <span>
#include <vector>

namespace specsense {

// Incrementally updatable QR factorization for the greedy solvers: columns
// are appended one at a time (modified Gram-Schmidt with one
// reorthogonalization pass) and the least-squares solution against all
// appended columns is available after each append.
//
// A column that is numerically dependent on the ones already appended is kept
// in the column list but contributes no new basis direction; it gets a zero
// coefficient in solve() and marks the factorization degenerate.
class IncrementalQR {
 public:
  explicit IncrementalQR(int m) : m_(m) {}

  // Returns true if the column added a new basis direction.
  bool append(std::span<const double> column);

  int rows() const { return m_; }
  int cols() const { return static_cast<int>(coeffs_.size()); }
  int rank() const { return basis_count_; }
  bool degenerate() const { return degenerate_; }

  // x = argmin ||A x - y||_2 over the appended columns (dependent columns
  // receive 0). x must have size cols().
  void solve(std::span<const double> y, std::span<double> x) const;

 private:
  int m_;
  int basis_count_ = 0;
  bool degenerate_ = false;
  std::vector<double> q_;                      // column-major m x basis_count
  std::vector<std::vector<double>> coeffs_;    // per appended column: projections on basis
  std::vector<int> basis_index_;               // per appended column: basis slot or -1
};

struct LeastSquaresResult {
  std::vector<double> x;
  bool degenerate = false;  // rank-deficient input, minimum-norm solution returned
};

// argmin_x ||A x - y||_2 for a dense column-major M x t matrix, t <= M.
// Full-rank inputs go through the QR above; rank-deficient inputs fall back
// to the minimum-norm solution via an eigendecomposition of A^T A and are
// flagged degenerate.
LeastSquaresResult least_squares(std::span<const double> a_cols, int m, int t,
                                 std::span<const double> y);

// Cyclic Jacobi eigendecomposition of a symmetric t x t matrix (row-major).
// Eigenvalues land in `values`, eigenvectors in the columns of `vectors`.
void jacobi_eigendecompose(std::vector<double> a, int t, std::vector<double>& values,
                           std::vector<double>& vectors);

}  // namespace specsense
