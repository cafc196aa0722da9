#include "specsense/least_squares.hpp"

#include <cmath>
#include <stdexcept>

#include "specsense/kernels.hpp"

namespace specsense {

namespace {
constexpr double kDependencyTol = 1e-12;
}

bool IncrementalQR::append(std::span<const double> column) {
  if (static_cast<int>(column.size()) != m_) throw std::invalid_argument("column length mismatch");
  std::vector<double> v(column.begin(), column.end());
  const double original_norm = nrm2(v);
  std::vector<double> proj(static_cast<size_t>(basis_count_), 0.0);
  // Two MGS passes keep the basis orthogonal to near machine precision.
  for (int pass = 0; pass < 2; ++pass) {
    for (int b = 0; b < basis_count_; ++b) {
      const std::span<const double> qb{q_.data() + static_cast<size_t>(b) * m_, static_cast<size_t>(m_)};
      const double c = dot(qb, v);
      proj[static_cast<size_t>(b)] += c;
      axpy(-c, qb, v);
    }
  }
  const double rest = nrm2(v);
  if (original_norm == 0.0 || rest <= kDependencyTol * original_norm) {
    coeffs_.push_back(std::move(proj));
    basis_index_.push_back(-1);
    degenerate_ = true;
    return false;
  }
  const double inv = 1.0 / rest;
  for (double& e : v) e *= inv;
  q_.insert(q_.end(), v.begin(), v.end());
  proj.push_back(rest);  // diagonal entry
  coeffs_.push_back(std::move(proj));
  basis_index_.push_back(basis_count_);
  ++basis_count_;
  return true;
}

void IncrementalQR::solve(std::span<const double> y, std::span<double> x) const {
  if (static_cast<int>(y.size()) != m_) throw std::invalid_argument("rhs length mismatch");
  if (static_cast<int>(x.size()) != cols()) throw std::invalid_argument("solution length mismatch");

  std::vector<double> qty(static_cast<size_t>(basis_count_));
  for (int b = 0; b < basis_count_; ++b) {
    const std::span<const double> qb{q_.data() + static_cast<size_t>(b) * m_, static_cast<size_t>(m_)};
    qty[static_cast<size_t>(b)] = dot(qb, y);
  }

  // Back-substitute R beta = Q^T y over the basis columns. The coefficient of
  // basis direction b in basis column j is coeffs_[col(j)][b].
  std::vector<int> basis_to_col(static_cast<size_t>(basis_count_));
  for (int c = 0; c < cols(); ++c) {
    if (basis_index_[static_cast<size_t>(c)] >= 0)
      basis_to_col[static_cast<size_t>(basis_index_[static_cast<size_t>(c)])] = c;
  }
  std::vector<double> beta(static_cast<size_t>(basis_count_), 0.0);
  for (int b = basis_count_ - 1; b >= 0; --b) {
    double s = qty[static_cast<size_t>(b)];
    for (int j = b + 1; j < basis_count_; ++j) {
      s -= coeffs_[static_cast<size_t>(basis_to_col[static_cast<size_t>(j)])][static_cast<size_t>(b)] *
           beta[static_cast<size_t>(j)];
    }
    beta[static_cast<size_t>(b)] =
        s / coeffs_[static_cast<size_t>(basis_to_col[static_cast<size_t>(b)])][static_cast<size_t>(b)];
  }
  for (int c = 0; c < cols(); ++c) {
    const int b = basis_index_[static_cast<size_t>(c)];
    x[static_cast<size_t>(c)] = b >= 0 ? beta[static_cast<size_t>(b)] : 0.0;
  }
}

void jacobi_eigendecompose(std::vector<double> a, int t, std::vector<double>& values,
                           std::vector<double>& vectors) {
  vectors.assign(static_cast<size_t>(t) * t, 0.0);
  for (int i = 0; i < t; ++i) vectors[static_cast<size_t>(i) * t + i] = 1.0;
  auto at = [&](int i, int j) -> double& { return a[static_cast<size_t>(i) * t + j]; };
  auto vt = [&](int i, int j) -> double& { return vectors[static_cast<size_t>(i) * t + j]; };

  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < t; ++i)
      for (int j = i + 1; j < t; ++j) off += at(i, j) * at(i, j);
    if (off < 1e-30) break;
    for (int p = 0; p < t - 1; ++p) {
      for (int q = p + 1; q < t; ++q) {
        const double apq = at(p, q);
        if (apq == 0.0) continue;
        const double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
        const double sign = theta >= 0.0 ? 1.0 : -1.0;
        const double tau = sign / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(tau * tau + 1.0);
        const double s = tau * c;
        for (int k = 0; k < t; ++k) {
          const double akp = at(k, p), akq = at(k, q);
          at(k, p) = c * akp - s * akq;
          at(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < t; ++k) {
          const double apk = at(p, k), aqk = at(q, k);
          at(p, k) = c * apk - s * aqk;
          at(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < t; ++k) {
          const double vkp = vt(k, p), vkq = vt(k, q);
          vt(k, p) = c * vkp - s * vkq;
          vt(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  values.resize(static_cast<size_t>(t));
  for (int i = 0; i < t; ++i) values[static_cast<size_t>(i)] = at(i, i);
}

LeastSquaresResult least_squares(std::span<const double> a_cols, int m, int t,
                                 std::span<const double> y) {
  if (t > m) throw std::invalid_argument("least_squares expects t <= m");
  if (static_cast<int>(y.size()) != m) throw std::invalid_argument("rhs length mismatch");

  IncrementalQR qr(m);
  for (int j = 0; j < t; ++j) {
    qr.append({a_cols.data() + static_cast<size_t>(j) * m, static_cast<size_t>(m)});
  }
  LeastSquaresResult res;
  res.x.assign(static_cast<size_t>(t), 0.0);
  if (!qr.degenerate()) {
    qr.solve(y, res.x);
    return res;
  }

  // Rank-deficient: minimum-norm solution x = (A^T A)^+ A^T y.
  res.degenerate = true;
  std::vector<double> gram(static_cast<size_t>(t) * t);
  std::vector<double> aty(static_cast<size_t>(t));
  for (int i = 0; i < t; ++i) {
    const std::span<const double> ci{a_cols.data() + static_cast<size_t>(i) * m, static_cast<size_t>(m)};
    aty[static_cast<size_t>(i)] = dot(ci, y);
    for (int j = i; j < t; ++j) {
      const std::span<const double> cj{a_cols.data() + static_cast<size_t>(j) * m, static_cast<size_t>(m)};
      const double g = dot(ci, cj);
      gram[static_cast<size_t>(i) * t + j] = g;
      gram[static_cast<size_t>(j) * t + i] = g;
    }
  }
  std::vector<double> eigvals, eigvecs;
  jacobi_eigendecompose(gram, t, eigvals, eigvecs);
  double lambda_max = 0.0;
  for (double v : eigvals) lambda_max = std::max(lambda_max, v);
  const double cutoff = lambda_max * static_cast<double>(t) * 1e-14;
  for (int k = 0; k < t; ++k) {
    const double lambda = eigvals[static_cast<size_t>(k)];
    if (lambda <= cutoff) continue;
    double vb = 0.0;
    for (int i = 0; i < t; ++i) vb += eigvecs[static_cast<size_t>(i) * t + k] * aty[static_cast<size_t>(i)];
    const double scale = vb / lambda;
    for (int i = 0; i < t; ++i)
      res.x[static_cast<size_t>(i)] += scale * eigvecs[static_cast<size_t>(i) * t + k];
  }
  return res;
}

}  // namespace specsense
