#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "specsense/spectrum.hpp"

namespace specsense {

// Sub-Nyquist measurement model y = Phi f (+ w): a dense M x N Gaussian
// matrix applied to the frequency vector, with optional white Gaussian noise
// at a configured measurement-domain SNR.

struct MeasurementSystem {
  int m = 0;
  int n = 0;
  uint64_t seed = 0;
  std::vector<double> phi_cols;  // column-major, column j at phi_cols[j*m]
  std::vector<double> phi_rows;  // the same matrix row-major, for fast A*x

  std::span<const double> column(int j) const {
    return {phi_cols.data() + static_cast<size_t>(j) * m, static_cast<size_t>(m)};
  }
};

struct MeasurementVector {
  std::vector<double> values;  // length M
  double noise_sigma = 0.0;    // per-component std deviation (0 when noiseless)
};

// M x N matrix of i.i.d. Normal(0, 1/M) entries, so column norms concentrate
// near 1. Deterministic given the seed. Requires 0 < m < n.
MeasurementSystem gaussian_system(int m, int n, uint64_t seed);

// y = Phi f, noiseless.
MeasurementVector measure(const MeasurementSystem& sys, const SpectrumVector& f);

// Adds white Gaussian noise w with per-component variance
// sigma^2 = ||Phi f||^2 / (M * 10^(snr_db/10)), i.e. snr_db is the ratio of
// average measured-signal power to noise power. Throws if Phi f is zero.
MeasurementVector add_awgn(const MeasurementVector& y, double snr_db, const MeasurementSystem& sys,
                           const SpectrumVector& f, uint64_t seed);

// ||f_hat - f||_2 / ||f||_2 (the ratio of norms, not squared).
double normalized_mse(const SpectrumVector& f_hat, const SpectrumVector& f);
double normalized_mse(std::span<const double> f_hat, std::span<const double> f);

}  // namespace specsense
