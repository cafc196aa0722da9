#include "specsense/sensing.hpp"

#include <cmath>
#include <stdexcept>

#include "specsense/kernels.hpp"
#include "specsense/rng.hpp"

namespace specsense {

MeasurementSystem gaussian_system(int m, int n, uint64_t seed) {
  if (m <= 0 || m >= n) throw std::invalid_argument("need 0 < m < n for a compressive system");
  MeasurementSystem sys;
  sys.m = m;
  sys.n = n;
  sys.seed = seed;
  sys.phi_cols.resize(static_cast<size_t>(m) * n);
  Rng rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  for (double& e : sys.phi_cols) e = scale * rng.normal();
  sys.phi_rows.resize(sys.phi_cols.size());
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < m; ++i) {
      sys.phi_rows[static_cast<size_t>(i) * n + j] = sys.phi_cols[static_cast<size_t>(j) * m + i];
    }
  }
  return sys;
}

MeasurementVector measure(const MeasurementSystem& sys, const SpectrumVector& f) {
  if (static_cast<int>(f.values.size()) != sys.n)
    throw std::invalid_argument("spectrum length does not match measurement system");
  MeasurementVector y;
  y.values.assign(static_cast<size_t>(sys.m), 0.0);
  matvec_rows(sys.phi_rows, sys.m, sys.n, f.values, y.values);
  return y;
}

MeasurementVector add_awgn(const MeasurementVector& y, double snr_db, const MeasurementSystem& sys,
                           const SpectrumVector& f, uint64_t seed) {
  if (!std::isfinite(snr_db)) throw std::invalid_argument("snr_db must be finite");
  const MeasurementVector clean = measure(sys, f);
  const double signal_energy = dot(clean.values, clean.values);
  if (signal_energy == 0.0) throw std::invalid_argument("SNR undefined for zero signal");
  const double sigma2 = signal_energy / (static_cast<double>(sys.m) * std::pow(10.0, snr_db / 10.0));
  const double sigma = std::sqrt(sigma2);

  MeasurementVector out;
  out.values = y.values;
  out.noise_sigma = sigma;
  Rng rng(seed);
  for (double& v : out.values) v += sigma * rng.normal();
  return out;
}

double normalized_mse(std::span<const double> f_hat, std::span<const double> f) {
  if (f_hat.size() != f.size()) throw std::invalid_argument("length mismatch in normalized_mse");
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < f.size(); ++i) {
    const double d = f_hat[i] - f[i];
    num += d * d;
    den += f[i] * f[i];
  }
  if (den == 0.0) throw std::invalid_argument("normalized_mse needs a nonzero reference");
  return std::sqrt(num) / std::sqrt(den);
}

double normalized_mse(const SpectrumVector& f_hat, const SpectrumVector& f) {
  return normalized_mse(std::span<const double>(f_hat.values), std::span<const double>(f.values));
}

}  // namespace specsense
