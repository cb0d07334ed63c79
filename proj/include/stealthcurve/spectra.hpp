// Copyright 2026 The Stealthcurve Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "stealthcurve/detail/fft.hpp"
#include "stealthcurve/grid.hpp"

namespace stealthcurve {
namespace spectra {

// Power spectral density of a real stationary process, sampled on a
// FrequencyGrid.  Real processes have even spectra, so construction
// enforces values[j] == values[n - j]; inputs off by more than rounding
// noise are rejected, inputs within it are folded to exact symmetry.
class SpectrumSamples {
 public:
  SpectrumSamples(FrequencyGrid grid, std::vector<double> values)
      : grid_(grid), values_(std::move(values)) {
    const std::size_t n = grid_.size();
    if (values_.size() != n)
      throw std::invalid_argument(
          "SpectrumSamples: expected " + std::to_string(n) + " values, got " +
          std::to_string(values_.size()));
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(values_[j]) || values_[j] < 0.0)
        throw std::invalid_argument(
            "SpectrumSamples: value at bin " + std::to_string(j) +
            " is negative or not finite");
    }
    for (std::size_t j = 1; j < n / 2; ++j) {
      const double lhs = values_[j];
      const double rhs = values_[n - j];
      if (std::fabs(lhs - rhs) > 1e-9 * (1.0 + std::max(lhs, rhs)))
        throw std::invalid_argument(
            "SpectrumSamples: not symmetric at bins " + std::to_string(j) +
            " and " + std::to_string(n - j));
      const double folded = 0.5 * (lhs + rhs);
      values_[j] = folded;
      values_[n - j] = folded;
    }
  }

  static SpectrumSamples constant(FrequencyGrid grid, double value) {
    return SpectrumSamples(grid,
                           std::vector<double>(grid.size(), value));
  }

  // Samples f(omega_j) on the half grid and mirrors, so symmetry holds
  // bit for bit even when f(omega) and f(2 pi - omega) round differently.
  template <typename F>
  static SpectrumSamples from_frequency_function(FrequencyGrid grid, F&& f) {
    const std::size_t n = grid.size();
    std::vector<double> values(n);
    for (std::size_t j = 0; j <= n / 2; ++j) {
      const double v = f(grid.omega(j));
      values[j] = v;
      if (j > 0 && j < n / 2) values[n - j] = v;
    }
    return SpectrumSamples(grid, std::move(values));
  }

  const FrequencyGrid& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t j) const { return values_[j]; }

 private:
  FrequencyGrid grid_;
  std::vector<double> values_;
};

// (1/2pi) times the integral of S over [0, 2pi), i.e. the variance of
// the process.  On a uniform grid the periodic trapezoid rule is just
// the bin mean, and it converges spectrally fast for smooth S.
inline double integrate_spectrum(const SpectrumSamples& s) {
  double sum = 0.0;
  for (double v : s.values()) sum += v;
  return sum / static_cast<double>(s.size());
}

// Autocovariance R(0..max_lag) as the inverse DFT of the sampled
// spectrum.  Lags past n/2 wrap around the grid, hence the cap.
inline std::vector<double> autocovariance_from_spectrum(
    const SpectrumSamples& s, std::size_t max_lag) {
  const std::size_t n = s.size();
  if (max_lag >= n / 2)
    throw std::invalid_argument(
        "autocovariance_from_spectrum: max_lag must be below n/2 = " +
        std::to_string(n / 2) + ", got " + std::to_string(max_lag));
  std::vector<std::complex<double>> bins(n);
  for (std::size_t j = 0; j < n; ++j) bins[j] = s[j];
  const std::vector<std::complex<double>> acov = detail::ifft(bins);
  std::vector<double> out(max_lag + 1);
  for (std::size_t k = 0; k <= max_lag; ++k) out[k] = acov[k].real();
  return out;
}

// Dense symmetric covariance.  Construction checks shape and symmetry;
// positive semidefiniteness is a property of how instances are built
// (Toeplitz sections of nonnegative spectra, outer products) and is
// verified where eigenvalues are actually computed.
class CovarianceMatrix {
 public:
  explicit CovarianceMatrix(Eigen::MatrixXd m) : m_(std::move(m)) {
    if (m_.rows() == 0 || m_.rows() != m_.cols())
      throw std::invalid_argument("CovarianceMatrix: matrix must be square");
    const double scale = m_.cwiseAbs().maxCoeff();
    if (!std::isfinite(scale))
      throw std::invalid_argument("CovarianceMatrix: non-finite entries");
    for (Eigen::Index i = 0; i < m_.rows(); ++i)
      for (Eigen::Index j = i + 1; j < m_.cols(); ++j)
        if (std::fabs(m_(i, j) - m_(j, i)) > 1e-12 * (1.0 + scale))
          throw std::invalid_argument(
              "CovarianceMatrix: not symmetric at (" + std::to_string(i) +
              ", " + std::to_string(j) + ")");
  }

  const Eigen::MatrixXd& matrix() const { return m_; }
  std::size_t order() const { return static_cast<std::size_t>(m_.rows()); }

 private:
  Eigen::MatrixXd m_;
};

// (k+1) x (k+1) covariance of a window of the process with spectrum S,
// T_ij = R(|i - j|).  Eigenvalues of such sections always lie between
// min S and max S.
inline CovarianceMatrix toeplitz_covariance(const SpectrumSamples& s,
                                            std::size_t horizon_k) {
  if (horizon_k + 1 > s.size() / 2)
    throw std::invalid_argument(
        "toeplitz_covariance: horizon " + std::to_string(horizon_k) +
        " needs a grid of at least " + std::to_string(2 * (horizon_k + 1)) +
        " bins");
  const std::vector<double> r = autocovariance_from_spectrum(s, horizon_k);
  const Eigen::Index m = static_cast<Eigen::Index>(horizon_k) + 1;
  Eigen::MatrixXd t(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) t(i, j) = r[std::abs(i - j)];
  return CovarianceMatrix(std::move(t));
}

// Welch periodogram average with a periodic Hann window, normalized by
// the window energy so that white noise of variance v estimates the
// flat spectrum S == v.  Bins j and n - j are averaged, which both
// enforces the symmetry invariant and halves the estimator variance.
inline SpectrumSamples welch_estimate(std::span<const double> series,
                                      std::size_t segment_len, double overlap,
                                      const FrequencyGrid& grid) {
  const std::size_t n = grid.size();
  if (segment_len != n)
    throw std::invalid_argument(
        "welch_estimate: segment length must match the grid size");
  if (!(overlap >= 0.0 && overlap < 1.0))
    throw std::invalid_argument("welch_estimate: overlap must be in [0, 1)");
  if (series.size() < 2 * n)
    throw std::invalid_argument(
        "welch_estimate: series must cover at least two segments");

  std::vector<double> window(n);
  double window_energy = 0.0;
  for (std::size_t l = 0; l < n; ++l) {
    window[l] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi *
                                      static_cast<double>(l) /
                                      static_cast<double>(n)));
    window_energy += window[l] * window[l];
  }

  const std::size_t hop = std::max<std::size_t>(
      1, static_cast<std::size_t>(
             std::lround(static_cast<double>(n) * (1.0 - overlap))));
  const std::size_t segments = (series.size() - n) / hop + 1;

  std::vector<double> psd(n, 0.0);
  std::vector<std::complex<double>> buf(n);
  for (std::size_t seg = 0; seg < segments; ++seg) {
    const std::size_t start = seg * hop;
    for (std::size_t l = 0; l < n; ++l)
      buf[l] = series[start + l] * window[l];
    const std::vector<std::complex<double>> spec = detail::fft(buf);
    for (std::size_t j = 0; j < n; ++j) psd[j] += std::norm(spec[j]);
  }
  const double scale = 1.0 / (static_cast<double>(segments) * window_energy);
  for (double& v : psd) v *= scale;
  for (std::size_t j = 1; j < n / 2; ++j) {
    const double folded = 0.5 * (psd[j] + psd[n - j]);
    psd[j] = folded;
    psd[n - j] = folded;
  }
  return SpectrumSamples(grid, std::move(psd));
}

}  // namespace spectra
}  // namespace stealthcurve
