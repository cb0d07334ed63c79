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
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "stealthcurve/errors.hpp"
#include "stealthcurve/spectra.hpp"

namespace stealthcurve {
namespace divergence {

// Spectrum bins at or below this magnitude count as exact zeros when
// they appear in a denominator or under a logarithm.
inline constexpr double kSpectrumFloor = 1e-300;

// A Kullback-Leibler divergence (or divergence rate) in nats.  The
// quantity is nonnegative by definition; the constructor enforces it so
// a negative value anywhere downstream is loudly a bug, not a silent
// rounding artifact.
class DivergenceValue {
 public:
  explicit DivergenceValue(double nats) : nats_(nats) {
    if (std::isnan(nats) || nats < 0.0)
      throw std::logic_error("DivergenceValue: negative or NaN divergence (" +
                             std::to_string(nats) + ")");
  }

  double nats() const { return nats_; }

 private:
  double nats_;
};

namespace internal {

// x - ln x - 1, the scalar building block of every divergence here.
// Nonnegative with equality at x = 1; the clamp absorbs the one-ulp
// negatives that correctly rounded logs can produce near x = 1.
inline double variance_mismatch(double x) {
  return std::max(0.0, x - std::log(x) - 1.0);
}

inline double variance_mismatch_from_ratio_excess(double r) {
  // (1 + r) - ln(1 + r) - 1 evaluated without forming 1 + r.
  return std::max(0.0, r - std::log1p(r));
}

}  // namespace internal

// KL divergence between zero-mean Gaussians N(0, var_x) and N(0, var_y),
// measuring how well an observer modeling var_x explains samples with
// variance var_y.
inline DivergenceValue scalar_gaussian_kl(double var_x, double var_y) {
  if (!(var_x > 0.0) || !std::isfinite(var_x))
    throw std::invalid_argument("scalar_gaussian_kl: var_x must be positive");
  if (var_y < 0.0 || !std::isfinite(var_y))
    throw std::invalid_argument(
        "scalar_gaussian_kl: var_y must be nonnegative");
  if (var_y <= kSpectrumFloor * var_x)
    throw std::domain_error(
        "scalar_gaussian_kl: var_y is zero, the log diverges");
  return DivergenceValue(0.5 * internal::variance_mismatch(var_y / var_x));
}

// KL divergence between zero-mean Gaussians with covariances sigma_x
// (the model) and sigma_y (the data):
//   (1/2) [tr(sigma_y sigma_x^{-1}) - ln det(sigma_y sigma_x^{-1}) - m].
// Computed by whitening sigma_x and summing x - ln x - 1 over the
// eigenvalues of the whitened sigma_y; each summand is nonnegative, so
// the result cannot go negative no matter how ill-conditioned the pair.
inline DivergenceValue gaussian_kl(const spectra::CovarianceMatrix& sigma_x,
                                   const spectra::CovarianceMatrix& sigma_y) {
  if (sigma_x.order() != sigma_y.order())
    throw std::invalid_argument("gaussian_kl: dimension mismatch, " +
                                std::to_string(sigma_x.order()) + " vs " +
                                std::to_string(sigma_y.order()));
  const Eigen::Index m = static_cast<Eigen::Index>(sigma_x.order());
  if (m == 1)
    return scalar_gaussian_kl(sigma_x.matrix()(0, 0), sigma_y.matrix()(0, 0));

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_x(sigma_x.matrix());
  if (es_x.info() != Eigen::Success)
    throw SolverError("gaussian_kl: eigendecomposition of sigma_x failed");
  const Eigen::VectorXd& d = es_x.eigenvalues();
  if (d(0) <= 1e-12 * std::max(d(m - 1), 0.0) || d(0) <= 0.0)
    throw std::invalid_argument(
        "gaussian_kl: sigma_x is singular or near-singular (smallest "
        "eigenvalue " +
        std::to_string(d(0)) + ")");

  const Eigen::MatrixXd whitener = es_x.eigenvectors() *
                                   d.cwiseSqrt().cwiseInverse().asDiagonal() *
                                   es_x.eigenvectors().transpose();
  Eigen::MatrixXd whitened = whitener * sigma_y.matrix() * whitener;
  whitened = 0.5 * (whitened + whitened.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_w(whitened,
                                                      Eigen::EigenvaluesOnly);
  if (es_w.info() != Eigen::Success)
    throw SolverError("gaussian_kl: eigendecomposition of whitened sigma_y "
                      "failed");
  double nats = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double mu = es_w.eigenvalues()(i);
    if (mu <= 0.0)
      throw std::domain_error(
          "gaussian_kl: sigma_y is singular in the metric of sigma_x "
          "(whitened eigenvalue " +
          std::to_string(mu) + "), the log diverges");
    nats += internal::variance_mismatch(mu);
  }
  return DivergenceValue(0.5 * nats);
}

// Itakura-Saito divergence between sampled spectra,
//   (1/2pi) integral of [S_test/S_base - ln(S_test/S_base) - 1] d omega.
// Bins where both spectra vanish contribute zero.
inline DivergenceValue itakura_saito(const spectra::SpectrumSamples& s_base,
                                     const spectra::SpectrumSamples& s_test) {
  if (s_base.grid() != s_test.grid())
    throw std::invalid_argument("itakura_saito: spectra on different grids");
  const std::size_t n = s_base.size();
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const bool base_zero = s_base[j] <= kSpectrumFloor;
    const bool test_zero = s_test[j] <= kSpectrumFloor;
    if (base_zero && test_zero) continue;
    if (base_zero)
      throw std::domain_error(
          "itakura_saito: base spectrum vanishes at bin " + std::to_string(j) +
          " where the test spectrum does not");
    if (test_zero)
      throw std::domain_error(
          "itakura_saito: test spectrum vanishes at bin " + std::to_string(j) +
          ", the log diverges");
    sum += internal::variance_mismatch(s_test[j] / s_base[j]);
  }
  return DivergenceValue(sum / static_cast<double>(n));
}

// KL divergence rate between the nominal output process (spectrum s_y)
// and the attacked one (spectrum s_y + s_extra):
//   (1/2pi) integral of (1/2) [r - ln(1 + r)] d omega,  r = s_extra/s_y.
// Equals half the Itakura-Saito divergence from s_y to s_y + s_extra.
inline DivergenceValue kl_rate(const spectra::SpectrumSamples& s_y,
                               const spectra::SpectrumSamples& s_extra) {
  if (s_y.grid() != s_extra.grid())
    throw std::invalid_argument("kl_rate: spectra on different grids");
  const std::size_t n = s_y.size();
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const bool y_zero = s_y[j] <= kSpectrumFloor;
    const bool extra_zero = s_extra[j] <= kSpectrumFloor;
    if (y_zero && extra_zero) continue;
    if (y_zero)
      throw std::domain_error(
          "kl_rate: output spectrum vanishes at bin " + std::to_string(j) +
          " where the attack spectrum does not");
    sum += internal::variance_mismatch_from_ratio_excess(s_extra[j] / s_y[j]);
  }
  return DivergenceValue(0.5 * sum / static_cast<double>(n));
}

}  // namespace divergence
}  // namespace stealthcurve
