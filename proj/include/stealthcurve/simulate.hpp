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

#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "stealthcurve/detail/fft.hpp"
#include "stealthcurve/detail/rng.hpp"
#include "stealthcurve/grid.hpp"
#include "stealthcurve/lti.hpp"
#include "stealthcurve/spectra.hpp"

namespace stealthcurve {
namespace simulate {

// Paired nominal/attacked trajectories driven by identical noise, so
// any difference between the starred and plain arrays is caused by the
// attack alone.
struct SimulationResult {
  std::vector<double> x;       // nominal state
  std::vector<double> x_hat;   // attacked state
  std::vector<double> y;       // nominal output
  std::vector<double> y_hat;   // attacked output
  std::vector<double> attack;  // injected signal, zero when absent
  std::size_t horizon = 0;
  std::uint64_t seed = 0;
};

namespace internal {

// Draws one stationary realization of the spectrum by shaping complex
// Gaussian Fourier coefficients: bin i gets variance M * S(omega_i)
// split between a conjugate-symmetric pair, so the inverse FFT is a
// real circularly-stationary series with exactly the sampled PSD (band
// replicated onto the longer synthesis grid).  The first grid-length
// samples are dropped so the returned window never touches the seam
// where the coefficient phases were anchored.
inline std::vector<double> synthesize_with_sampler(
    const spectra::SpectrumSamples& s, std::size_t length,
    detail::GaussianSampler& sample) {
  const std::size_t n = s.size();
  if (length == 0 || length % n != 0)
    throw std::invalid_argument(
        "synthesize_colored_gaussian: length must be a positive multiple of "
        "the grid size");
  const std::size_t total = std::bit_ceil(length + n);
  const std::size_t ratio = total / n;
  auto band_value = [&](std::size_t i) {
    return s[((i + ratio / 2) / ratio) % n];
  };

  const double scale = static_cast<double>(total);
  std::vector<std::complex<double>> coeffs(total);
  coeffs[0] = std::sqrt(scale * band_value(0)) * sample();
  coeffs[total / 2] = std::sqrt(scale * band_value(total / 2)) * sample();
  for (std::size_t i = 1; i < total / 2; ++i) {
    const double amp = std::sqrt(0.5 * scale * band_value(i));
    const double re = amp * sample();
    const double im = amp * sample();
    coeffs[i] = {re, im};
    coeffs[total - i] = {re, -im};
  }

  const std::vector<std::complex<double>> series = detail::ifft(coeffs);
  std::vector<double> out(length);
  for (std::size_t t = 0; t < length; ++t) out[t] = series[n + t].real();
  return out;
}

inline std::size_t burn_in_steps(double spectral_radius) {
  return static_cast<std::size_t>(
      std::ceil(10.0 / (1.0 - spectral_radius)));
}

}  // namespace internal

// Stationary colored-Gaussian series with the given spectrum.
// Deterministic per seed; uses the attack noise stream, which is the
// role this generator plays in every pipeline here.
inline std::vector<double> synthesize_colored_gaussian(
    const spectra::SpectrumSamples& s, std::size_t length, std::uint64_t seed,
    std::uint32_t lane = 0) {
  detail::GaussianSampler sample(
      detail::make_stream_generator(seed, detail::NoiseStream::kAttack, lane));
  return internal::synthesize_with_sampler(s, length, sample);
}

// Runs the model for `horizon` recorded steps after a burn-in of
// ceil(10 / (1 - spectral radius)) steps that flushes the zero initial
// condition.  The attacked copy shares u, w and v samples with the
// nominal one and injects attack[t] at the plant input from the first
// recorded step on.  An empty attack span means no attack, in which
// case x_hat == x and y_hat == y exactly.
inline SimulationResult simulate(const lti::SystemModel& model,
                                 std::span<const double> attack,
                                 std::size_t horizon, std::uint64_t seed) {
  if (horizon == 0)
    throw std::invalid_argument("simulate: horizon must be positive");
  if (!attack.empty() && attack.size() < horizon)
    throw std::invalid_argument(
        "simulate: attack series shorter than the horizon (" +
        std::to_string(attack.size()) + " < " + std::to_string(horizon) + ")");

  const lti::FirstOrderPlant& plant = model.plant();
  const std::size_t burn = internal::burn_in_steps(model.spectral_radius());
  const std::size_t total = burn + horizon;
  const double sigma_w = std::sqrt(plant.sigma_w2());
  const double sigma_v = std::sqrt(plant.sigma_v2());

  detail::GaussianSampler sample_w(detail::make_stream_generator(
      seed, detail::NoiseStream::kProcessNoise));
  detail::GaussianSampler sample_v(detail::make_stream_generator(
      seed, detail::NoiseStream::kMeasurementNoise));

  // Open loop needs the exogenous input as one stationary series.
  std::vector<double> input;
  if (!model.is_closed_loop()) {
    const std::size_t n = model.input_spectrum().size();
    const std::size_t padded = ((total + n - 1) / n) * n;
    detail::GaussianSampler sample_u(detail::make_stream_generator(
        seed, detail::NoiseStream::kInput));
    input = internal::synthesize_with_sampler(model.input_spectrum(), padded,
                                              sample_u);
  }

  SimulationResult result;
  result.horizon = horizon;
  result.seed = seed;
  result.x.reserve(horizon);
  result.x_hat.reserve(horizon);
  result.y.reserve(horizon);
  result.y_hat.reserve(horizon);
  result.attack.reserve(horizon);

  const double a = plant.a();
  const double b = plant.b();
  const double c = plant.c();
  double x = 0.0;
  double x_hat = 0.0;

  if (!model.is_closed_loop()) {
    for (std::size_t t = 0; t < total; ++t) {
      const double w = sigma_w * sample_w();
      const double v = sigma_v * sample_v();
      const double n_t =
          (t >= burn && !attack.empty()) ? attack[t - burn] : 0.0;
      const double y = c * x + v;
      const double y_hat = c * x_hat + v;
      if (t >= burn) {
        result.x.push_back(x);
        result.x_hat.push_back(x_hat);
        result.y.push_back(y);
        result.y_hat.push_back(y_hat);
        result.attack.push_back(n_t);
      }
      const double u = input[t];
      x = a * x + b * u + w;
      x_hat = a * x_hat + b * (u + n_t) + w;
    }
    return result;
  }

  const lti::StateSpaceRealization controller =
      lti::realize_controller(model.controller());
  const Eigen::Index m = controller.A.rows();
  Eigen::VectorXd xi = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd xi_hat = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd xi_next(m);
  for (std::size_t t = 0; t < total; ++t) {
    const double w = sigma_w * sample_w();
    const double v = sigma_v * sample_v();
    const double n_t = (t >= burn && !attack.empty()) ? attack[t - burn] : 0.0;
    const double y = c * x + v;
    const double y_hat = c * x_hat + v;
    const double u = -((m > 0 ? (controller.C * xi)(0) : 0.0) +
                       controller.D * y);
    const double u_hat = -((m > 0 ? (controller.C * xi_hat)(0) : 0.0) +
                           controller.D * y_hat);
    if (t >= burn) {
      result.x.push_back(x);
      result.x_hat.push_back(x_hat);
      result.y.push_back(y);
      result.y_hat.push_back(y_hat);
      result.attack.push_back(n_t);
    }
    x = a * x + b * u + w;
    x_hat = a * x_hat + b * (u_hat + n_t) + w;
    if (m > 0) {
      xi_next.noalias() = controller.A * xi;
      xi_next.noalias() += controller.B * y;
      xi = xi_next;
      xi_next.noalias() = controller.A * xi_hat;
      xi_next.noalias() += controller.B * y_hat;
      xi_hat = xi_next;
    }
  }
  return result;
}

// Sample mean-square state deviation caused by the attack.
inline double estimate_distortion(const SimulationResult& result) {
  if (result.x.empty())
    throw std::invalid_argument("estimate_distortion: empty trajectory");
  double sum = 0.0;
  for (std::size_t t = 0; t < result.x.size(); ++t) {
    const double d = result.x_hat[t] - result.x[t];
    sum += d * d;
  }
  return sum / static_cast<double>(result.x.size());
}

// Sample mean-square output deviation; for the scalar plant this should
// track c^2 times the state deviation.
inline double estimate_output_distortion(const SimulationResult& result) {
  if (result.y.empty())
    throw std::invalid_argument("estimate_output_distortion: empty trajectory");
  double sum = 0.0;
  for (std::size_t t = 0; t < result.y.size(); ++t) {
    const double d = result.y_hat[t] - result.y[t];
    sum += d * d;
  }
  return sum / static_cast<double>(result.y.size());
}

}  // namespace simulate
}  // namespace stealthcurve
