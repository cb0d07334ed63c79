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

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "stealthcurve/detail/poly.hpp"
#include "stealthcurve/grid.hpp"
#include "stealthcurve/spectra.hpp"

namespace stealthcurve {
namespace lti {

// Poles within this distance of the unit circle count as unstable.
inline constexpr double kStabilityMargin = 1e-9;

// Scalar plant x_{k+1} = a x_k + b u_k + w_k, y_k = c x_k + v_k with
// process noise variance sigma_w2 and measurement noise variance
// sigma_v2.  b and c must be nonzero or the input (or the state) simply
// disappears from the loop.
class FirstOrderPlant {
 public:
  FirstOrderPlant(double a, double b, double c, double sigma_w2,
                  double sigma_v2)
      : a_(a), b_(b), c_(c), sigma_w2_(sigma_w2), sigma_v2_(sigma_v2) {
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c) ||
        !std::isfinite(sigma_w2) || !std::isfinite(sigma_v2))
      throw std::invalid_argument("FirstOrderPlant: non-finite parameter");
    if (b == 0.0) throw std::invalid_argument("FirstOrderPlant: b must be nonzero");
    if (c == 0.0) throw std::invalid_argument("FirstOrderPlant: c must be nonzero");
    if (sigma_w2 < 0.0 || sigma_v2 < 0.0)
      throw std::invalid_argument(
          "FirstOrderPlant: noise variances must be nonnegative");
  }

  double a() const { return a_; }
  double b() const { return b_; }
  double c() const { return c_; }
  double sigma_w2() const { return sigma_w2_; }
  double sigma_v2() const { return sigma_v2_; }

 private:
  double a_, b_, c_, sigma_w2_, sigma_v2_;
};

// |e^{i omega} - a|^2 without complex arithmetic.
inline double unit_circle_gap_squared(double a, double omega) {
  return 1.0 + a * a - 2.0 * a * std::cos(omega);
}

// Proper rational function in z, coefficients in descending powers.
// Leading zeros are trimmed on construction; improper fractions are
// rejected because they have no causal state-space form.
class RationalTransferFunction {
 public:
  RationalTransferFunction(std::vector<double> numerator,
                           std::vector<double> denominator)
      : num_(detail::trim_leading_zeros(numerator)),
        den_(detail::trim_leading_zeros(denominator)) {
    for (double v : numerator)
      if (!std::isfinite(v))
        throw std::invalid_argument(
            "RationalTransferFunction: non-finite numerator coefficient");
    for (double v : denominator)
      if (!std::isfinite(v))
        throw std::invalid_argument(
            "RationalTransferFunction: non-finite denominator coefficient");
    if (den_.empty())
      throw std::invalid_argument(
          "RationalTransferFunction: denominator must be nonzero");
    if (!num_.empty() && num_.size() > den_.size())
      throw std::invalid_argument(
          "RationalTransferFunction: improper (numerator degree exceeds "
          "denominator degree)");
  }

  static RationalTransferFunction constant(double gain) {
    return RationalTransferFunction({gain}, {1.0});
  }

  const std::vector<double>& numerator() const { return num_; }
  const std::vector<double>& denominator() const { return den_; }
  std::size_t order() const { return den_.size() - 1; }

  // Plain ratio evaluation; returns inf/nan on denominator zeros, which
  // sit on the unit circle only for marginally damped controllers.
  std::complex<double> evaluate(std::complex<double> z) const {
    return detail::polyval(num_, z) / detail::polyval(den_, z);
  }

 private:
  std::vector<double> num_;
  std::vector<double> den_;
};

// Closed-loop characteristic polynomial (z - a) den_K(z) + b c num_K(z)
// for the loop u = -K y around the plant.
inline std::vector<double> characteristic_polynomial(
    const FirstOrderPlant& plant, const RationalTransferFunction& k) {
  const std::vector<double> open_part =
      detail::polymul(std::vector<double>{1.0, -plant.a()}, k.denominator());
  std::vector<double> gain_part(k.numerator());
  for (double& v : gain_part) v *= plant.b() * plant.c();
  return detail::polyadd(open_part, gain_part);
}

struct StabilityReport {
  bool stable = false;
  // Closed-loop pole magnitudes, largest first.
  std::vector<double> pole_magnitudes;
};

inline StabilityReport check_closed_loop_stability(
    const FirstOrderPlant& plant, const RationalTransferFunction& k) {
  const std::vector<double> charpoly = characteristic_polynomial(plant, k);
  if (detail::trim_leading_zeros(charpoly).empty())
    throw std::invalid_argument(
        "check_closed_loop_stability: characteristic polynomial is "
        "identically zero");
  StabilityReport report;
  for (const std::complex<double>& root : detail::polynomial_roots(charpoly))
    report.pole_magnitudes.push_back(std::abs(root));
  std::sort(report.pole_magnitudes.rbegin(), report.pole_magnitudes.rend());
  report.stable = report.pole_magnitudes.empty() ||
                  report.pole_magnitudes.front() < 1.0 - kStabilityMargin;
  return report;
}

// Controllable-canonical state space of a proper rational function.
struct StateSpaceRealization {
  Eigen::MatrixXd A;
  Eigen::VectorXd B;
  Eigen::RowVectorXd C;
  double D = 0.0;

  std::size_t order() const { return static_cast<std::size_t>(A.rows()); }

  std::complex<double> transfer_at(std::complex<double> z) const {
    const Eigen::Index m = A.rows();
    if (m == 0) return D;
    Eigen::MatrixXcd zi_minus_a =
        z * Eigen::MatrixXcd::Identity(m, m) - A.cast<std::complex<double>>();
    const Eigen::VectorXcd x =
        zi_minus_a.partialPivLu().solve(B.cast<std::complex<double>>());
    return (C.cast<std::complex<double>>() * x)(0) + D;
  }
};

inline StateSpaceRealization realize_controller(
    const RationalTransferFunction& k) {
  const std::size_t m = k.order();
  // Monic denominator 1, d_1, ..., d_m and numerator padded to match.
  std::vector<double> den(k.denominator());
  std::vector<double> num(m + 1, 0.0);
  const std::size_t pad = m + 1 - k.numerator().size();
  for (std::size_t i = 0; i < k.numerator().size(); ++i)
    num[pad + i] = k.numerator()[i];
  const double lead = den[0];
  for (double& v : den) v /= lead;
  for (double& v : num) v /= lead;

  StateSpaceRealization ss;
  ss.D = num[0];
  ss.A = Eigen::MatrixXd::Zero(m, m);
  ss.B = Eigen::VectorXd::Zero(m);
  ss.C = Eigen::RowVectorXd::Zero(m);
  if (m > 0) {
    for (std::size_t j = 0; j < m; ++j) ss.A(0, j) = -den[j + 1];
    for (std::size_t i = 1; i < m; ++i) ss.A(i, i - 1) = 1.0;
    ss.B(0) = 1.0;
    for (std::size_t j = 0; j < m; ++j) ss.C(j) = num[j + 1] - num[0] * den[j + 1];
  }
  return ss;
}

// Plant frequency response P(e^{i omega}) = b c / (e^{i omega} - a).
inline std::vector<std::complex<double>> plant_frequency_response(
    const FirstOrderPlant& plant, const FrequencyGrid& grid) {
  if (std::fabs(plant.a()) == 1.0)
    throw std::invalid_argument(
        "plant_frequency_response: pole on the unit circle");
  std::vector<std::complex<double>> response(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const std::complex<double> z = std::polar(1.0, grid.omega(j));
    response[j] = plant.b() * plant.c() / (z - plant.a());
  }
  return response;
}

struct OpenLoopModel {
  FirstOrderPlant plant;
  spectra::SpectrumSamples input_spectrum;
};

struct ClosedLoopModel {
  FirstOrderPlant plant;
  RationalTransferFunction controller;
};

// A plant plus the context that fixes its output statistics: either a
// stationary input spectrum (plant run open loop) or an output-feedback
// controller u = -K y.  Construction rejects configurations whose
// output process is not well defined (unstable dynamics) or degenerate
// (identically zero output spectrum).
class SystemModel {
 public:
  static SystemModel open_loop(FirstOrderPlant plant,
                               spectra::SpectrumSamples input_spectrum) {
    if (std::fabs(plant.a()) >= 1.0)
      throw std::invalid_argument(
          "SystemModel: open-loop pole |a| = " + std::to_string(plant.a()) +
          " is not stable");
    const bool silent_input =
        *std::max_element(input_spectrum.values().begin(),
                          input_spectrum.values().end()) <= 0.0;
    if (silent_input && plant.sigma_w2() == 0.0 && plant.sigma_v2() == 0.0)
      throw std::invalid_argument(
          "SystemModel: zero input spectrum and zero noise give an "
          "identically zero output spectrum");
    const double radius = std::fabs(plant.a());
    return SystemModel(
        OpenLoopModel{std::move(plant), std::move(input_spectrum)}, radius);
  }

  static SystemModel closed_loop(FirstOrderPlant plant,
                                 RationalTransferFunction controller) {
    const StabilityReport report =
        check_closed_loop_stability(plant, controller);
    if (!report.stable)
      throw std::invalid_argument(
          "SystemModel: closed loop is unstable (largest pole magnitude " +
          std::to_string(report.pole_magnitudes.front()) + ")");
    if (plant.sigma_w2() == 0.0 && plant.sigma_v2() == 0.0)
      throw std::invalid_argument(
          "SystemModel: zero noise gives an identically zero output "
          "spectrum");
    const double radius = report.pole_magnitudes.empty()
                              ? 0.0
                              : report.pole_magnitudes.front();
    return SystemModel(ClosedLoopModel{std::move(plant), std::move(controller)},
                       radius);
  }

  bool is_closed_loop() const {
    return std::holds_alternative<ClosedLoopModel>(model_);
  }

  const FirstOrderPlant& plant() const {
    return is_closed_loop() ? std::get<ClosedLoopModel>(model_).plant
                            : std::get<OpenLoopModel>(model_).plant;
  }

  const spectra::SpectrumSamples& input_spectrum() const {
    if (is_closed_loop())
      throw std::logic_error("SystemModel: closed-loop model has no input "
                             "spectrum");
    return std::get<OpenLoopModel>(model_).input_spectrum;
  }

  const RationalTransferFunction& controller() const {
    if (!is_closed_loop())
      throw std::logic_error("SystemModel: open-loop model has no controller");
    return std::get<ClosedLoopModel>(model_).controller;
  }

  // Largest pole magnitude; strictly below one by construction.  Decides
  // how long simulated transients take to die out.
  double spectral_radius() const { return spectral_radius_; }

 private:
  SystemModel(std::variant<OpenLoopModel, ClosedLoopModel> model,
              double spectral_radius)
      : model_(std::move(model)), spectral_radius_(spectral_radius) {}

  std::variant<OpenLoopModel, ClosedLoopModel> model_;
  double spectral_radius_;
};

// Squared magnitude of the transfer function from an input-side
// injection to the output, sampled on the grid.  Open loop this is
// |P|^2; under feedback the loop shapes it by den_K / charpoly.
inline std::vector<double> attack_path_gain_squared(const SystemModel& model,
                                                    const FrequencyGrid& grid) {
  const std::size_t n = grid.size();
  const FirstOrderPlant& plant = model.plant();
  const double bc2 = plant.b() * plant.b() * plant.c() * plant.c();
  std::vector<double> gain(n);
  auto fill_symmetric = [&](auto&& f) {
    for (std::size_t j = 0; j <= n / 2; ++j) {
      gain[j] = f(grid.omega(j));
      if (j > 0 && j < n / 2) gain[n - j] = gain[j];
    }
  };
  if (!model.is_closed_loop()) {
    fill_symmetric([&](double omega) {
      return bc2 / unit_circle_gap_squared(plant.a(), omega);
    });
  } else {
    const std::vector<double> charpoly =
        characteristic_polynomial(plant, model.controller());
    const std::vector<double>& den_k = model.controller().denominator();
    fill_symmetric([&](double omega) {
      const std::complex<double> z = std::polar(1.0, omega);
      return bc2 * std::norm(detail::polyval(den_k, z)) /
             std::norm(detail::polyval(charpoly, z));
    });
  }
  return gain;
}

}  // namespace lti
}  // namespace stealthcurve
