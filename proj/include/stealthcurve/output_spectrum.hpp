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

#include <complex>
#include <stdexcept>
#include <vector>

#include "stealthcurve/detail/poly.hpp"
#include "stealthcurve/grid.hpp"
#include "stealthcurve/lti.hpp"
#include "stealthcurve/spectra.hpp"

namespace stealthcurve {
namespace spectra {

// Stationary output spectrum S_y of a model.
//
// Open loop the input and both noises add up independently:
//   S_y = (b^2 c^2 S_u + c^2 sigma_w^2) / |e^{i omega} - a|^2 + sigma_v^2.
//
// Under feedback u = -K y the loop transfer reshapes both noises:
//   S_y = (|c den_K|^2 sigma_w^2 + |(z - a) den_K|^2 sigma_v^2) / |q|^2
// with q the characteristic polynomial, all evaluated at z = e^{i omega}.
// The polynomial form stays finite even when den_K has unit-circle
// zeros, where the controller's own frequency response blows up.
inline SpectrumSamples output_spectrum(const lti::SystemModel& model,
                                       const FrequencyGrid& grid) {
  const lti::FirstOrderPlant& plant = model.plant();
  if (!model.is_closed_loop()) {
    const SpectrumSamples& s_u = model.input_spectrum();
    if (s_u.grid() != grid)
      throw std::invalid_argument(
          "output_spectrum: input spectrum lives on a different grid");
    const double b2c2 = plant.b() * plant.b() * plant.c() * plant.c();
    const double c2w = plant.c() * plant.c() * plant.sigma_w2();
    const std::size_t n = grid.size();
    std::vector<double> values(n);
    for (std::size_t j = 0; j <= n / 2; ++j) {
      values[j] = (b2c2 * s_u[j] + c2w) /
                      lti::unit_circle_gap_squared(plant.a(), grid.omega(j)) +
                  plant.sigma_v2();
      if (j > 0 && j < n / 2) values[n - j] = values[j];
    }
    return SpectrumSamples(grid, std::move(values));
  }

  const std::vector<double> charpoly =
      lti::characteristic_polynomial(plant, model.controller());
  const std::vector<double>& den_k = model.controller().denominator();
  const std::vector<double> z_minus_a_den_k =
      detail::polymul(std::vector<double>{1.0, -plant.a()}, den_k);
  const double c2 = plant.c() * plant.c();
  return SpectrumSamples::from_frequency_function(grid, [&](double omega) {
    const std::complex<double> z = std::polar(1.0, omega);
    const double process_part =
        c2 * plant.sigma_w2() * std::norm(detail::polyval(den_k, z));
    const double measurement_part =
        plant.sigma_v2() * std::norm(detail::polyval(z_minus_a_den_k, z));
    return (process_part + measurement_part) /
           std::norm(detail::polyval(charpoly, z));
  });
}

}  // namespace spectra
}  // namespace stealthcurve
