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
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>

namespace stealthcurve {

// Uniform angular grid omega_j = 2 pi j / n on [0, 2 pi).  All spectra,
// quadratures and FFTs in this library share one grid, which keeps the
// trapezoid rule exact for band-limited integrands and makes spectra
// from different modules directly comparable.
class FrequencyGrid {
 public:
  static constexpr std::size_t kMinSize = 64;

  explicit FrequencyGrid(std::size_t n) : n_(n) {
    if (!std::has_single_bit(n) || n < kMinSize)
      throw std::invalid_argument(
          "FrequencyGrid: size must be a power of two >= " +
          std::to_string(kMinSize) + ", got " + std::to_string(n));
  }

  std::size_t size() const { return n_; }

  double omega(std::size_t j) const {
    return 2.0 * std::numbers::pi * static_cast<double>(j) /
           static_cast<double>(n_);
  }

  friend bool operator==(const FrequencyGrid& a, const FrequencyGrid& b) {
    return a.n_ == b.n_;
  }
  friend bool operator!=(const FrequencyGrid& a, const FrequencyGrid& b) {
    return !(a == b);
  }

 private:
  std::size_t n_;
};

}  // namespace stealthcurve
