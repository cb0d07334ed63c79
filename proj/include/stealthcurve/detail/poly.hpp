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
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace stealthcurve {
namespace detail {

// Polynomials are coefficient vectors in descending powers, so
// {1.0, -0.5} stands for z - 0.5.

inline std::complex<double> polyval(std::span<const double> coeffs,
                                    std::complex<double> z) {
  std::complex<double> acc(0.0, 0.0);
  for (double c : coeffs) acc = acc * z + c;
  return acc;
}

inline std::vector<double> polymul(std::span<const double> a,
                                   std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

// Adds two polynomials, aligning constant terms (the right end).
inline std::vector<double> polyadd(std::span<const double> a,
                                   std::span<const double> b) {
  const std::size_t n = std::max(a.size(), b.size());
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) out[n - a.size() + i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) out[n - b.size() + i] += b[i];
  return out;
}

inline std::vector<double> trim_leading_zeros(std::span<const double> coeffs) {
  std::size_t first = 0;
  while (first < coeffs.size() && coeffs[first] == 0.0) ++first;
  return std::vector<double>(coeffs.begin() + first, coeffs.end());
}

// Roots via the companion matrix of the monic normalization.
inline std::vector<std::complex<double>> polynomial_roots(
    std::span<const double> coeffs) {
  const std::vector<double> p = trim_leading_zeros(coeffs);
  if (p.empty())
    throw std::invalid_argument("polynomial_roots: zero polynomial");
  const std::size_t deg = p.size() - 1;
  if (deg == 0) return {};
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(deg, deg);
  for (std::size_t j = 0; j < deg; ++j) companion(0, j) = -p[j + 1] / p[0];
  for (std::size_t i = 1; i < deg; ++i) companion(i, i - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  std::vector<std::complex<double>> roots(deg);
  for (std::size_t i = 0; i < deg; ++i) roots[i] = solver.eigenvalues()(i);
  return roots;
}

}  // namespace detail
}  // namespace stealthcurve
