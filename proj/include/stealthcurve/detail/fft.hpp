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
#include <vector>

#include <unsupported/Eigen/FFT>

namespace stealthcurve {
namespace detail {

// Thin wrappers over Eigen's FFT (kissfft backend). Forward uses the
// e^{-i 2 pi k t / n} kernel, inverse applies the 1/n scaling, so
// ifft(fft(x)) == x up to rounding. The engine object is reused because
// it caches twiddle plans per transform size.

inline Eigen::FFT<double>& fft_engine() {
  thread_local Eigen::FFT<double> engine;
  return engine;
}

inline std::vector<std::complex<double>> fft(
    const std::vector<std::complex<double>>& in) {
  std::vector<std::complex<double>> out;
  fft_engine().fwd(out, in);
  return out;
}

inline std::vector<std::complex<double>> ifft(
    const std::vector<std::complex<double>>& in) {
  std::vector<std::complex<double>> out;
  fft_engine().inv(out, in);
  return out;
}

}  // namespace detail
}  // namespace stealthcurve
