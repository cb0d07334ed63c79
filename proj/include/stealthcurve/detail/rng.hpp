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
#include <cstdint>
#include <numbers>
#include <random>

namespace stealthcurve {
namespace detail {

// Every stochastic quantity draws from its own generator, derived from
// the user seed and a fixed stream id.  Adding draws to one stream
// therefore never shifts the samples of another, and paired runs that
// share a seed see identical noise.
enum class NoiseStream : std::uint32_t {
  kProcessNoise = 0,
  kMeasurementNoise = 1,
  kInput = 2,
  kAttack = 3,
};

// `lane` separates otherwise identical streams, e.g. one attack
// realization per sweep target.
inline std::mt19937_64 make_stream_generator(std::uint64_t seed,
                                             NoiseStream stream,
                                             std::uint32_t lane = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), lane};
  return std::mt19937_64(seq);
}

// Box-Muller standard normal sampler.  std::normal_distribution is
// avoided on purpose: its algorithm is implementation-defined, and seeds
// are part of the output contract here.
class GaussianSampler {
 public:
  explicit GaussianSampler(std::mt19937_64 gen) : gen_(std::move(gen)) {}

  double operator()() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_open01();
    const double u2 = uniform_open01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  // Uniform on (0, 1]; the log above needs to stay finite.
  double uniform_open01() {
    return static_cast<double>((gen_() >> 11) + 1) * 0x1.0p-53;
  }

  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace detail
}  // namespace stealthcurve
