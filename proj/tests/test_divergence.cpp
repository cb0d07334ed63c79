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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "stealthcurve/divergence.hpp"
#include "stealthcurve/lti.hpp"
#include "stealthcurve/spectra.hpp"

namespace sc = stealthcurve;
using sc::FrequencyGrid;
using sc::divergence::DivergenceValue;
using sc::spectra::CovarianceMatrix;
using sc::spectra::SpectrumSamples;

namespace {

CovarianceMatrix random_spd(std::mt19937& gen, int m) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd factor(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) factor(i, j) = normal(gen);
  Eigen::MatrixXd spd = factor * factor.transpose() +
                        0.1 * Eigen::MatrixXd::Identity(m, m);
  return CovarianceMatrix(spd);
}

Eigen::MatrixXd random_orthogonal(std::mt19937& gen, int m) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd raw(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) raw(i, j) = normal(gen);
  return Eigen::HouseholderQR<Eigen::MatrixXd>(raw).householderQ();
}

}  // namespace

TEST_CASE("divergence value cannot go negative") {
  CHECK_NOTHROW(DivergenceValue(0.0));
  CHECK_THROWS_AS(DivergenceValue(-1e-6), std::logic_error);
  CHECK_THROWS_AS(DivergenceValue(std::numeric_limits<double>::quiet_NaN()),
                  std::logic_error);
}

TEST_CASE("scalar Gaussian divergence") {
  SECTION("pinned halved-ratio value") {
    const double expected = 0.5 * (0.5 - std::log(0.5) - 1.0);
    CHECK(sc::divergence::scalar_gaussian_kl(4.0, 2.0).nats() ==
          Catch::Approx(expected).margin(1e-15));
  }

  SECTION("equal variances give zero") {
    CHECK(sc::divergence::scalar_gaussian_kl(3.7, 3.7).nats() == 0.0);
  }

  SECTION("degenerate arguments") {
    CHECK_THROWS_AS(sc::divergence::scalar_gaussian_kl(0.0, 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(sc::divergence::scalar_gaussian_kl(1.0, -1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(sc::divergence::scalar_gaussian_kl(1.0, 0.0),
                    std::domain_error);
  }
}

TEST_CASE("matrix Gaussian divergence") {
  SECTION("identical covariances give zero") {
    const CovarianceMatrix eye(Eigen::MatrixXd::Identity(4, 4));
    CHECK(sc::divergence::gaussian_kl(eye, eye).nats() ==
          Catch::Approx(0.0).margin(1e-14));
  }

  SECTION("1x1 case matches the scalar formula") {
    const CovarianceMatrix x(Eigen::MatrixXd::Constant(1, 1, 4.0));
    const CovarianceMatrix y(Eigen::MatrixXd::Constant(1, 1, 2.0));
    CHECK(sc::divergence::gaussian_kl(x, y).nats() ==
          Catch::Approx(sc::divergence::scalar_gaussian_kl(4.0, 2.0).nats())
              .margin(1e-14));
  }

  SECTION("dimension mismatch is rejected") {
    const CovarianceMatrix x(Eigen::MatrixXd::Identity(2, 2));
    const CovarianceMatrix y(Eigen::MatrixXd::Identity(3, 3));
    CHECK_THROWS_AS(sc::divergence::gaussian_kl(x, y), std::invalid_argument);
  }

  SECTION("singular reference covariance is rejected") {
    Eigen::MatrixXd sing = Eigen::MatrixXd::Zero(2, 2);
    sing(0, 0) = 1.0;
    CHECK_THROWS_AS(sc::divergence::gaussian_kl(CovarianceMatrix(sing),
                                                CovarianceMatrix(sing)),
                    std::invalid_argument);
  }

  SECTION("rank-deficient test covariance diverges") {
    const CovarianceMatrix x(Eigen::MatrixXd::Identity(2, 2));
    Eigen::MatrixXd flat = Eigen::MatrixXd::Zero(2, 2);
    flat(0, 0) = 1.0;
    CHECK_THROWS_AS(
        sc::divergence::gaussian_kl(x, CovarianceMatrix(flat)),
        std::domain_error);
  }

  SECTION("additivity over independent blocks") {
    std::mt19937 gen(42);
    for (int trial = 0; trial < 10; ++trial) {
      const CovarianceMatrix x1 = random_spd(gen, 3);
      const CovarianceMatrix y1 = random_spd(gen, 3);
      const CovarianceMatrix x2 = random_spd(gen, 2);
      const CovarianceMatrix y2 = random_spd(gen, 2);
      Eigen::MatrixXd bx = Eigen::MatrixXd::Zero(5, 5);
      Eigen::MatrixXd by = Eigen::MatrixXd::Zero(5, 5);
      bx.topLeftCorner(3, 3) = x1.matrix();
      bx.bottomRightCorner(2, 2) = x2.matrix();
      by.topLeftCorner(3, 3) = y1.matrix();
      by.bottomRightCorner(2, 2) = y2.matrix();
      const double whole =
          sc::divergence::gaussian_kl(CovarianceMatrix(bx),
                                      CovarianceMatrix(by))
              .nats();
      const double parts = sc::divergence::gaussian_kl(x1, y1).nats() +
                           sc::divergence::gaussian_kl(x2, y2).nats();
      CHECK(whole == Catch::Approx(parts).margin(1e-10));
    }
  }

  SECTION("invariance under a shared orthogonal change of basis") {
    std::mt19937 gen(7);
    for (int trial = 0; trial < 10; ++trial) {
      const CovarianceMatrix x = random_spd(gen, 4);
      const CovarianceMatrix y = random_spd(gen, 4);
      const Eigen::MatrixXd q = random_orthogonal(gen, 4);
      const CovarianceMatrix xq(q * x.matrix() * q.transpose());
      const CovarianceMatrix yq(q * y.matrix() * q.transpose());
      CHECK(sc::divergence::gaussian_kl(xq, yq).nats() ==
            Catch::Approx(sc::divergence::gaussian_kl(x, y).nats())
                .margin(1e-10));
    }
  }
}

TEST_CASE("Itakura-Saito divergence between spectra") {
  const FrequencyGrid grid(256);
  const SpectrumSamples one = SpectrumSamples::constant(grid, 1.0);
  const SpectrumSamples two = SpectrumSamples::constant(grid, 2.0);

  SECTION("pinned constant-ratio values") {
    CHECK(sc::divergence::itakura_saito(one, two).nats() ==
          Catch::Approx(1.0 - std::log(2.0)).margin(1e-12));
    const SpectrumSamples scaled = SpectrumSamples::constant(grid, 1.1);
    CHECK(sc::divergence::itakura_saito(one, scaled).nats() ==
          Catch::Approx(0.1 - std::log(1.1)).margin(1e-12));
  }

  SECTION("identical spectra give zero") {
    CHECK(sc::divergence::itakura_saito(two, two).nats() == 0.0);
  }

  SECTION("grid mismatch is rejected") {
    const SpectrumSamples other =
        SpectrumSamples::constant(FrequencyGrid(128), 1.0);
    CHECK_THROWS_AS(sc::divergence::itakura_saito(one, other),
                    std::invalid_argument);
  }

  SECTION("a base zero under test power diverges") {
    std::vector<double> base(grid.size(), 1.0);
    base[0] = 0.0;
    CHECK_THROWS_AS(
        sc::divergence::itakura_saito(SpectrumSamples(grid, base), two),
        std::domain_error);
  }

  SECTION("nonnegativity over random spectrum pairs") {
    std::mt19937 gen(1234);
    std::uniform_real_distribution<double> uniform(0.05, 5.0);
    for (int trial = 0; trial < 1000; ++trial) {
      std::vector<double> base(grid.size());
      std::vector<double> test(grid.size());
      for (std::size_t j = 0; j <= grid.size() / 2; ++j) {
        base[j] = uniform(gen);
        test[j] = uniform(gen);
        if (j > 0 && j < grid.size() / 2) {
          base[grid.size() - j] = base[j];
          test[grid.size() - j] = test[j];
        }
      }
      const double nats =
          sc::divergence::itakura_saito(SpectrumSamples(grid, base),
                                        SpectrumSamples(grid, test))
              .nats();
      CHECK(nats >= 0.0);
    }
  }
}

TEST_CASE("divergence rate of an additive deviation") {
  const FrequencyGrid grid(256);
  const SpectrumSamples s_y = SpectrumSamples::constant(grid, 2.0);

  SECTION("constant-spectrum closed form") {
    const SpectrumSamples extra = SpectrumSamples::constant(grid, 1.0);
    const double expected = 0.5 * (0.5 - std::log(1.5));
    CHECK(sc::divergence::kl_rate(s_y, extra).nats() ==
          Catch::Approx(expected).margin(1e-14));
  }

  SECTION("zero deviation gives zero rate") {
    const SpectrumSamples none = SpectrumSamples::constant(grid, 0.0);
    CHECK(sc::divergence::kl_rate(s_y, none).nats() == 0.0);
  }

  SECTION("matches half the Itakura-Saito distance to the sum") {
    const SpectrumSamples extra = SpectrumSamples::from_frequency_function(
        grid, [](double omega) { return 0.3 + 0.2 * std::cos(omega); });
    std::vector<double> sum(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) sum[j] = s_y[j] + extra[j];
    const double via_is =
        0.5 * sc::divergence::itakura_saito(s_y, SpectrumSamples(grid, sum))
                  .nats();
    CHECK(sc::divergence::kl_rate(s_y, extra).nats() ==
          Catch::Approx(via_is).margin(1e-14));
  }

  SECTION("deviation power on a silent band diverges") {
    std::vector<double> base(grid.size(), 1.0);
    base[0] = 0.0;
    const SpectrumSamples extra = SpectrumSamples::constant(grid, 0.5);
    CHECK_THROWS_AS(
        sc::divergence::kl_rate(SpectrumSamples(grid, base), extra),
        std::domain_error);
  }
}

TEST_CASE("finite-horizon divergence approaches the rate") {
  // The per-step divergence of length k+1 Toeplitz blocks converges to
  // the frequency-domain rate; at k = 511 the gap is under 1% and it
  // shrinks as the horizon grows.
  const FrequencyGrid grid(4096);
  const SpectrumSamples s_y = SpectrumSamples::from_frequency_function(
      grid, [](double omega) {
        return 0.75 / sc::lti::unit_circle_gap_squared(0.5, omega);
      });
  // Deviation with a different pole so the spectra are not
  // proportional and the finite-horizon gap is genuinely nonzero.
  const SpectrumSamples extra = SpectrumSamples::from_frequency_function(
      grid, [&](double omega) {
        return 0.3 / sc::lti::unit_circle_gap_squared(0.7, omega);
      });
  std::vector<double> sum(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) sum[j] = s_y[j] + extra[j];
  const SpectrumSamples s_sum(grid, sum);

  const double rate = sc::divergence::kl_rate(s_y, extra).nats();
  double previous_gap = std::numeric_limits<double>::infinity();
  for (std::size_t k : {63, 255, 511}) {
    const double per_step =
        sc::divergence::gaussian_kl(sc::spectra::toeplitz_covariance(s_y, k),
                                    sc::spectra::toeplitz_covariance(s_sum, k))
            .nats() /
        static_cast<double>(k + 1);
    const double gap = std::fabs(per_step - rate) / rate;
    CHECK(gap < previous_gap);
    previous_gap = gap;
  }
  CHECK(previous_gap < 0.01);
}
