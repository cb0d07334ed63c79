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
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "stealthcurve/detail/bisect.hpp"
#include "stealthcurve/divergence.hpp"
#include "stealthcurve/errors.hpp"
#include "stealthcurve/grid.hpp"
#include "stealthcurve/lti.hpp"
#include "stealthcurve/output_spectrum.hpp"
#include "stealthcurve/spectra.hpp"

namespace stealthcurve {
namespace tradeoff {

// Solver residuals are accepted up to this relative tolerance.
inline constexpr double kResidualTolerance = 1e-10;

// The bracket for the multiplier stops this far short of 1/max(S), the
// point where the stealthiest attack spectrum blows up.
inline constexpr double kBracketMargin = 1e-9;

// Longest horizon the dense finite-horizon oracle accepts; eigensolving
// bigger Toeplitz sections costs minutes and the Szego limit has long
// converged by then.
inline constexpr std::size_t kMaxOracleHorizon = 8191;

enum class TargetKind {
  kDistortion,  // target is the mean-square state deviation D
  kKlRate,      // target is the stealthiness budget in nats per step
};

// One requested operating point of the stealthiness-distortion curve.
struct AttackTarget {
  TargetKind kind;
  double value;

  static AttackTarget distortion(double d) {
    return {TargetKind::kDistortion, d};
  }
  static AttackTarget kl_budget(double r) { return {TargetKind::kKlRate, r}; }
};

// A solved operating point.  `output_deviation_spectrum` is the PSD the
// attack adds on top of S_y at the output; `attack_spectrum` is the PSD
// of the signal actually injected at the plant input to cause it.
struct TradeoffPoint {
  double distortion;
  double zeta;
  divergence::DivergenceValue kl_rate;
  spectra::SpectrumSamples output_deviation_spectrum;
  spectra::SpectrumSamples attack_spectrum;
};

struct CurveRow {
  double target;
  double distortion;
  double zeta;
  double kl_rate;
};

struct CurveTable {
  TargetKind kind;
  std::vector<CurveRow> rows;
};

// Water-filling over independent Gaussian channels with nominal
// variances `eigenvalues`: the cheapest-to-detect split of a total
// perturbation budget puts zeta lambda_i^2 / (1 - zeta lambda_i) into
// channel i.
struct WaterfillAllocation {
  double zeta;
  std::vector<double> allocations;
  // Total KL cost of the allocation, in nats (not per channel).
  double kl_nats;
};

namespace internal {

inline double max_positive_bin(std::span<const double> values,
                               const std::string& label) {
  double max_value = 0.0;
  for (double v : values) max_value = std::max(max_value, v);
  if (max_value <= divergence::kSpectrumFloor)
    throw std::invalid_argument(label + ": spectrum is identically zero");
  return max_value;
}

// Mean of zeta S^2 / (1 - zeta S), the output energy of the stealthiest
// attack at multiplier zeta.  Returns +inf close to the bracket edge.
inline double deviation_energy(std::span<const double> s, double zeta) {
  double sum = 0.0;
  for (double v : s) {
    if (v <= divergence::kSpectrumFloor) continue;
    const double gap = 1.0 - zeta * v;
    if (gap <= 0.0) return std::numeric_limits<double>::infinity();
    sum += zeta * v * v / gap;
  }
  return sum / static_cast<double>(s.size());
}

// Mean of (1/2) [zeta S / (1 - zeta S) + ln(1 - zeta S)], the KL rate
// of the stealthiest attack at multiplier zeta.
inline double deviation_kl(std::span<const double> s, double zeta) {
  double sum = 0.0;
  for (double v : s) {
    if (v <= divergence::kSpectrumFloor) continue;
    const double gap = 1.0 - zeta * v;
    if (gap <= 0.0) return std::numeric_limits<double>::infinity();
    sum += std::max(0.0, zeta * v / gap + std::log(gap));
  }
  return 0.5 * sum / static_cast<double>(s.size());
}

inline void check_residual(double achieved, double budget,
                           const std::string& label) {
  if (!(std::fabs(achieved - budget) <= kResidualTolerance * budget))
    throw SolverError(label + ": residual " +
                      std::to_string(achieved - budget) +
                      " exceeds tolerance at budget " + std::to_string(budget));
}

}  // namespace internal

// Finds the multiplier zeta at which the stealthiest attack against an
// output with spectrum s_y produces mean-square output deviation
// `output_budget` (c^2 times the state deviation for a scalar plant).
// The energy map is strictly increasing on (0, 1/max S_y) and spans
// (0, inf), so the root is unique.
inline double solve_zeta_for_distortion(const spectra::SpectrumSamples& s_y,
                                        double output_budget) {
  const double s_max =
      internal::max_positive_bin(s_y.values(), "solve_zeta_for_distortion");
  const double hi = (1.0 - kBracketMargin) / s_max;
  const double zeta = detail::bisect_increasing(
      [&](double z) { return internal::deviation_energy(s_y.values(), z); },
      output_budget, hi, "solve_zeta_for_distortion");
  internal::check_residual(internal::deviation_energy(s_y.values(), zeta),
                           output_budget, "solve_zeta_for_distortion");
  return zeta;
}

// Dual form: finds the multiplier at which the stealthiest attack
// spends exactly `kl_budget` nats per step.
inline double solve_zeta_for_kl(const spectra::SpectrumSamples& s_y,
                                double kl_budget) {
  const double s_max =
      internal::max_positive_bin(s_y.values(), "solve_zeta_for_kl");
  const double hi = (1.0 - kBracketMargin) / s_max;
  const double zeta = detail::bisect_increasing(
      [&](double z) { return internal::deviation_kl(s_y.values(), z); },
      kl_budget, hi, "solve_zeta_for_kl");
  internal::check_residual(internal::deviation_kl(s_y.values(), zeta),
                           kl_budget, "solve_zeta_for_kl");
  return zeta;
}

namespace internal {

inline TradeoffPoint attack_point_for_spectrum(
    const spectra::SpectrumSamples& s_y, std::span<const double> gain2,
    double c2, AttackTarget target) {
  if (!(target.value > 0.0) || !std::isfinite(target.value))
    throw std::invalid_argument(
        "worst_case_attack: target must be positive and finite");
  const double zeta = target.kind == TargetKind::kDistortion
                          ? solve_zeta_for_distortion(s_y, c2 * target.value)
                          : solve_zeta_for_kl(s_y, target.value);

  const std::size_t n = s_y.size();
  std::vector<double> deviation(n, 0.0);
  std::vector<double> injected(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const double v = s_y[j];
    if (v <= divergence::kSpectrumFloor) continue;
    deviation[j] = zeta * v * v / (1.0 - zeta * v);
    if (gain2[j] <= divergence::kSpectrumFloor)
      throw SolverError(
          "worst_case_attack: attack path gain vanishes at bin " +
          std::to_string(j) +
          ", the required input energy would be unbounded");
    injected[j] = deviation[j] / gain2[j];
  }
  spectra::SpectrumSamples s_deviation(s_y.grid(), std::move(deviation));
  spectra::SpectrumSamples s_injected(s_y.grid(), std::move(injected));
  divergence::DivergenceValue kl = divergence::kl_rate(s_y, s_deviation);
  const double distortion = spectra::integrate_spectrum(s_deviation) / c2;
  return TradeoffPoint{distortion, zeta, kl, std::move(s_deviation),
                       std::move(s_injected)};
}

}  // namespace internal

// Solves one operating point: the attack spectrum that maximizes state
// distortion per KL-rate budget (or minimizes KL rate per distortion
// budget; the two sweeps trace the same curve from opposite ends).
inline TradeoffPoint worst_case_attack(const lti::SystemModel& model,
                                       AttackTarget target,
                                       const FrequencyGrid& grid) {
  const spectra::SpectrumSamples s_y = spectra::output_spectrum(model, grid);
  const std::vector<double> gain2 = lti::attack_path_gain_squared(model, grid);
  const double c2 = model.plant().c() * model.plant().c();
  return internal::attack_point_for_spectrum(s_y, gain2, c2, target);
}

// Sweeps a list of targets of one kind.  Targets must be positive and
// strictly increasing; the resulting distortion and KL columns must
// strictly increase as well or the sweep aborts, because a flat or
// reversed stretch means the solver lost an operating point.
inline CurveTable tradeoff_curve(const lti::SystemModel& model,
                                 TargetKind kind,
                                 std::span<const double> targets,
                                 const FrequencyGrid& grid) {
  if (targets.empty())
    throw std::invalid_argument("tradeoff_curve: no targets");
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (!(targets[i] > 0.0) || !std::isfinite(targets[i]))
      throw std::invalid_argument("tradeoff_curve: targets must be positive");
    if (i > 0 && !(targets[i] > targets[i - 1]))
      throw std::invalid_argument(
          "tradeoff_curve: targets must strictly increase");
  }
  const spectra::SpectrumSamples s_y = spectra::output_spectrum(model, grid);
  const std::vector<double> gain2 = lti::attack_path_gain_squared(model, grid);
  const double c2 = model.plant().c() * model.plant().c();

  CurveTable table{kind, {}};
  table.rows.reserve(targets.size());
  for (double target : targets) {
    try {
      const TradeoffPoint point = internal::attack_point_for_spectrum(
          s_y, gain2, c2, AttackTarget{kind, target});
      table.rows.push_back(
          {target, point.distortion, point.zeta, point.kl_rate.nats()});
    } catch (const SolverError& err) {
      throw SolverError("tradeoff_curve: target " + std::to_string(target) +
                        ": " + err.what());
    }
  }
  for (std::size_t i = 1; i < table.rows.size(); ++i) {
    const CurveRow& prev = table.rows[i - 1];
    const CurveRow& row = table.rows[i];
    if (!(row.distortion > prev.distortion) || !(row.kl_rate > prev.kl_rate) ||
        !(row.zeta > prev.zeta))
      throw SolverError(
          "tradeoff_curve: curve is not strictly increasing between targets " +
          std::to_string(prev.target) + " and " + std::to_string(row.target));
  }
  return table;
}

// Water-filling across parallel channels.  Channels with nonpositive
// nominal variance (up to the PSD rounding tolerance) carry nothing;
// anything meaningfully negative is not a covariance spectrum.
inline WaterfillAllocation waterfill_parallel(
    std::span<const double> eigenvalues, double total_budget) {
  if (eigenvalues.empty())
    throw std::invalid_argument("waterfill_parallel: no channels");
  if (!(total_budget > 0.0) || !std::isfinite(total_budget))
    throw std::invalid_argument(
        "waterfill_parallel: budget must be positive and finite");
  double lambda_max = 0.0;
  for (double v : eigenvalues) {
    if (!std::isfinite(v))
      throw std::invalid_argument("waterfill_parallel: non-finite eigenvalue");
    lambda_max = std::max(lambda_max, v);
  }
  if (lambda_max <= divergence::kSpectrumFloor)
    throw std::invalid_argument("waterfill_parallel: all channels are dead");
  for (double v : eigenvalues)
    if (v < -1e-10 * std::max(1.0, lambda_max))
      throw std::invalid_argument(
          "waterfill_parallel: eigenvalue " + std::to_string(v) +
          " is negative beyond rounding tolerance");

  auto energy = [&](double zeta) {
    double sum = 0.0;
    for (double v : eigenvalues) {
      if (v <= divergence::kSpectrumFloor) continue;
      const double gap = 1.0 - zeta * v;
      if (gap <= 0.0) return std::numeric_limits<double>::infinity();
      sum += zeta * v * v / gap;
    }
    return sum;
  };
  const double hi = (1.0 - kBracketMargin) / lambda_max;
  const double zeta = detail::bisect_increasing(energy, total_budget, hi,
                                                "waterfill_parallel");
  internal::check_residual(energy(zeta), total_budget, "waterfill_parallel");

  WaterfillAllocation result{zeta, {}, 0.0};
  result.allocations.reserve(eigenvalues.size());
  for (double v : eigenvalues) {
    if (v <= divergence::kSpectrumFloor) {
      result.allocations.push_back(0.0);
      continue;
    }
    const double gap = 1.0 - zeta * v;
    const double allocation = zeta * v * v / gap;
    result.allocations.push_back(allocation);
    result.kl_nats += 0.5 * std::max(0.0, allocation / v + std::log(gap));
  }
  return result;
}

// Independent finite-horizon check of the asymptotic solver: the least
// detectable perturbation of a (k+1)-sample window is a water-filling
// over the eigenvalues of the window covariance, and its per-step KL
// converges to the stationary KL rate as the horizon grows.
inline double finite_horizon_min_kl(const spectra::SpectrumSamples& s_y,
                                    double output_budget,
                                    std::size_t horizon_k) {
  if (horizon_k > kMaxOracleHorizon)
    throw std::invalid_argument(
        "finite_horizon_min_kl: horizon " + std::to_string(horizon_k) +
        " exceeds the dense-solver cap " + std::to_string(kMaxOracleHorizon));
  if (!(output_budget > 0.0) || !std::isfinite(output_budget))
    throw std::invalid_argument(
        "finite_horizon_min_kl: budget must be positive and finite");
  const spectra::CovarianceMatrix cov =
      spectra::toeplitz_covariance(s_y, horizon_k);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov.matrix(),
                                                    Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw SolverError("finite_horizon_min_kl: eigendecomposition failed");
  const Eigen::VectorXd& lambda = es.eigenvalues();
  const std::size_t m = horizon_k + 1;
  if (lambda(0) < -1e-10 * std::max(1.0, lambda(lambda.size() - 1)))
    throw SolverError(
        "finite_horizon_min_kl: window covariance is indefinite (eigenvalue " +
        std::to_string(lambda(0)) + ")");
  std::vector<double> channels(lambda.data(), lambda.data() + lambda.size());
  const WaterfillAllocation allocation = waterfill_parallel(
      channels, static_cast<double>(m) * output_budget);
  return allocation.kl_nats / static_cast<double>(m);
}

}  // namespace tradeoff
}  // namespace stealthcurve
