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
//
// Release gate: eight numbered checks, one line of output each, exit 1
// if any fails.  Tolerances and runtime budgets are pinned below; they
// are contractual, not tuning knobs.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "stealthcurve/stealthcurve.hpp"

namespace sc = stealthcurve;
using sc::FrequencyGrid;
using sc::lti::FirstOrderPlant;
using sc::lti::RationalTransferFunction;
using sc::lti::SystemModel;
using sc::spectra::SpectrumSamples;
using sc::tradeoff::AttackTarget;

namespace {

// Criterion 1: constant-spectrum closed form.
constexpr double kClosedFormAbsTol = 1e-10;
constexpr double kClosedFormBudgetSec = 1.0;
// Criterion 2: finite-horizon oracle convergence.
constexpr double kOracleTol511 = 0.01;
constexpr double kOracleTol4095 = 0.005;
constexpr double kOracleBudgetSec = 60.0;
// Criterion 3: duality round trip.
constexpr double kDualityRelTol = 1e-8;
constexpr double kDualityBudgetSec = 10.0;
// Criterion 4: stationarity of the solved allocation.
constexpr double kStationarityTol = 1e-9;
constexpr int kStationarityTrials = 100;
constexpr double kStationarityBudgetSec = 30.0;
// Criteria 5 and 6: Monte Carlo distortion and stealthiness.
constexpr double kMonteCarloDistortionTol = 0.03;
constexpr double kMonteCarloKlTol = 0.10;
constexpr double kMonteCarloBudgetSec = 60.0;
constexpr std::size_t kMonteCarloHorizon = std::size_t{1} << 20;
constexpr std::uint64_t kMonteCarloSeed = 2024;
// Criterion 7: divergence identities.
constexpr double kIdentityTol = 1e-14;
constexpr int kIdentityTrials = 1000;
// Criterion 8: curve monotonicity sweeps.
constexpr std::size_t kSweepPoints = 20;
// Criteria without a contractual runtime budget still get a desk-scale
// ceiling so a hang cannot pass silently.
constexpr double kDefaultBudgetSec = 60.0;

struct MonteCarloOutcome {
  double distortion_err;
  double output_err;
  double kl_err;
};

SystemModel deadbeat_model() {
  return SystemModel::closed_loop(FirstOrderPlant(0.5, 1.0, 1.0, 1.0, 0.0),
                                  RationalTransferFunction::constant(0.5));
}

SystemModel ar1_model(const FrequencyGrid& grid) {
  return SystemModel::open_loop(FirstOrderPlant(0.5, 1.0, 1.0, 0.75, 0.0),
                                SpectrumSamples::constant(grid, 0.0));
}

SystemModel dynamic_loop_model() {
  return SystemModel::closed_loop(
      FirstOrderPlant(0.5, 1.0, 1.0, 1.0, 0.1),
      RationalTransferFunction({0.2}, {1.0, -0.4}));
}

std::vector<double> log_spaced(double lo, double hi, std::size_t count) {
  std::vector<double> out(count);
  const double step = std::log(hi / lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i)
    out[i] = lo * std::exp(step * static_cast<double>(i));
  return out;
}

bool criterion_closed_form(std::string& detail) {
  const FrequencyGrid grid(1024);
  const double d = 1.0;
  const auto point = sc::tradeoff::worst_case_attack(
      deadbeat_model(), AttackTarget::distortion(d), grid);
  // S_y == s == 1, c == 1.
  const double zeta_expected = d / (1.0 + d);
  const double kl_expected = 0.5 * (d - std::log1p(d));
  const double zeta_err = std::fabs(point.zeta - zeta_expected);
  const double kl_err = std::fabs(point.kl_rate.nats() - kl_expected);
  detail = "zeta err " + std::to_string(zeta_err) + ", kl err " +
           std::to_string(kl_err);
  return zeta_err <= kClosedFormAbsTol && kl_err <= kClosedFormAbsTol;
}

bool criterion_oracle(std::string& detail) {
  const FrequencyGrid grid(8192);
  const SystemModel model = ar1_model(grid);
  const SpectrumSamples s_y = sc::spectra::output_spectrum(model, grid);
  const auto point = sc::tradeoff::worst_case_attack(
      model, AttackTarget::distortion(1.0), grid);
  const double rate = point.kl_rate.nats();

  double rel_511 = 0.0;
  double rel_4095 = 0.0;
  double previous = std::numeric_limits<double>::infinity();
  bool decreasing = true;
  for (std::size_t k : {511, 1023, 2047, 4095}) {
    const double oracle = sc::tradeoff::finite_horizon_min_kl(s_y, 1.0, k);
    const double rel = std::fabs(oracle - rate) / rate;
    if (k == 511) rel_511 = rel;
    if (k == 4095) rel_4095 = rel;
    if (rel >= previous) decreasing = false;
    previous = rel;
  }
  detail = "rel err " + std::to_string(rel_511) + " at k=511, " +
           std::to_string(rel_4095) + " at k=4095" +
           (decreasing ? "" : ", not decreasing in k");
  return rel_511 <= kOracleTol511 && rel_4095 <= kOracleTol4095 && decreasing;
}

bool criterion_duality(std::string& detail) {
  const FrequencyGrid grid(1024);
  const SystemModel models[2] = {ar1_model(grid), dynamic_loop_model()};
  double worst = 0.0;
  for (const SystemModel& model : models) {
    for (double d : log_spaced(1e-2, 1e2, kSweepPoints)) {
      const auto forward = sc::tradeoff::worst_case_attack(
          model, AttackTarget::distortion(d), grid);
      const auto back = sc::tradeoff::worst_case_attack(
          model, AttackTarget::kl_budget(forward.kl_rate.nats()), grid);
      worst = std::max(worst, std::fabs(back.distortion - d) / d);
    }
  }
  detail = "worst relative distortion error " + std::to_string(worst);
  return worst <= kDualityRelTol;
}

bool criterion_stationarity(std::string& detail) {
  const FrequencyGrid grid(4096);
  const SystemModel model = ar1_model(grid);
  const SpectrumSamples s_y = sc::spectra::output_spectrum(model, grid);
  const auto point = sc::tradeoff::worst_case_attack(
      model, AttackTarget::distortion(1.0), grid);
  const double best = point.kl_rate.nats();
  const std::size_t half = grid.size() / 2;

  std::mt19937 gen(314159);
  std::uniform_int_distribution<std::size_t> pick_bin(1, half - 1);
  std::uniform_real_distribution<double> pick_fraction(0.05, 0.5);
  double worst_drop = 0.0;
  for (int trial = 0; trial < kStationarityTrials; ++trial) {
    const std::size_t j1 = pick_bin(gen);
    std::size_t j2 = pick_bin(gen);
    if (j2 == j1) j2 = (j2 % (half - 1)) + 1;
    std::vector<double> perturbed(point.output_deviation_spectrum.values());
    // Moving power between bin pairs keeps the total distortion fixed.
    const double delta = pick_fraction(gen) * perturbed[j1];
    perturbed[j1] -= delta;
    perturbed[grid.size() - j1] -= delta;
    perturbed[j2] += delta;
    perturbed[grid.size() - j2] += delta;
    const double kl =
        sc::divergence::kl_rate(s_y, SpectrumSamples(grid, perturbed)).nats();
    worst_drop = std::max(worst_drop, best - kl);
  }
  detail = "largest divergence drop " + std::to_string(worst_drop);
  return worst_drop <= kStationarityTol;
}

MonteCarloOutcome run_monte_carlo(const SystemModel& model,
                                  const FrequencyGrid& grid,
                                  std::uint64_t seed) {
  const auto point = sc::tradeoff::worst_case_attack(
      model, AttackTarget::distortion(1.0), grid);
  const double c2 = model.plant().c() * model.plant().c();
  const std::vector<double> attack = sc::simulate::synthesize_colored_gaussian(
      point.attack_spectrum, kMonteCarloHorizon, seed);
  const auto run =
      sc::simulate::simulate(model, attack, kMonteCarloHorizon, seed);

  const double empirical_d = sc::simulate::estimate_distortion(run);
  const double empirical_out = sc::simulate::estimate_output_distortion(run);
  std::vector<double> deviation(run.y.size());
  for (std::size_t t = 0; t < run.y.size(); ++t)
    deviation[t] = run.y_hat[t] - run.y[t];
  const SpectrumSamples s_emp =
      sc::spectra::welch_estimate(deviation, grid.size(), 0.5, grid);
  const SpectrumSamples s_y = sc::spectra::output_spectrum(model, grid);
  const double empirical_kl = sc::divergence::kl_rate(s_y, s_emp).nats();

  MonteCarloOutcome outcome;
  outcome.distortion_err = std::fabs(empirical_d - 1.0);
  outcome.output_err = std::fabs(empirical_out - c2) / c2;
  outcome.kl_err =
      std::fabs(empirical_kl - point.kl_rate.nats()) / point.kl_rate.nats();
  return outcome;
}

bool criterion_monte_carlo_distortion(const MonteCarloOutcome& deadbeat,
                                      const MonteCarloOutcome& ar1,
                                      std::string& detail) {
  detail = "distortion err " + std::to_string(deadbeat.distortion_err) +
           " (deadbeat) / " + std::to_string(ar1.distortion_err) +
           " (AR1), output err " + std::to_string(deadbeat.output_err) +
           " / " + std::to_string(ar1.output_err);
  return deadbeat.distortion_err <= kMonteCarloDistortionTol &&
         ar1.distortion_err <= kMonteCarloDistortionTol &&
         deadbeat.output_err <= kMonteCarloDistortionTol &&
         ar1.output_err <= kMonteCarloDistortionTol;
}

bool criterion_monte_carlo_stealthiness(const MonteCarloOutcome& deadbeat,
                                        const MonteCarloOutcome& ar1,
                                        std::string& detail) {
  detail = "kl err " + std::to_string(deadbeat.kl_err) + " (deadbeat) / " +
           std::to_string(ar1.kl_err) + " (AR1)";
  return deadbeat.kl_err <= kMonteCarloKlTol && ar1.kl_err <= kMonteCarloKlTol;
}

bool criterion_divergence_identities(std::string& detail) {
  const sc::spectra::CovarianceMatrix eye(Eigen::MatrixXd::Identity(4, 4));
  const double at_identity = sc::divergence::gaussian_kl(eye, eye).nats();

  const sc::spectra::CovarianceMatrix x1(Eigen::MatrixXd::Constant(1, 1, 4.0));
  const sc::spectra::CovarianceMatrix y1(Eigen::MatrixXd::Constant(1, 1, 2.0));
  const double matrix_1x1 = sc::divergence::gaussian_kl(x1, y1).nats();
  const double scalar = sc::divergence::scalar_gaussian_kl(4.0, 2.0).nats();
  const double mismatch = std::fabs(matrix_1x1 - scalar);

  const FrequencyGrid grid(256);
  std::mt19937 gen(271828);
  std::uniform_real_distribution<double> uniform(0.05, 5.0);
  int negatives = 0;
  for (int trial = 0; trial < kIdentityTrials; ++trial) {
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
    if (sc::divergence::itakura_saito(SpectrumSamples(grid, base),
                                      SpectrumSamples(grid, test))
            .nats() < 0.0)
      ++negatives;
  }
  detail = "kl(I,I) " + std::to_string(at_identity) + ", 1x1 mismatch " +
           std::to_string(mismatch) + ", negative trials " +
           std::to_string(negatives);
  return at_identity == 0.0 && mismatch <= kIdentityTol && negatives == 0;
}

bool criterion_monotonicity(std::string& detail) {
  const FrequencyGrid grid(1024);
  const SystemModel models[3] = {deadbeat_model(), ar1_model(grid),
                                 dynamic_loop_model()};
  const std::vector<double> d_targets = log_spaced(1e-2, 1e2, kSweepPoints);
  const std::vector<double> r_targets = log_spaced(1e-4, 1.0, kSweepPoints);
  for (const SystemModel& model : models) {
    const auto by_d = sc::tradeoff::tradeoff_curve(
        model, sc::tradeoff::TargetKind::kDistortion, d_targets, grid);
    for (std::size_t i = 1; i < by_d.rows.size(); ++i)
      if (!(by_d.rows[i].kl_rate > by_d.rows[i - 1].kl_rate)) {
        detail = "kl column not increasing on the distortion sweep";
        return false;
      }
    const auto by_r = sc::tradeoff::tradeoff_curve(
        model, sc::tradeoff::TargetKind::kKlRate, r_targets, grid);
    for (std::size_t i = 1; i < by_r.rows.size(); ++i)
      if (!(by_r.rows[i].distortion > by_r.rows[i - 1].distortion)) {
        detail = "distortion column not increasing on the budget sweep";
        return false;
      }
  }
  detail = "three models, both sweep directions";
  return true;
}

// Runs one criterion, enforcing its runtime budget, and prints the
// verdict line.
bool run_criterion(int number, const char* name, double budget_sec,
                   const std::function<bool(std::string&)>& body) {
  std::string detail;
  const auto start = std::chrono::steady_clock::now();
  bool ok = false;
  try {
    ok = body(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  if (elapsed > budget_sec) {
    ok = false;
    detail += " [over budget " + std::to_string(budget_sec) + " s]";
  }
  std::printf("%s criterion %d (%s): %s [%.2f s]\n", ok ? "PASS" : "FAIL",
              number, name, detail.c_str(), elapsed);
  return ok;
}

}  // namespace

int main() {
  bool all_ok = true;

  all_ok &= run_criterion(1, "constant-spectrum closed form",
                          kClosedFormBudgetSec, criterion_closed_form);
  all_ok &= run_criterion(2, "finite-horizon oracle", kOracleBudgetSec,
                          criterion_oracle);
  all_ok &= run_criterion(3, "duality round trip", kDualityBudgetSec,
                          criterion_duality);
  all_ok &= run_criterion(4, "optimality stationarity", kStationarityBudgetSec,
                          criterion_stationarity);

  // Criteria 5 and 6 share the two Monte Carlo runs and the runtime
  // budget, so the simulations happen once here.
  {
    const auto start = std::chrono::steady_clock::now();
    std::string detail5;
    std::string detail6;
    bool ok5 = false;
    bool ok6 = false;
    try {
      const FrequencyGrid grid(1024);
      const MonteCarloOutcome deadbeat =
          run_monte_carlo(deadbeat_model(), grid, kMonteCarloSeed);
      const MonteCarloOutcome ar1 =
          run_monte_carlo(ar1_model(grid), grid, kMonteCarloSeed + 1);
      ok5 = criterion_monte_carlo_distortion(deadbeat, ar1, detail5);
      ok6 = criterion_monte_carlo_stealthiness(deadbeat, ar1, detail6);
    } catch (const std::exception& e) {
      detail5 = detail6 = std::string("exception: ") + e.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (elapsed > kMonteCarloBudgetSec) {
      ok5 = ok6 = false;
      detail5 += " [over budget]";
      detail6 += " [over budget]";
    }
    std::printf("%s criterion 5 (monte carlo distortion): %s [%.2f s]\n",
                ok5 ? "PASS" : "FAIL", detail5.c_str(), elapsed);
    std::printf("%s criterion 6 (monte carlo stealthiness): %s [shared run]\n",
                ok6 ? "PASS" : "FAIL", detail6.c_str());
    all_ok &= ok5 && ok6;
  }

  all_ok &= run_criterion(7, "divergence identities", kDefaultBudgetSec,
                          criterion_divergence_identities);
  all_ok &= run_criterion(8, "curve monotonicity", kDefaultBudgetSec,
                          criterion_monotonicity);

  return all_ok ? 0 : 1;
}
