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
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "stealthcurve/csv.hpp"
#include "stealthcurve/divergence.hpp"
#include "stealthcurve/errors.hpp"
#include "stealthcurve/grid.hpp"
#include "stealthcurve/lti.hpp"
#include "stealthcurve/output_spectrum.hpp"
#include "stealthcurve/simulate.hpp"
#include "stealthcurve/spectra.hpp"
#include "stealthcurve/tradeoff.hpp"

namespace stealthcurve {
namespace cli {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kGridEnvVar = "STEALTHCURVE_GRID_N";
inline constexpr std::size_t kDefaultGridSize = 4096;
inline constexpr std::size_t kDefaultHorizon = 1u << 20;

// Exit codes: 0 success, 1 configuration or input validation failure,
// 2 solver failure, verification tolerance violation or runtime fault.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitSolver = 2;

enum class Command { kTradeoff, kVerify, kSynthesize };

struct PlantConfig {
  double a = 0.0;
  double b = 1.0;
  double c = 1.0;
  double sigma_w2 = 0.0;
  double sigma_v2 = 0.0;
};

struct ControllerConfig {
  std::vector<double> numerator;
  std::vector<double> denominator;
};

enum class InputSpectrumKind { kWhite, kAr1, kFile };

struct InputSpectrumConfig {
  InputSpectrumKind kind = InputSpectrumKind::kWhite;
  double variance = 0.0;             // white
  double pole = 0.0;                 // ar1
  double innovation_variance = 0.0;  // ar1
  std::string path;                  // file, relative to the config file
};

struct SweepConfig {
  tradeoff::TargetKind kind = tradeoff::TargetKind::kDistortion;
  std::vector<double> targets;
};

struct SimulationConfig {
  std::size_t horizon = kDefaultHorizon;
  std::uint64_t seed = 0;
  double distortion_tolerance = 0.03;
  double kl_tolerance = 0.10;
};

struct OracleConfig {
  std::vector<std::size_t> horizons;
  double tolerance = 0.01;
};

struct OutputConfig {
  std::string directory = "out";
  bool write_trajectory = false;
};

struct RunConfig {
  PlantConfig plant;
  std::optional<ControllerConfig> controller;
  std::optional<InputSpectrumConfig> input_spectrum;
  std::size_t grid_n = kDefaultGridSize;
  std::optional<SweepConfig> sweep;
  std::optional<SimulationConfig> simulation;
  std::optional<OracleConfig> oracle;
  OutputConfig output;
  // Directory input-spectrum file paths resolve against; set from the
  // config file location, not serialized.
  std::filesystem::path base_directory = ".";
};

// Command-line overrides; flags beat the environment, which beats the
// config file.
struct Overrides {
  std::optional<std::size_t> grid_n;
  std::optional<std::string> output_directory;
  std::optional<std::uint64_t> seed;
};

namespace internal {

inline void check_keys(const nlohmann::json& obj, const std::string& where,
                       std::initializer_list<const char*> allowed) {
  if (!obj.is_object())
    throw std::invalid_argument("config: " + where + " must be an object");
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed)
      if (item.key() == key) {
        known = true;
        break;
      }
    if (!known)
      throw std::invalid_argument("config: unknown key '" + item.key() +
                                  "' in " + where);
  }
}

inline double get_number(const nlohmann::json& obj, const std::string& where,
                         const char* key) {
  if (!obj.contains(key))
    throw std::invalid_argument("config: " + where + " is missing '" + key +
                                "'");
  if (!obj.at(key).is_number())
    throw std::invalid_argument("config: " + where + "." + key +
                                " must be a number");
  return obj.at(key).get<double>();
}

inline std::size_t get_size(const nlohmann::json& obj, const std::string& where,
                            const char* key) {
  if (!obj.contains(key))
    throw std::invalid_argument("config: " + where + " is missing '" + key +
                                "'");
  if (!obj.at(key).is_number_integer() || obj.at(key).get<double>() < 0)
    throw std::invalid_argument("config: " + where + "." + key +
                                " must be a nonnegative integer");
  return obj.at(key).get<std::size_t>();
}

inline std::vector<double> get_number_array(const nlohmann::json& value,
                                            const std::string& where) {
  if (!value.is_array())
    throw std::invalid_argument("config: " + where + " must be an array");
  std::vector<double> out;
  out.reserve(value.size());
  for (const auto& v : value) {
    if (!v.is_number())
      throw std::invalid_argument("config: " + where +
                                  " must contain only numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace internal

inline const char* target_kind_name(tradeoff::TargetKind kind) {
  return kind == tradeoff::TargetKind::kDistortion ? "distortion" : "kl_rate";
}

inline tradeoff::TargetKind target_kind_from_name(const std::string& name) {
  if (name == "distortion") return tradeoff::TargetKind::kDistortion;
  if (name == "kl_rate") return tradeoff::TargetKind::kKlRate;
  throw std::invalid_argument(
      "config: sweep.kind must be 'distortion' or 'kl_rate', got '" + name +
      "'");
}

inline RunConfig parse_config(const nlohmann::json& root) {
  internal::check_keys(root, "top level",
                       {"plant", "controller", "input_spectrum", "grid_n",
                        "sweep", "simulation", "oracle", "output"});
  RunConfig config;

  if (!root.contains("plant"))
    throw std::invalid_argument("config: missing 'plant'");
  const nlohmann::json& plant = root.at("plant");
  internal::check_keys(plant, "plant", {"a", "b", "c", "sigma_w2", "sigma_v2"});
  config.plant.a = internal::get_number(plant, "plant", "a");
  config.plant.b = internal::get_number(plant, "plant", "b");
  config.plant.c = internal::get_number(plant, "plant", "c");
  config.plant.sigma_w2 = internal::get_number(plant, "plant", "sigma_w2");
  config.plant.sigma_v2 = internal::get_number(plant, "plant", "sigma_v2");

  if (root.contains("controller")) {
    const nlohmann::json& ctrl = root.at("controller");
    internal::check_keys(ctrl, "controller", {"numerator", "denominator"});
    if (!ctrl.contains("numerator") || !ctrl.contains("denominator"))
      throw std::invalid_argument(
          "config: controller needs 'numerator' and 'denominator'");
    config.controller = ControllerConfig{
        internal::get_number_array(ctrl.at("numerator"),
                                   "controller.numerator"),
        internal::get_number_array(ctrl.at("denominator"),
                                   "controller.denominator")};
  }

  if (root.contains("input_spectrum")) {
    if (config.controller)
      throw std::invalid_argument(
          "config: 'input_spectrum' only applies open loop; remove it or the "
          "'controller' block");
    const nlohmann::json& spec = root.at("input_spectrum");
    if (!spec.contains("kind") || !spec.at("kind").is_string())
      throw std::invalid_argument(
          "config: input_spectrum needs a string 'kind'");
    const std::string kind = spec.at("kind").get<std::string>();
    InputSpectrumConfig input;
    if (kind == "white") {
      internal::check_keys(spec, "input_spectrum", {"kind", "variance"});
      input.kind = InputSpectrumKind::kWhite;
      input.variance = internal::get_number(spec, "input_spectrum", "variance");
      if (input.variance < 0.0)
        throw std::invalid_argument(
            "config: input_spectrum.variance must be nonnegative");
    } else if (kind == "ar1") {
      internal::check_keys(spec, "input_spectrum",
                           {"kind", "pole", "innovation_variance"});
      input.kind = InputSpectrumKind::kAr1;
      input.pole = internal::get_number(spec, "input_spectrum", "pole");
      input.innovation_variance =
          internal::get_number(spec, "input_spectrum", "innovation_variance");
      if (std::fabs(input.pole) >= 1.0)
        throw std::invalid_argument(
            "config: input_spectrum.pole must satisfy |pole| < 1");
      if (input.innovation_variance < 0.0)
        throw std::invalid_argument(
            "config: input_spectrum.innovation_variance must be nonnegative");
    } else if (kind == "file") {
      internal::check_keys(spec, "input_spectrum", {"kind", "path"});
      if (!spec.contains("path") || !spec.at("path").is_string())
        throw std::invalid_argument(
            "config: input_spectrum of kind 'file' needs a string 'path'");
      input.kind = InputSpectrumKind::kFile;
      input.path = spec.at("path").get<std::string>();
    } else {
      throw std::invalid_argument(
          "config: input_spectrum.kind must be 'white', 'ar1' or 'file', "
          "got '" +
          kind + "'");
    }
    config.input_spectrum = input;
  }

  if (root.contains("grid_n"))
    config.grid_n = internal::get_size(root, "top level", "grid_n");

  if (root.contains("sweep")) {
    const nlohmann::json& sweep = root.at("sweep");
    internal::check_keys(sweep, "sweep", {"kind", "targets"});
    if (!sweep.contains("kind") || !sweep.at("kind").is_string())
      throw std::invalid_argument("config: sweep needs a string 'kind'");
    if (!sweep.contains("targets"))
      throw std::invalid_argument("config: sweep needs 'targets'");
    SweepConfig sc;
    sc.kind = target_kind_from_name(sweep.at("kind").get<std::string>());
    sc.targets =
        internal::get_number_array(sweep.at("targets"), "sweep.targets");
    config.sweep = std::move(sc);
  }

  if (root.contains("simulation")) {
    const nlohmann::json& sim = root.at("simulation");
    internal::check_keys(
        sim, "simulation",
        {"horizon", "seed", "distortion_tolerance", "kl_tolerance"});
    SimulationConfig sc;
    if (sim.contains("horizon"))
      sc.horizon = internal::get_size(sim, "simulation", "horizon");
    if (sim.contains("seed")) {
      if (!sim.at("seed").is_number_integer())
        throw std::invalid_argument(
            "config: simulation.seed must be an integer");
      sc.seed = sim.at("seed").get<std::uint64_t>();
    }
    if (sim.contains("distortion_tolerance"))
      sc.distortion_tolerance =
          internal::get_number(sim, "simulation", "distortion_tolerance");
    if (sim.contains("kl_tolerance"))
      sc.kl_tolerance = internal::get_number(sim, "simulation", "kl_tolerance");
    if (sc.distortion_tolerance <= 0.0 || sc.kl_tolerance <= 0.0)
      throw std::invalid_argument(
          "config: simulation tolerances must be positive");
    config.simulation = sc;
  }

  if (root.contains("oracle")) {
    const nlohmann::json& oracle = root.at("oracle");
    internal::check_keys(oracle, "oracle", {"horizons", "tolerance"});
    if (!oracle.contains("horizons"))
      throw std::invalid_argument("config: oracle needs 'horizons'");
    OracleConfig oc;
    for (double v :
         internal::get_number_array(oracle.at("horizons"), "oracle.horizons")) {
      if (v < 1.0 || v != std::floor(v))
        throw std::invalid_argument(
            "config: oracle.horizons must be positive integers");
      oc.horizons.push_back(static_cast<std::size_t>(v));
    }
    if (oracle.contains("tolerance"))
      oc.tolerance = internal::get_number(oracle, "oracle", "tolerance");
    if (oc.tolerance <= 0.0)
      throw std::invalid_argument("config: oracle.tolerance must be positive");
    config.oracle = std::move(oc);
  }

  if (root.contains("output")) {
    const nlohmann::json& output = root.at("output");
    internal::check_keys(output, "output", {"directory", "write_trajectory"});
    if (output.contains("directory")) {
      if (!output.at("directory").is_string())
        throw std::invalid_argument(
            "config: output.directory must be a string");
      config.output.directory = output.at("directory").get<std::string>();
    }
    if (output.contains("write_trajectory")) {
      if (!output.at("write_trajectory").is_boolean())
        throw std::invalid_argument(
            "config: output.write_trajectory must be a boolean");
      config.output.write_trajectory =
          output.at("write_trajectory").get<bool>();
    }
  }

  return config;
}

inline nlohmann::json serialize_config(const RunConfig& config) {
  nlohmann::json root;
  root["plant"] = {{"a", config.plant.a},
                   {"b", config.plant.b},
                   {"c", config.plant.c},
                   {"sigma_w2", config.plant.sigma_w2},
                   {"sigma_v2", config.plant.sigma_v2}};
  if (config.controller)
    root["controller"] = {{"numerator", config.controller->numerator},
                          {"denominator", config.controller->denominator}};
  if (config.input_spectrum) {
    nlohmann::json spec;
    switch (config.input_spectrum->kind) {
      case InputSpectrumKind::kWhite:
        spec = {{"kind", "white"},
                {"variance", config.input_spectrum->variance}};
        break;
      case InputSpectrumKind::kAr1:
        spec = {{"kind", "ar1"},
                {"pole", config.input_spectrum->pole},
                {"innovation_variance",
                 config.input_spectrum->innovation_variance}};
        break;
      case InputSpectrumKind::kFile:
        spec = {{"kind", "file"}, {"path", config.input_spectrum->path}};
        break;
    }
    root["input_spectrum"] = spec;
  }
  root["grid_n"] = config.grid_n;
  if (config.sweep)
    root["sweep"] = {{"kind", target_kind_name(config.sweep->kind)},
                     {"targets", config.sweep->targets}};
  if (config.simulation)
    root["simulation"] = {
        {"horizon", config.simulation->horizon},
        {"seed", config.simulation->seed},
        {"distortion_tolerance", config.simulation->distortion_tolerance},
        {"kl_tolerance", config.simulation->kl_tolerance}};
  if (config.oracle)
    root["oracle"] = {{"horizons", config.oracle->horizons},
                      {"tolerance", config.oracle->tolerance}};
  root["output"] = {{"directory", config.output.directory},
                    {"write_trajectory", config.output.write_trajectory}};
  return root;
}

inline void apply_overrides(RunConfig& config, const Overrides& overrides) {
  if (const char* env = std::getenv(kGridEnvVar)) {
    char* end = nullptr;
    const unsigned long long value = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0' || value == 0)
      throw std::invalid_argument(std::string(kGridEnvVar) +
                                  " must be a positive integer, got '" + env +
                                  "'");
    config.grid_n = static_cast<std::size_t>(value);
  }
  if (overrides.grid_n) config.grid_n = *overrides.grid_n;
  if (overrides.output_directory)
    config.output.directory = *overrides.output_directory;
  if (overrides.seed) {
    if (!config.simulation) config.simulation = SimulationConfig{};
    config.simulation->seed = *overrides.seed;
  }
}

// Builds the typed model from the config; all structural validation
// (stability, degenerate spectra, properness) happens in the library
// constructors invoked here.
inline lti::SystemModel build_model(const RunConfig& config,
                                    const FrequencyGrid& grid) {
  lti::FirstOrderPlant plant(config.plant.a, config.plant.b, config.plant.c,
                             config.plant.sigma_w2, config.plant.sigma_v2);
  if (config.controller)
    return lti::SystemModel::closed_loop(
        plant, lti::RationalTransferFunction(config.controller->numerator,
                                             config.controller->denominator));

  if (!config.input_spectrum)
    return lti::SystemModel::open_loop(
        plant, spectra::SpectrumSamples::constant(grid, 0.0));
  const InputSpectrumConfig& input = *config.input_spectrum;
  switch (input.kind) {
    case InputSpectrumKind::kWhite:
      return lti::SystemModel::open_loop(
          plant, spectra::SpectrumSamples::constant(grid, input.variance));
    case InputSpectrumKind::kAr1: {
      const double pole = input.pole;
      const double iv = input.innovation_variance;
      return lti::SystemModel::open_loop(
          plant, spectra::SpectrumSamples::from_frequency_function(
                     grid, [&](double omega) {
                       return iv / lti::unit_circle_gap_squared(pole, omega);
                     }));
    }
    case InputSpectrumKind::kFile: {
      const std::filesystem::path path =
          config.base_directory / input.path;
      spectra::SpectrumSamples s = load_spectrum_csv(path);
      if (s.grid() != grid)
        throw std::invalid_argument(
            "config: input spectrum file " + path.string() + " has " +
            std::to_string(s.size()) + " bins but the grid has " +
            std::to_string(grid.size()));
      return lti::SystemModel::open_loop(plant, std::move(s));
    }
  }
  throw std::logic_error("build_model: unreachable");
}

struct CommandOutcome {
  nlohmann::json report;
  int exit_code = kExitOk;
};

namespace internal {

inline std::string spectra_csv_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "spectra_%03zu.csv", index);
  return buf;
}

inline nlohmann::json report_skeleton(const char* command,
                                      const RunConfig& config) {
  nlohmann::json report;
  report["tool_version"] = kToolVersion;
  report["command"] = command;
  report["grid_n"] = config.grid_n;
  report["config"] = serialize_config(config);
  report["errors"] = nlohmann::json::array();
  return report;
}

inline const SweepConfig& require_sweep(const RunConfig& config,
                                        const char* command) {
  if (!config.sweep || config.sweep->targets.empty())
    throw std::invalid_argument(std::string("config: '") + command +
                                "' needs a sweep with at least one target");
  return *config.sweep;
}

}  // namespace internal

// Sweeps the configured targets and writes curve.csv, one spectra CSV
// per solved target and report.json.  Targets the solver cannot reach
// become structured error entries instead of aborting the whole sweep.
inline CommandOutcome cmd_tradeoff(const RunConfig& config) {
  const SweepConfig& sweep = internal::require_sweep(config, "tradeoff");
  const FrequencyGrid grid(config.grid_n);
  const lti::SystemModel model = build_model(config, grid);
  const std::filesystem::path out_dir(config.output.directory);

  CommandOutcome outcome;
  outcome.report = internal::report_skeleton("tradeoff", config);
  outcome.report["targets"] = nlohmann::json::array();

  tradeoff::CurveTable curve{sweep.kind, {}};
  for (std::size_t i = 0; i < sweep.targets.size(); ++i) {
    const double target = sweep.targets[i];
    try {
      const tradeoff::TradeoffPoint point = tradeoff::worst_case_attack(
          model, tradeoff::AttackTarget{sweep.kind, target}, grid);
      const std::string spectra_name = internal::spectra_csv_name(i);
      write_point_spectra_csv(out_dir / spectra_name,
                              spectra::output_spectrum(model, grid), point);
      curve.rows.push_back(
          {target, point.distortion, point.zeta, point.kl_rate.nats()});
      outcome.report["targets"].push_back(
          {{"target", target},
           {"kind", target_kind_name(sweep.kind)},
           {"distortion", point.distortion},
           {"zeta", point.zeta},
           {"kl_rate", point.kl_rate.nats()},
           {"spectra_csv", spectra_name}});
    } catch (const SolverError& err) {
      outcome.report["errors"].push_back(
          {{"target", target}, {"message", err.what()}});
      outcome.exit_code = kExitSolver;
    }
  }
  write_curve_csv(out_dir / "curve.csv", curve);
  outcome.report["files"]["curve"] = "curve.csv";
  return outcome;
}

// Cross-checks solved operating points against the finite-horizon
// covariance oracle and/or paired Monte Carlo simulation, writing
// oracle.csv and montecarlo.csv.  Any row beyond its tolerance flips
// the exit code to the solver-failure value.
inline CommandOutcome cmd_verify(const RunConfig& config) {
  const SweepConfig& sweep = internal::require_sweep(config, "verify");
  if (!config.oracle && !config.simulation)
    throw std::invalid_argument(
        "config: 'verify' needs an 'oracle' and/or 'simulation' block");
  const FrequencyGrid grid(config.grid_n);
  if (config.oracle)
    for (std::size_t k : config.oracle->horizons) {
      if (k > tradeoff::kMaxOracleHorizon)
        throw std::invalid_argument(
            "config: oracle horizon " + std::to_string(k) + " exceeds cap " +
            std::to_string(tradeoff::kMaxOracleHorizon));
      if (k + 1 > grid.size() / 2)
        throw std::invalid_argument(
            "config: oracle horizon " + std::to_string(k) +
            " needs a grid of at least " + std::to_string(2 * (k + 1)) +
            " bins");
    }
  if (config.simulation && config.simulation->horizon < 2 * grid.size())
    throw std::invalid_argument(
        "config: simulation.horizon must cover at least two grid lengths "
        "for the spectrum estimate");

  const lti::SystemModel model = build_model(config, grid);
  const spectra::SpectrumSamples s_y = spectra::output_spectrum(model, grid);
  const double c2 = model.plant().c() * model.plant().c();
  const std::filesystem::path out_dir(config.output.directory);

  CommandOutcome outcome;
  outcome.report = internal::report_skeleton("verify", config);
  outcome.report["targets"] = nlohmann::json::array();
  outcome.report["oracle"] = nlohmann::json::array();
  outcome.report["monte_carlo"] = nlohmann::json::array();

  CsvTable oracle_csv;
  oracle_csv.header = {"target", "k", "oracle_kl", "integral_kl", "rel_error"};
  CsvTable mc_csv;
  mc_csv.header = {"target", "empirical_D", "theoretical_D",
                   "empirical_kl_rate", "theoretical_kl_rate"};

  for (std::size_t i = 0; i < sweep.targets.size(); ++i) {
    const double target = sweep.targets[i];
    std::optional<tradeoff::TradeoffPoint> solved;
    try {
      solved = tradeoff::worst_case_attack(
          model, tradeoff::AttackTarget{sweep.kind, target}, grid);
    } catch (const SolverError& err) {
      outcome.report["errors"].push_back(
          {{"target", target}, {"message", err.what()}});
      outcome.exit_code = kExitSolver;
      continue;
    }
    const tradeoff::TradeoffPoint& point = *solved;
    outcome.report["targets"].push_back(
        {{"target", target},
         {"kind", target_kind_name(sweep.kind)},
         {"distortion", point.distortion},
         {"zeta", point.zeta},
         {"kl_rate", point.kl_rate.nats()}});

    if (config.oracle) {
      for (std::size_t k : config.oracle->horizons) {
        const double oracle_kl = tradeoff::finite_horizon_min_kl(
            s_y, c2 * point.distortion, k);
        const double integral_kl = point.kl_rate.nats();
        const double rel_error =
            std::fabs(oracle_kl - integral_kl) / integral_kl;
        oracle_csv.rows.push_back({target, static_cast<double>(k), oracle_kl,
                                   integral_kl, rel_error});
        const bool ok = rel_error <= config.oracle->tolerance;
        outcome.report["oracle"].push_back({{"target", target},
                                            {"k", k},
                                            {"oracle_kl", oracle_kl},
                                            {"integral_kl", integral_kl},
                                            {"rel_error", rel_error},
                                            {"within_tolerance", ok}});
        if (!ok) {
          outcome.report["errors"].push_back(
              {{"target", target},
               {"message", "oracle mismatch at k = " + std::to_string(k) +
                               ": rel_error " + format_double(rel_error)}});
          outcome.exit_code = kExitSolver;
        }
      }
    }

    if (config.simulation) {
      const SimulationConfig& sim = *config.simulation;
      const std::size_t n = grid.size();
      const std::size_t padded = ((sim.horizon + n - 1) / n) * n;
      const std::vector<double> attack = simulate::synthesize_colored_gaussian(
          point.attack_spectrum, padded, sim.seed,
          static_cast<std::uint32_t>(i));
      const simulate::SimulationResult run =
          simulate::simulate(model, attack, sim.horizon, sim.seed);
      const double empirical_d = simulate::estimate_distortion(run);
      const double empirical_out = simulate::estimate_output_distortion(run);
      std::vector<double> deviation(run.y.size());
      for (std::size_t t = 0; t < run.y.size(); ++t)
        deviation[t] = run.y_hat[t] - run.y[t];
      const spectra::SpectrumSamples s_emp =
          spectra::welch_estimate(deviation, n, 0.5, grid);
      const double empirical_kl = divergence::kl_rate(s_y, s_emp).nats();

      const double theo_d = point.distortion;
      const double theo_kl = point.kl_rate.nats();
      mc_csv.rows.push_back(
          {target, empirical_d, theo_d, empirical_kl, theo_kl});
      const double d_err = std::fabs(empirical_d - theo_d) / theo_d;
      const double out_err =
          std::fabs(empirical_out - c2 * theo_d) / (c2 * theo_d);
      const double kl_err = std::fabs(empirical_kl - theo_kl) / theo_kl;
      const bool ok = d_err <= sim.distortion_tolerance &&
                      out_err <= sim.distortion_tolerance &&
                      kl_err <= sim.kl_tolerance;
      outcome.report["monte_carlo"].push_back(
          {{"target", target},
           {"empirical_D", empirical_d},
           {"theoretical_D", theo_d},
           {"empirical_output_D", empirical_out},
           {"theoretical_output_D", c2 * theo_d},
           {"empirical_kl_rate", empirical_kl},
           {"theoretical_kl_rate", theo_kl},
           {"within_tolerance", ok}});
      if (!ok) {
        outcome.report["errors"].push_back(
            {{"target", target},
             {"message",
              "monte carlo mismatch: distortion rel_error " +
                  format_double(d_err) + ", output rel_error " +
                  format_double(out_err) + ", kl rel_error " +
                  format_double(kl_err)}});
        outcome.exit_code = kExitSolver;
      }
    }
  }

  if (config.oracle) {
    write_table_csv(out_dir / "oracle.csv", oracle_csv);
    outcome.report["files"]["oracle"] = "oracle.csv";
  }
  if (config.simulation) {
    write_table_csv(out_dir / "montecarlo.csv", mc_csv);
    outcome.report["files"]["montecarlo"] = "montecarlo.csv";
  }
  return outcome;
}

// Solves a single operating point, draws one realization of the
// worst-case attack and writes the series (k, n) plus its spectrum in
// the same (omega, value) format the input_spectrum 'file' kind reads
// back.  With output.write_trajectory the paired simulation trajectory
// is written as well.
inline CommandOutcome cmd_synthesize(const RunConfig& config) {
  const SweepConfig& sweep = internal::require_sweep(config, "synthesize");
  if (sweep.targets.size() != 1)
    throw std::invalid_argument(
        "config: 'synthesize' needs exactly one sweep target, got " +
        std::to_string(sweep.targets.size()));
  if (!config.simulation)
    throw std::invalid_argument(
        "config: 'synthesize' needs a 'simulation' block");
  const FrequencyGrid grid(config.grid_n);
  const lti::SystemModel model = build_model(config, grid);
  const SimulationConfig& sim = *config.simulation;
  const std::filesystem::path out_dir(config.output.directory);

  CommandOutcome outcome;
  outcome.report = internal::report_skeleton("synthesize", config);

  const double target = sweep.targets.front();
  const tradeoff::TradeoffPoint point = tradeoff::worst_case_attack(
      model, tradeoff::AttackTarget{sweep.kind, target}, grid);
  const std::size_t n = grid.size();
  const std::size_t padded = ((sim.horizon + n - 1) / n) * n;
  const std::vector<double> attack = simulate::synthesize_colored_gaussian(
      point.attack_spectrum, padded, sim.seed);
  const simulate::SimulationResult run =
      simulate::simulate(model, attack, sim.horizon, sim.seed);

  std::vector<double> series(attack.begin(),
                             attack.begin() +
                                 static_cast<std::ptrdiff_t>(sim.horizon));
  write_attack_csv(out_dir / "attack.csv", series);
  write_spectrum_csv(out_dir / "attack_spectrum.csv", point.attack_spectrum);
  write_point_spectra_csv(out_dir / internal::spectra_csv_name(0),
                          spectra::output_spectrum(model, grid), point);
  outcome.report["files"]["attack"] = "attack.csv";
  outcome.report["files"]["attack_spectrum"] = "attack_spectrum.csv";
  outcome.report["files"]["spectra"] = internal::spectra_csv_name(0);
  if (config.output.write_trajectory) {
    write_trajectory_csv(out_dir / "trajectory.csv", run);
    outcome.report["files"]["trajectory"] = "trajectory.csv";
  }
  outcome.report["targets"] = nlohmann::json::array(
      {{{"target", target},
        {"kind", target_kind_name(sweep.kind)},
        {"distortion", point.distortion},
        {"zeta", point.zeta},
        {"kl_rate", point.kl_rate.nats()},
        {"empirical_distortion", simulate::estimate_distortion(run)},
        {"empirical_output_distortion",
         simulate::estimate_output_distortion(run)},
        {"seed", sim.seed},
        {"horizon", sim.horizon}}});
  return outcome;
}

// Parses the config, applies overrides, dispatches the command, writes
// report.json and maps exceptions to exit codes.  Validation failures
// print a structured JSON error line plus a plain message on stderr.
inline int run_command(Command command, const std::string& config_path,
                       const Overrides& overrides,
                       std::ostream& err = std::cerr) {
  const auto fail = [&err](const char* kind, const std::string& message,
                           int code) {
    nlohmann::json error = {
        {"error", {{"kind", kind}, {"message", message}}}};
    err << error.dump() << "\n";
    err << "error: " << message << "\n";
    return code;
  };

  try {
    std::ifstream in(config_path, std::ios::binary);
    if (!in)
      return fail("validation", "cannot open config file " + config_path,
                  kExitValidation);
    nlohmann::json root;
    try {
      root = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      return fail("validation",
                  "config " + config_path + " is not valid JSON: " + e.what(),
                  kExitValidation);
    }
    RunConfig config = parse_config(root);
    config.base_directory =
        std::filesystem::absolute(config_path).parent_path();
    apply_overrides(config, overrides);

    std::filesystem::create_directories(config.output.directory);
    CommandOutcome outcome;
    switch (command) {
      case Command::kTradeoff:
        outcome = cmd_tradeoff(config);
        break;
      case Command::kVerify:
        outcome = cmd_verify(config);
        break;
      case Command::kSynthesize:
        outcome = cmd_synthesize(config);
        break;
    }
    atomic_write_text(
        std::filesystem::path(config.output.directory) / "report.json",
        outcome.report.dump(2) + "\n");
    return outcome.exit_code;
  } catch (const std::invalid_argument& e) {
    return fail("validation", e.what(), kExitValidation);
  } catch (const std::domain_error& e) {
    return fail("validation", e.what(), kExitValidation);
  } catch (const SolverError& e) {
    return fail("solver", e.what(), kExitSolver);
  } catch (const std::exception& e) {
    return fail("runtime", e.what(), kExitSolver);
  }
}

}  // namespace cli
}  // namespace stealthcurve
