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

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "stealthcurve/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{
      "stealthcurve: worst-case input-injection attacks against scalar "
      "linear Gaussian systems and their stealthiness-distortion tradeoff"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::size_t> grid_n;
  std::optional<std::uint64_t> seed;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON run configuration")
        ->required();
    sub->add_option("--out", out_dir,
                    "output directory (overrides output.directory)");
    sub->add_option("--grid-n", grid_n,
                    "frequency grid size, a power of two >= 64 (overrides " +
                        std::string(stealthcurve::cli::kGridEnvVar) +
                        " and grid_n)");
    sub->add_option("--seed", seed, "RNG seed (overrides simulation.seed)");
  };

  CLI::App* tradeoff = app.add_subcommand(
      "tradeoff", "sweep targets and write the stealthiness-distortion curve");
  CLI::App* verify = app.add_subcommand(
      "verify",
      "cross-check solved points against the finite-horizon oracle and "
      "Monte Carlo simulation");
  CLI::App* synthesize = app.add_subcommand(
      "synthesize",
      "draw one worst-case attack realization and simulate it");
  add_common(tradeoff);
  add_common(verify);
  add_common(synthesize);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Help and version requests exit 0 through CLI11; anything else is
    // a validation failure under the documented exit-code contract.
    if (e.get_exit_code() == 0) return app.exit(e);
    const nlohmann::json error = {
        {"error", {{"kind", "validation"}, {"message", e.what()}}}};
    std::cerr << error.dump() << "\n";
    std::cerr << "error: " << e.what() << "\n";
    return stealthcurve::cli::kExitValidation;
  }

  stealthcurve::cli::Command command = stealthcurve::cli::Command::kTradeoff;
  if (verify->parsed()) command = stealthcurve::cli::Command::kVerify;
  if (synthesize->parsed()) command = stealthcurve::cli::Command::kSynthesize;

  stealthcurve::cli::Overrides overrides;
  overrides.grid_n = grid_n;
  overrides.output_directory = out_dir;
  overrides.seed = seed;
  return stealthcurve::cli::run_command(command, config_path, overrides);
}
