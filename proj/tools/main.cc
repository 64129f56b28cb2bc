/*
 * Copyright 2026 The trex Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "commands.h"
#include "run_config.h"
#include "trex/errors.h"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust counterfactual explanations under model change"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
  app.add_option("--config", config_path, "JSON run configuration")
      ->required();
  app.add_option("--out", out_dir, "Output directory (overrides the config)");
  app.add_option("--seed", seed, "Master seed (overrides the config)");
  app.add_flag("--quiet", quiet, "Suppress progress output");
  app.fallthrough();

  auto* train = app.add_subcommand("train", "Train the base model");
  auto* generate =
      app.add_subcommand("generate", "Generate counterfactuals per generator");
  auto* evaluate =
      app.add_subcommand("evaluate", "Robustness report and ablation");
  auto* theory = app.add_subcommand(
      "theory", "Coverage, Rashomon bound and targeted-change checks");
  auto* run = app.add_subcommand("run", "train, generate, evaluate, theory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    trex::cli::RunConfig cfg = trex::cli::load_run_config(config_path, seed);
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    const trex::cli::CommandOptions opts{quiet};
    if (train->parsed() || run->parsed()) trex::cli::cmd_train(cfg, opts);
    if (generate->parsed() || run->parsed()) trex::cli::cmd_generate(cfg, opts);
    if (evaluate->parsed() || run->parsed()) trex::cli::cmd_evaluate(cfg, opts);
    if (theory->parsed() || run->parsed()) trex::cli::cmd_theory(cfg, opts);
  } catch (const trex::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
