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

#ifndef TREX_TOOLS_RUN_CONFIG_H_
#define TREX_TOOLS_RUN_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "trex/counterfactual.h"
#include "trex/dataset.h"
#include "trex/ensemble.h"
#include "trex/mlp.h"
#include "trex/stability.h"

namespace trex::cli {

struct DataSection {
  std::string source = "moons";  // "moons" or "csv"
  std::size_t n = 400;
  double noise = 0.1;
  std::string path;
  CsvSchema schema;
  std::vector<std::string> categorical;
  double test_fraction = 0.3;
};

struct ModelSection {
  std::vector<int> hidden = {128, 128};
  TrainConfig train;
};

struct EnsembleSection {
  int size = kDefaultEnsembleSize;
  std::vector<ChangeKind> kinds = {ChangeKind::kWeightInit,
                                   ChangeKind::kLeaveOut};
  double leave_out_fraction = kDefaultLeaveOutFraction;
};

struct EvaluationSection {
  std::vector<Generator> generators = {Generator::kMinCost, Generator::kTrexI,
                                       Generator::kNearestNeighbor,
                                       Generator::kTrexNN};
  std::vector<Norm> norms = {Norm::kL1, Norm::kL2};
  int lof_neighbors = 20;
  double lof_threshold = 1.5;
  std::vector<double> ablation_taus = {0.6, 0.7, 0.8};
  std::vector<Measure> ablation_measures = {Measure::kPoint, Measure::kMean,
                                            Measure::kRelaxed};
  std::optional<Norm> ablation_norm = Norm::kL2;
};

struct TheorySection {
  double v_max = 0.05;
  int pairs = 20;
  std::vector<int> ks = {100, 1000};
  std::vector<double> eps = {0.05, 0.1, 0.2};
  int sample_seeds = 5;
  int queries = 50;
  double fidelity_weight = 1.0;
  int targeted_epochs = 2000;
  double targeted_learning_rate = 1e-3;
};

// Seeds of every stochastic stage. Unset entries derive from the master
// seed with derive_seed(master, "<name>").
struct SeedSection {
  std::uint64_t master = 0;
  std::uint64_t data = 0;
  std::uint64_t split = 0;
  std::uint64_t init = 0;
  std::uint64_t train = 0;
  std::uint64_t trex = 0;
  std::uint64_t weight_init = 0;
  std::uint64_t leave_out = 0;
  std::uint64_t synthetic = 0;
  std::uint64_t coverage = 0;
};

struct RunConfig {
  std::filesystem::path output_dir = "trex-out";
  SeedSection seeds;
  DataSection data;
  ModelSection model;
  TrexConfig trex;
  MinCostParams min_cost;
  EnsembleSection ensembles;
  EvaluationSection evaluation;
  TheorySection theory;
  unsigned workers = 1;
  // The document as read, with the seed override applied.
  nlohmann::json document;
};

// Validates the whole document before returning. Errors are ConfigError
// with the JSON pointer of the offending field, e.g.
// "/trex/sigma2: must be >= 0".
RunConfig parse_run_config(const nlohmann::json& doc,
                           std::optional<std::uint64_t> seed_override = {});
RunConfig load_run_config(const std::filesystem::path& path,
                          std::optional<std::uint64_t> seed_override = {});

}  // namespace trex::cli

#endif  // TREX_TOOLS_RUN_CONFIG_H_
