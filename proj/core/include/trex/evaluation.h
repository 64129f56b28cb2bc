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

#ifndef TREX_EVALUATION_H_
#define TREX_EVALUATION_H_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "trex/counterfactual.h"
#include "trex/dataset.h"
#include "trex/ensemble.h"
#include "trex/lof.h"
#include "trex/mlp.h"
#include "trex/stability.h"

namespace trex {

// Percentage of (record, member) pairs with M(x') >= 0.5, over every record
// that carries a counterfactual.
double validity(const std::vector<CounterfactualRecord>& records,
                const ModelEnsemble& ensemble);

struct CostSummary {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
  std::size_t count = 0;
};

// Cost statistics per norm over records that carry a counterfactual.
std::map<Norm, CostSummary> cost_summary(
    const std::vector<CounterfactualRecord>& records);

struct LofSummary {
  double mean_prediction = 0.0;  // mean of the +1 / -1 predictions
  double mean_score = 0.0;
  std::size_t count = 0;
};

LofSummary lof_summary(const std::vector<CounterfactualRecord>& records,
                       const LofIndex& index,
                       double threshold = kDefaultLofThreshold);

// Indices of rows with label 0 and m(x) < 0.5.
std::vector<std::size_t> select_queries(const MlpModel& model,
                                        const Dataset& data);

struct GenerationConfig {
  TrexConfig trex;
  MinCostParams min_cost;
  unsigned workers = 0;
};

// Runs one generator over the query rows of `queries`. `reference` supplies
// the candidate rows for nn and trex-nn. trex-i starts from `base`, which
// must hold one record per query in the same order. Every record gets R_hat
// at its counterfactual on the frozen sample of cfg.trex.
std::vector<CounterfactualRecord> generate_counterfactuals(
    const MlpModel& model, const Dataset& reference, const Dataset& queries,
    const std::vector<std::size_t>& query_rows, Generator generator, Norm norm,
    const GenerationConfig& cfg,
    const std::vector<CounterfactualRecord>* base = nullptr);

struct ReportRow {
  Generator generator = Generator::kMinCost;
  Norm norm = Norm::kL2;
  std::size_t queries = 0;
  std::size_t produced = 0;  // records with a counterfactual
  std::size_t found = 0;     // records with verdict found
  CostSummary cost;
  LofSummary lof;
  // NaN when the ensemble was not supplied or nothing was produced.
  double wi_validity = 0.0;
  double lo_validity = 0.0;
};

struct RobustnessReport {
  std::vector<ReportRow> rows;

  void write_csv(std::ostream& out) const;
  // Plain-text table: METHOD, NORM, COST, LOF, WI VAL., LO VAL., N.
  std::string render_table() const;
};

// Builds one report row per record group. Groups keep their given order.
RobustnessReport build_report(
    const std::vector<std::vector<CounterfactualRecord>>& groups,
    const LofIndex& lof, const ModelEnsemble* wi, const ModelEnsemble* lo,
    double lof_threshold = kDefaultLofThreshold);

struct EvaluationResult {
  std::vector<std::vector<CounterfactualRecord>> groups;
  RobustnessReport report;
};

// For every norm: min-cost, min-cost + T-Rex:I, nn, T-Rex:NN over the true
// negatives of `test`, then the report against the supplied ensembles. The
// LOF index and the nn candidates come from `train`.
EvaluationResult evaluate(const Dataset& train, const Dataset& test,
                          const MlpModel& model,
                          const std::vector<Generator>& generators,
                          const std::vector<Norm>& norms,
                          const GenerationConfig& cfg, const ModelEnsemble* wi,
                          const ModelEnsemble* lo,
                          int lof_neighbors = kDefaultLofNeighbors);

struct AblationRow {
  double tau = 0.0;
  Measure measure = Measure::kRelaxed;
  Norm norm = Norm::kL2;
  std::size_t produced = 0;
  std::size_t found = 0;
  CostSummary cost;
  LofSummary lof;
  double wi_validity = 0.0;
  double lo_validity = 0.0;
};

// T-Rex:I from the given base records with each measure as the acceptance
// criterion and ascent direction, for every tau.
std::vector<AblationRow> ablation(
    const MlpModel& model, const std::vector<CounterfactualRecord>& base,
    const TrexConfig& trex, const std::vector<double>& taus,
    const std::vector<Measure>& measures, const LofIndex& lof,
    const ModelEnsemble* wi, const ModelEnsemble* lo, unsigned workers = 0);

void write_ablation_csv(std::ostream& out, const std::vector<AblationRow>& rows);

}  // namespace trex

#endif  // TREX_EVALUATION_H_
