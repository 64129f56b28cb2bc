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

#ifndef TREX_COUNTERFACTUAL_H_
#define TREX_COUNTERFACTUAL_H_

#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "trex/dataset.h"
#include "trex/mlp.h"
#include "trex/stability.h"
#include "trex/types.h"

namespace trex {

inline constexpr double kDecisionThreshold = 0.5;

enum class Generator { kMinCost, kNearestNeighbor, kTrexI, kTrexNN };

std::string_view generator_name(Generator generator);
Generator parse_generator(std::string_view name);

enum class Verdict {
  // A counterfactual with m(x') >= 0.5 (and, for the robust generators, a
  // passing robustness test).
  kFound,
  // T-Rex:I ran out of steps below tau; the last iterate is still reported.
  kUnmet,
  // Ascent ended at a point with m(x') < 0.5.
  kInvalid,
  // No counterfactual was produced.
  kNotFound,
};

std::string_view verdict_name(Verdict verdict);
Verdict parse_verdict(std::string_view name);

struct CounterfactualRecord {
  // Index of the query in its source split; -1 when not applicable.
  std::int64_t row_id = -1;
  Vector original;
  Vector counterfactual;
  Generator generator = Generator::kMinCost;
  Norm norm = Norm::kL2;
  double cost = 0.0;
  double model_output = 0.0;
  // R_hat at the counterfactual (NaN when not computed).
  double stability = 0.0;
  Verdict verdict = Verdict::kNotFound;
  int steps = 0;

  // Whether a point was emitted (everything except kNotFound).
  bool has_counterfactual() const { return verdict != Verdict::kNotFound; }
};

// Parameters shared by the robustness test, T-Rex:I and T-Rex:NN.
struct TrexConfig {
  int k = 1000;
  double sigma2 = 0.01;
  std::uint64_t seed = 0;
  double tau = 0.7;
  double eta = 0.01;
  int max_steps = 100;
  // K: how many nearest favorable rows T-Rex:NN may test.
  int neighbor_budget = 100;

  void validate() const;
  // Frozen-sample stability configuration.
  StabilityConfig stability() const;
};

// Penalty-method schedule for the minimum-cost baseline.
struct MinCostParams {
  double lambda0 = 0.1;
  double lambda_growth = 2.0;
  int max_rounds = 20;
  int inner_steps = 500;
  double learning_rate = 0.01;

  void validate() const;
};

// R_hat(x) >= tau on the frozen sample of cfg.
bool robustness_test(const MlpModel& model, const Eigen::Ref<const Vector>& x,
                     const TrexConfig& cfg);

// Closest point with m(x') >= 0.5 under the given norm, by the penalty
// method: for lambda = lambda0, lambda0 * growth, ... minimize
// lambda z(x')^2 + |x' - x|_p, where z is the pre-sigmoid output (m >= 0.5
// exactly when z >= 0; the logit does not saturate far from the boundary
// the way m does), with proximal gradient steps (soft
// threshold per coordinate for l1, block shrink for l2) and backtracking from
// the learning rate. Rounds end once the linearized distance to the boundary
// is below 1e-5; the last iterate is then pushed across along the steepest
// direction of the norm. Returns the cheapest feasible point evaluated.
// Requires m(x) < 0.5; the verdict is kNotFound if nothing feasible was seen.
CounterfactualRecord min_cost_cf(const MlpModel& model,
                                 const Eigen::Ref<const Vector>& x, Norm norm,
                                 const MinCostParams& params = {});

// Closest dataset row with m(row) >= 0.5; ties go to the lower row index.
CounterfactualRecord nn_cf(const MlpModel& model,
                           const Eigen::Ref<const Vector>& x,
                           const Dataset& data, Norm norm);

// Gradient ascent on the chosen measure starting from base.counterfactual:
//
//   while measure(x_c) < tau and steps < max_steps:
//     x_c += eta * grad measure(x_c); ++steps
//
// Records the measure value after every update in `trace` when provided
// (trace[0] is the starting value). The returned record keeps the base norm
// and reports R_hat at x_c regardless of the measure ascended.
CounterfactualRecord trex_i(const MlpModel& model,
                            const Eigen::Ref<const Vector>& x,
                            const CounterfactualRecord& base,
                            const TrexConfig& cfg,
                            Measure measure = Measure::kRelaxed,
                            std::vector<double>* trace = nullptr);

// Rows with m >= 0.5 ordered by distance to x (ties by row index), at most K.
std::vector<std::size_t> nearest_favorable_rows(const MlpModel& model,
                                                const Eigen::Ref<const Vector>& x,
                                                const Dataset& data, Norm norm,
                                                std::size_t limit);

// First of the K nearest favorable rows that passes the robustness test.
CounterfactualRecord trex_nn(const MlpModel& model,
                             const Eigen::Ref<const Vector>& x,
                             const Dataset& data, const TrexConfig& cfg,
                             Norm norm);

// CSV columns: row_id, generator, norm, cost, m_cf, stability, verdict,
// steps, then one column per feature of x'. Reals use the shortest exact
// decimal form; fields of not-found records are nan or empty.
void write_counterfactual_csv(std::ostream& out,
                              const std::vector<CounterfactualRecord>& records,
                              const std::vector<std::string>& feature_names);
std::vector<CounterfactualRecord> read_counterfactual_csv(std::istream& in);

}  // namespace trex

#endif  // TREX_COUNTERFACTUAL_H_
