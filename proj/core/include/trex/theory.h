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

#ifndef TREX_THEORY_H_
#define TREX_THEORY_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "trex/dataset.h"
#include "trex/ensemble.h"
#include "trex/mlp.h"
#include "trex/types.h"

namespace trex {

// exp(-k eps^2 / (8 (gamma + gamma_m)^2 sigma2)), clamped to [0, 1].
double concentration_bound(int k, double eps, double gamma, double gamma_m,
                           double sigma2);

struct CoverageConfig {
  std::vector<int> ks = {100, 1000};
  std::vector<double> eps = {0.05, 0.1, 0.2};
  double sigma2 = 0.01;
  // Independent neighborhood samples drawn per query.
  int sample_seeds = 5;
  std::uint64_t seed = 0;
  // Defaults to analytic_lipschitz_bound(base) when unset.
  std::optional<double> gamma_m;
};

struct CoverageRow {
  int k = 0;
  double eps = 0.0;
  std::size_t trials = 0;
  // Trials with M(x) < R(x) - eps.
  std::size_t violations = 0;
  double violation_rate = 0.0;
  // Trials with Z = (1/k) sum (m(X_i) - M(X_i)) >= eps.
  std::size_t z_exceedances = 0;
  double z_tail_rate = 0.0;
  double bound = 0.0;
};

struct CoverageResult {
  double gamma_m = 0.0;
  double gamma = 0.0;
  std::vector<CoverageRow> rows;
};

// Trials range over (query, member, sample seed). R uses gamma =
// ensemble.synthetic_lipschitz(gamma_m), which bounds the Lipschitz constant
// of every member and of the base model. Requires a synthetic ensemble.
CoverageResult coverage_check(const ModelEnsemble& ensemble,
                                       const PointMatrix& queries,
                                       const CoverageConfig& cfg);

struct RashomonCheck {
  // Mean over members and points of |M(x_i) - m(x_i)|.
  double lhs = 0.0;
  // sqrt of the largest mean squared deviation (M(x_i) - m(x_i))^2.
  double bound = 0.0;
  // sqrt of the largest member variance about the member mean.
  double centered_bound = 0.0;
  bool holds = false;
};

RashomonCheck rashomon_bound_check(const ModelEnsemble& ensemble,
                                   const PointMatrix& points);

struct TargetedConfig {
  int max_epochs = 2000;
  double learning_rate = 1e-3;
  double min_agreement = 0.99;
};

struct TargetedResult {
  MlpModel model;
  // Fraction of data rows whose decision is unchanged.
  double agreement = 0.0;
  double target_output = 0.0;
  int epochs = 0;
  bool success = false;
};

// Full-batch Adam from a copy of `model` on
//   fidelity_weight * mean_i (M(x_i) - m(x_i))^2 + M(target)^2,
// stopping once M(target) < 0.5 with the agreement requirement met.
TargetedResult targeted_invalidation(const MlpModel& model,
                                     const Eigen::Ref<const Vector>& target,
                                     const Dataset& data,
                                     double fidelity_weight,
                                     const TargetedConfig& cfg = {});

// Grid point in [-0.5, 1.5]^d (step 0.05, d <= 3) with m >= 0.5 that lies
// farthest from every data row. Throws if none exists.
Vector off_manifold_target(const MlpModel& model, const Dataset& data);

void write_coverage_csv(std::ostream& out, const CoverageResult& result);

}  // namespace trex

#endif  // TREX_THEORY_H_
