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

#ifndef TREX_STABILITY_H_
#define TREX_STABILITY_H_

#include <cstdint>
#include <optional>
#include <string_view>

#include "trex/mlp.h"
#include "trex/types.h"

namespace trex {

enum class SampleMode {
  // The sample is keyed on (seed, x): independent draws for different x.
  kFreshPerCall,
  // One set of offsets delta_i, keyed on the seed only, re-centered at every
  // x (common random numbers). Required for gradients and ascent.
  kFrozen,
};

enum class SamplingDistribution {
  kGaussian,
  // Reserved; rejected by validate().
  kTruncatedGaussian,
  kUniform,
};

struct StabilityConfig {
  int k = 1000;
  // Per-coordinate variance of the isotropic Gaussian.
  double sigma2 = 0.01;
  // Lipschitz bound over all changed models, used by the exact measure.
  std::optional<double> gamma;
  // Lipschitz constant of the original model.
  std::optional<double> gamma_m;
  std::uint64_t seed = 0;
  SampleMode mode = SampleMode::kFrozen;
  SamplingDistribution distribution = SamplingDistribution::kGaussian;

  void validate() const;
};

// k points drawn from N(x, sigma2 I), one per row.
struct NeighborhoodSample {
  Vector center;
  PointMatrix points;
  std::uint64_t seed = 0;

  std::size_t size() const { return static_cast<std::size_t>(points.rows()); }
};

// Seed of the sample drawn around x under cfg.
std::uint64_t neighborhood_seed(const Eigen::Ref<const Vector>& x,
                                const StabilityConfig& cfg);

// Points are x + sqrt(sigma2) * z_i with z_i filled row by row from
// Rng(neighborhood_seed(x, cfg)). Not clipped to the unit cube.
NeighborhoodSample sample_gaussian_neighborhood(const Eigen::Ref<const Vector>& x,
                                                const StabilityConfig& cfg);

// Measures on an explicit sample.
double stability_exact(const MlpModel& model, const NeighborhoodSample& sample,
                       double gamma);
double stability_relaxed(const MlpModel& model, const NeighborhoodSample& sample);
double stability_mean(const MlpModel& model, const NeighborhoodSample& sample);
// max_i |m(x) - m(x_i)| / |x - x_i| over points distinct from x.
double max_ratio_lipschitz(const MlpModel& model,
                           const NeighborhoodSample& sample);
double stability_maxratio(const MlpModel& model,
                          const NeighborhoodSample& sample);

// R = (1/k) sum (m(x_i) - gamma |x - x_i|). Requires cfg.gamma.
double stability_exact(const MlpModel& model, const Eigen::Ref<const Vector>& x,
                       const StabilityConfig& cfg);
// R_hat = (1/k) sum (m(x_i) - |m(x) - m(x_i)|).
double stability_relaxed(const MlpModel& model,
                         const Eigen::Ref<const Vector>& x,
                         const StabilityConfig& cfg);
// R with gamma replaced by max_ratio_lipschitz on the same sample.
double stability_maxratio(const MlpModel& model,
                          const Eigen::Ref<const Vector>& x,
                          const StabilityConfig& cfg);
// r = m(x).
double stability_point(const MlpModel& model, const Eigen::Ref<const Vector>& x);
// r_k = (1/k) sum m(x_i).
double stability_mean(const MlpModel& model, const Eigen::Ref<const Vector>& x,
                      const StabilityConfig& cfg);

// Gradient of R_hat with the frozen offsets held fixed. sign(0) is 0 at the
// |.| kink. Requires SampleMode::kFrozen.
Vector stability_gradient(const MlpModel& model,
                          const Eigen::Ref<const Vector>& x,
                          const StabilityConfig& cfg);

// R_hat from precomputed outputs: m(x) and m(x_i) for every sample point.
double relaxed_from_outputs(double center_output, const Vector& sample_outputs);

// Robustness measures that T-Rex:I can ascend.
enum class Measure {
  kPoint,    // r = m(x)
  kMean,     // r_k
  kRelaxed,  // R_hat
};

std::string_view measure_name(Measure measure);
Measure parse_measure(std::string_view name);

struct MeasureValue {
  double value = 0.0;
  Vector gradient;  // empty unless requested
};

// Value (and optionally gradient) of the chosen measure in one batched pass.
MeasureValue evaluate_measure(const MlpModel& model,
                              const Eigen::Ref<const Vector>& x,
                              const StabilityConfig& cfg, Measure measure,
                              bool with_gradient);

}  // namespace trex

#endif  // TREX_STABILITY_H_
