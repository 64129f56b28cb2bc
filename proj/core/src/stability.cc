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

#include "trex/stability.h"

#include <cmath>
#include <string>

#include "trex/errors.h"
#include "trex/random.h"

namespace trex {

void StabilityConfig::validate() const {
  if (k < 1) throw ConfigError("stability: k must be >= 1");
  if (!(sigma2 >= 0.0) || !std::isfinite(sigma2)) {
    throw ConfigError("stability: sigma2 must be finite and >= 0");
  }
  if (gamma && !(*gamma >= 0.0)) {
    throw ConfigError("stability: gamma must be >= 0");
  }
  if (gamma_m && !(*gamma_m >= 0.0)) {
    throw ConfigError("stability: gamma_m must be >= 0");
  }
  if (distribution != SamplingDistribution::kGaussian) {
    throw ConfigError(
        "stability: only Gaussian neighborhood sampling is implemented");
  }
}

std::uint64_t neighborhood_seed(const Eigen::Ref<const Vector>& x,
                                const StabilityConfig& cfg) {
  if (cfg.mode == SampleMode::kFrozen) return cfg.seed;
  const Vector copy = x;
  const auto bytes = std::as_bytes(
      std::span<const double>(copy.data(), static_cast<std::size_t>(copy.size())));
  return derive_seed(cfg.seed, hash_bytes(bytes));
}

NeighborhoodSample sample_gaussian_neighborhood(const Eigen::Ref<const Vector>& x,
                                                const StabilityConfig& cfg) {
  cfg.validate();
  NeighborhoodSample sample;
  sample.center = x;
  sample.seed = neighborhood_seed(x, cfg);
  const double sigma = std::sqrt(cfg.sigma2);
  const Eigen::Index d = x.size();
  sample.points.resize(cfg.k, d);
  Rng rng(sample.seed);
  for (int i = 0; i < cfg.k; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      sample.points(i, j) = x[j] + sigma * rng.gaussian();
    }
  }
  return sample;
}

namespace {

Vector distances_to_center(const NeighborhoodSample& sample) {
  return (sample.points.rowwise() - sample.center.transpose())
      .rowwise()
      .norm();
}

struct SampleOutputs {
  Vector samples;
  double center = 0.0;
};

// Every measure evaluates the sample rows followed by the center in a single
// batch, so values agree bitwise with the gradient path below.
PointMatrix with_center(const NeighborhoodSample& sample) {
  const Eigen::Index k = sample.points.rows();
  PointMatrix batch(k + 1, sample.center.size());
  batch.topRows(k) = sample.points;
  batch.row(k) = sample.center.transpose();
  return batch;
}

SampleOutputs sample_outputs(const MlpModel& model,
                             const NeighborhoodSample& sample) {
  const Eigen::Index k = sample.points.rows();
  const Vector out = model.forward_batch(with_center(sample));
  return {out.head(k), out[k]};
}

}  // namespace

double relaxed_from_outputs(double center_output, const Vector& sample_outputs) {
  if (sample_outputs.size() == 0) {
    throw PreconditionError("relaxed stability needs at least one sample");
  }
  return (sample_outputs.array() -
          (center_output - sample_outputs.array()).abs())
      .mean();
}

double stability_exact(const MlpModel& model, const NeighborhoodSample& sample,
                       double gamma) {
  const Vector outputs = sample_outputs(model, sample).samples;
  return (outputs - gamma * distances_to_center(sample)).mean();
}

double stability_relaxed(const MlpModel& model,
                         const NeighborhoodSample& sample) {
  const SampleOutputs out = sample_outputs(model, sample);
  return relaxed_from_outputs(out.center, out.samples);
}

double stability_mean(const MlpModel& model, const NeighborhoodSample& sample) {
  return sample_outputs(model, sample).samples.mean();
}

double max_ratio_lipschitz(const MlpModel& model,
                           const NeighborhoodSample& sample) {
  const SampleOutputs out = sample_outputs(model, sample);
  const double center = out.center;
  const Vector& outputs = out.samples;
  const Vector dist = distances_to_center(sample);
  double best = 0.0;
  bool any = false;
  for (Eigen::Index i = 0; i < outputs.size(); ++i) {
    if (dist[i] == 0.0) continue;
    any = true;
    best = std::max(best, std::abs(center - outputs[i]) / dist[i]);
  }
  if (!any) {
    throw NumericalError(
        "max-ratio stability: every sampled point coincides with x");
  }
  return best;
}

double stability_maxratio(const MlpModel& model,
                          const NeighborhoodSample& sample) {
  return stability_exact(model, sample, max_ratio_lipschitz(model, sample));
}

double stability_exact(const MlpModel& model, const Eigen::Ref<const Vector>& x,
                       const StabilityConfig& cfg) {
  if (!cfg.gamma) {
    throw ConfigError("stability_exact: gamma must be set");
  }
  return stability_exact(model, sample_gaussian_neighborhood(x, cfg),
                         *cfg.gamma);
}

double stability_relaxed(const MlpModel& model,
                         const Eigen::Ref<const Vector>& x,
                         const StabilityConfig& cfg) {
  return stability_relaxed(model, sample_gaussian_neighborhood(x, cfg));
}

double stability_maxratio(const MlpModel& model,
                          const Eigen::Ref<const Vector>& x,
                          const StabilityConfig& cfg) {
  if (!(cfg.sigma2 > 0.0)) {
    throw PreconditionError("stability_maxratio: sigma2 must be > 0");
  }
  return stability_maxratio(model, sample_gaussian_neighborhood(x, cfg));
}

double stability_point(const MlpModel& model,
                       const Eigen::Ref<const Vector>& x) {
  return model.forward(x);
}

double stability_mean(const MlpModel& model, const Eigen::Ref<const Vector>& x,
                      const StabilityConfig& cfg) {
  return stability_mean(model, sample_gaussian_neighborhood(x, cfg));
}

Vector stability_gradient(const MlpModel& model,
                          const Eigen::Ref<const Vector>& x,
                          const StabilityConfig& cfg) {
  return evaluate_measure(model, x, cfg, Measure::kRelaxed, true).gradient;
}

std::string_view measure_name(Measure measure) {
  switch (measure) {
    case Measure::kPoint:
      return "point";
    case Measure::kMean:
      return "mean";
    case Measure::kRelaxed:
      return "relaxed";
  }
  return "relaxed";
}

Measure parse_measure(std::string_view name) {
  if (name == "point") return Measure::kPoint;
  if (name == "mean") return Measure::kMean;
  if (name == "relaxed") return Measure::kRelaxed;
  throw ConfigError("unknown stability measure '" + std::string(name) +
                    "' (expected point, mean or relaxed)");
}

MeasureValue evaluate_measure(const MlpModel& model,
                              const Eigen::Ref<const Vector>& x,
                              const StabilityConfig& cfg, Measure measure,
                              bool with_gradient) {
  MeasureValue result;
  if (measure == Measure::kPoint) {
    if (with_gradient) {
      PointMatrix row = x.transpose();
      Vector out;
      PointMatrix grad;
      model.forward_and_gradient_batch(row, &out, &grad);
      result.value = out[0];
      result.gradient = grad.row(0).transpose();
    } else {
      result.value = model.forward(x);
    }
    return result;
  }

  if (with_gradient && cfg.mode != SampleMode::kFrozen) {
    throw PreconditionError(
        "stability gradient requires the frozen sample mode");
  }
  const NeighborhoodSample sample = sample_gaussian_neighborhood(x, cfg);
  const Eigen::Index k = sample.points.rows();

  if (!with_gradient) {
    const SampleOutputs out = sample_outputs(model, sample);
    result.value = measure == Measure::kMean
                       ? out.samples.mean()
                       : relaxed_from_outputs(out.center, out.samples);
    return result;
  }

  Vector outputs;
  PointMatrix grads;
  model.forward_and_gradient_batch(with_center(sample), &outputs, &grads);
  const Vector sample_out = outputs.head(k);
  const double center = outputs[k];
  const Vector center_grad = grads.row(k).transpose();
  const auto sample_grads = grads.topRows(k);

  if (measure == Measure::kMean) {
    result.value = sample_out.mean();
    result.gradient = sample_grads.colwise().mean().transpose();
    return result;
  }

  result.value = relaxed_from_outputs(center, sample_out);
  // d/dx [m(x+d_i) - |m(x) - m(x+d_i)|]
  //   = g_i - sign(m(x) - m_i) (g_x - g_i)
  Vector total = Vector::Zero(x.size());
  double sign_sum = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    const double diff = center - sample_out[i];
    const double s = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
    total += (1.0 + s) * sample_grads.row(i).transpose();
    sign_sum += s;
  }
  total -= sign_sum * center_grad;
  result.gradient = total / static_cast<double>(k);
  return result;
}

}  // namespace trex
