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

#include "trex/counterfactual.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>

#include "trex/errors.h"

namespace trex {

std::string_view generator_name(Generator generator) {
  switch (generator) {
    case Generator::kMinCost:
      return "min-cost";
    case Generator::kNearestNeighbor:
      return "nn";
    case Generator::kTrexI:
      return "trex-i";
    case Generator::kTrexNN:
      return "trex-nn";
  }
  return "min-cost";
}

Generator parse_generator(std::string_view name) {
  if (name == "min-cost") return Generator::kMinCost;
  if (name == "nn") return Generator::kNearestNeighbor;
  if (name == "trex-i") return Generator::kTrexI;
  if (name == "trex-nn") return Generator::kTrexNN;
  throw ConfigError("unknown generator '" + std::string(name) +
                    "' (expected min-cost, nn, trex-i or trex-nn)");
}

std::string_view verdict_name(Verdict verdict) {
  switch (verdict) {
    case Verdict::kFound:
      return "found";
    case Verdict::kUnmet:
      return "unmet";
    case Verdict::kInvalid:
      return "invalid";
    case Verdict::kNotFound:
      return "not-found";
  }
  return "not-found";
}

Verdict parse_verdict(std::string_view name) {
  if (name == "found") return Verdict::kFound;
  if (name == "unmet") return Verdict::kUnmet;
  if (name == "invalid") return Verdict::kInvalid;
  if (name == "not-found") return Verdict::kNotFound;
  throw DataError("unknown verdict '" + std::string(name) + "'");
}

void TrexConfig::validate() const {
  if (k < 1) throw ConfigError("trex: k must be >= 1");
  if (!(sigma2 >= 0.0)) throw ConfigError("trex: sigma2 must be >= 0");
  if (!(tau >= 0.0 && tau <= 1.0)) {
    throw ConfigError("trex: tau must lie in [0, 1]");
  }
  if (!(eta > 0.0)) throw ConfigError("trex: eta must be > 0");
  if (max_steps < 0) throw ConfigError("trex: max_steps must be >= 0");
  if (neighbor_budget < 1) {
    throw ConfigError("trex: neighbor_budget must be >= 1");
  }
}

StabilityConfig TrexConfig::stability() const {
  StabilityConfig cfg;
  cfg.k = k;
  cfg.sigma2 = sigma2;
  cfg.seed = seed;
  cfg.mode = SampleMode::kFrozen;
  return cfg;
}

void MinCostParams::validate() const {
  if (!(lambda0 > 0.0)) throw ConfigError("min-cost: lambda0 must be > 0");
  if (!(lambda_growth >= 1.0)) {
    throw ConfigError("min-cost: lambda_growth must be >= 1");
  }
  if (max_rounds < 1) throw ConfigError("min-cost: max_rounds must be >= 1");
  if (inner_steps < 1) throw ConfigError("min-cost: inner_steps must be >= 1");
  if (!(learning_rate > 0.0)) {
    throw ConfigError("min-cost: learning_rate must be > 0");
  }
}

bool robustness_test(const MlpModel& model, const Eigen::Ref<const Vector>& x,
                     const TrexConfig& cfg) {
  return stability_relaxed(model, x, cfg.stability()) >= cfg.tau;
}

namespace {

// Rounds stop once the linearized distance to the boundary is below this.
constexpr double kPushDistance = 1e-5;
// Inner iterations stop when |step| / t, the proximal gradient mapping, is
// below this.
constexpr double kStationaryTolerance = 1e-7;
constexpr int kBisectionIterations = 60;

void require_negative(const MlpModel& model, const Eigen::Ref<const Vector>& x,
                      std::string_view op) {
  if (model.forward(x) >= kDecisionThreshold) {
    throw PreconditionError(std::string(op) +
                            ": query is already classified favorably");
  }
}

// Proximal map of lr * |delta|_p.
Vector shrink(const Vector& u, double lr, Norm norm) {
  if (norm == Norm::kL1) {
    return u.unaryExpr([lr](double v) {
      return v > lr ? v - lr : (v < -lr ? v + lr : 0.0);
    });
  }
  const double len = u.norm();
  if (len <= lr) return Vector::Zero(u.size());
  return u * (1.0 - lr / len);
}

// First feasible point on [infeasible, feasible] up to bisection precision.
Vector bisect_boundary(const MlpModel& model, const Vector& infeasible,
                       const Vector& feasible) {
  double lo = 0.0;
  double hi = 1.0;
  const Vector step = feasible - infeasible;
  for (int i = 0; i < kBisectionIterations; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (model.forward(infeasible + mid * step) >= kDecisionThreshold) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return infeasible + hi * step;
}

// Steepest unit direction of the norm for the logit gradient g: g / |g| for
// l2, the signed largest coordinate for l1. Empty when g vanishes.
std::optional<Vector> steepest_direction(const Vector& g, Norm norm) {
  Vector dir = Vector::Zero(g.size());
  if (norm == Norm::kL2) {
    if (!(g.norm() > 0.0)) return std::nullopt;
    dir = g / g.norm();
  } else {
    Eigen::Index j = 0;
    if (!(g.cwiseAbs().maxCoeff(&j) > 0.0)) return std::nullopt;
    dir[j] = g[j] > 0.0 ? 1.0 : -1.0;
  }
  return dir;
}

// Moves from p across the decision boundary along the steepest direction,
// starting from the linearized crossing distance and doubling until feasible.
std::optional<Vector> push_across(const MlpModel& model, const Vector& p,
                                  Norm norm) {
  if (model.forward(p) >= kDecisionThreshold) return p;
  Vector g;
  const double z = model.logit_and_gradient(p, &g);
  const std::optional<Vector> dir = steepest_direction(g, norm);
  if (!dir) return std::nullopt;
  double t = std::max(-z / g.dot(*dir), 1e-12);
  for (int i = 0; i < 60; ++i, t *= 2.0) {
    const Vector candidate = p + t * *dir;
    if (model.forward(candidate) >= kDecisionThreshold) {
      return bisect_boundary(model, p, candidate);
    }
  }
  return std::nullopt;
}

// Linearized distance from p to the boundary along the steepest direction
// of the norm; 0 when p is feasible, infinity when the gradient vanishes.
double boundary_distance_estimate(const MlpModel& model, const Vector& p,
                                  Norm norm) {
  Vector g;
  const double z = model.logit_and_gradient(p, &g);
  if (z >= 0.0) return 0.0;
  const double dual = norm == Norm::kL2 ? g.norm() : g.cwiseAbs().maxCoeff();
  if (!(dual > 0.0)) return std::numeric_limits<double>::infinity();
  return -z / dual;
}

CounterfactualRecord make_record(const MlpModel& model,
                                 const Eigen::Ref<const Vector>& x,
                                 Generator generator, Norm norm) {
  CounterfactualRecord rec;
  rec.original = x;
  rec.generator = generator;
  rec.norm = norm;
  rec.stability = std::numeric_limits<double>::quiet_NaN();
  rec.verdict = Verdict::kNotFound;
  rec.model_output = std::numeric_limits<double>::quiet_NaN();
  rec.cost = 0.0;
  (void)model;
  return rec;
}

void set_point(const MlpModel& model, CounterfactualRecord& rec,
               const Vector& point) {
  rec.counterfactual = point;
  rec.cost = distance(rec.original, point, rec.norm);
  rec.model_output = model.forward(point);
}

}  // namespace

CounterfactualRecord min_cost_cf(const MlpModel& model,
                                 const Eigen::Ref<const Vector>& x, Norm norm,
                                 const MinCostParams& params) {
  params.validate();
  require_negative(model, x, "min_cost_cf");
  CounterfactualRecord rec = make_record(model, x, Generator::kMinCost, norm);
  const Vector origin = x;

  std::optional<Vector> best;
  double best_cost = std::numeric_limits<double>::infinity();
  const auto consider = [&](const Vector& point) {
    const double cost = distance(origin, point, norm);
    if (cost < best_cost) {
      best_cost = cost;
      best = point;
    }
  };

  const auto logit = [&](const Vector& point) {
    return model.logits_batch(point.transpose())[0];
  };
  Vector delta = Vector::Zero(x.size());
  double lambda = params.lambda0;
  int steps = 0;
  for (int round = 0; round < params.max_rounds; ++round) {
    double t = params.learning_rate;
    for (int it = 0; it < params.inner_steps; ++it) {
      Vector dz;
      const double z = model.logit_and_gradient(origin + delta, &dz);
      const double f0 = lambda * z * z;
      const Vector grad = 2.0 * lambda * z * dz;
      Vector next_delta;
      bool accepted = false;
      for (int halvings = 0; halvings < 60; ++halvings) {
        next_delta = shrink(delta - t * grad, t, norm);
        const Vector step = next_delta - delta;
        const double z_next = logit(origin + next_delta);
        if (z_next >= 0.0) consider(origin + next_delta);
        const double f1 = lambda * z_next * z_next;
        if (f1 <= f0 + grad.dot(step) + step.squaredNorm() / (2.0 * t)) {
          accepted = true;
          break;
        }
        t *= 0.5;
      }
      ++steps;
      if (!accepted) break;
      const double moved = (next_delta - delta).norm();
      delta = next_delta;
      if (moved <= kStationaryTolerance * t) break;
      t = std::min(params.learning_rate, 2.0 * t);
    }
    const Vector current = origin + delta;
    if (boundary_distance_estimate(model, current, norm) <= kPushDistance) {
      break;
    }
    lambda *= params.lambda_growth;
  }
  if (auto crossed = push_across(model, origin + delta, norm)) {
    consider(*crossed);
  }
  rec.steps = steps;
  if (!best) return rec;
  set_point(model, rec, *best);
  rec.verdict = Verdict::kFound;
  return rec;
}

CounterfactualRecord nn_cf(const MlpModel& model,
                           const Eigen::Ref<const Vector>& x,
                           const Dataset& data, Norm norm) {
  const std::vector<std::size_t> rows =
      nearest_favorable_rows(model, x, data, norm, 1);
  CounterfactualRecord rec =
      make_record(model, x, Generator::kNearestNeighbor, norm);
  if (rows.empty()) return rec;
  set_point(model, rec, data.row(rows.front()));
  rec.verdict = Verdict::kFound;
  return rec;
}

std::vector<std::size_t> nearest_favorable_rows(
    const MlpModel& model, const Eigen::Ref<const Vector>& x,
    const Dataset& data, Norm norm, std::size_t limit) {
  if (data.empty()) {
    throw PreconditionError("nearest-neighbor search: dataset is empty");
  }
  require_negative(model, x, "nearest-neighbor search");
  const Vector outputs = model.forward_batch(data.features());
  std::vector<std::size_t> rows;
  std::vector<double> dist(data.size(), 0.0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (outputs[i] >= kDecisionThreshold) {
      rows.push_back(i);
      dist[i] = distance(x, data.features().row(i).transpose(), norm);
    }
  }
  const auto closer = [&](std::size_t a, std::size_t b) {
    return dist[a] < dist[b] || (dist[a] == dist[b] && a < b);
  };
  const std::size_t keep = std::min(limit, rows.size());
  std::partial_sort(rows.begin(), rows.begin() + keep, rows.end(), closer);
  rows.resize(keep);
  return rows;
}

CounterfactualRecord trex_i(const MlpModel& model,
                            const Eigen::Ref<const Vector>& x,
                            const CounterfactualRecord& base,
                            const TrexConfig& cfg, Measure measure,
                            std::vector<double>* trace) {
  cfg.validate();
  CounterfactualRecord rec = make_record(model, x, Generator::kTrexI, base.norm);
  if (!base.has_counterfactual()) return rec;

  const StabilityConfig stab = cfg.stability();
  Vector current = base.counterfactual;
  int steps = 0;
  MeasureValue value = evaluate_measure(model, current, stab, measure, true);
  if (trace != nullptr) trace->assign(1, value.value);
  while (value.value < cfg.tau && steps < cfg.max_steps) {
    current += cfg.eta * value.gradient;
    ++steps;
    value = evaluate_measure(model, current, stab, measure, true);
    if (trace != nullptr) trace->push_back(value.value);
  }

  set_point(model, rec, current);
  rec.steps = steps;
  rec.stability = measure == Measure::kRelaxed
                      ? value.value
                      : stability_relaxed(model, current, stab);
  if (rec.model_output < kDecisionThreshold) {
    rec.verdict = Verdict::kInvalid;
  } else if (value.value >= cfg.tau) {
    rec.verdict = Verdict::kFound;
  } else {
    rec.verdict = Verdict::kUnmet;
  }
  return rec;
}

CounterfactualRecord trex_nn(const MlpModel& model,
                             const Eigen::Ref<const Vector>& x,
                             const Dataset& data, const TrexConfig& cfg,
                             Norm norm) {
  cfg.validate();
  const std::vector<std::size_t> rows = nearest_favorable_rows(
      model, x, data, norm, static_cast<std::size_t>(cfg.neighbor_budget));
  CounterfactualRecord rec = make_record(model, x, Generator::kTrexNN, norm);
  const StabilityConfig stab = cfg.stability();
  int tested = 0;
  for (const std::size_t row : rows) {
    ++tested;
    const Vector candidate = data.row(row);
    const double r_hat = stability_relaxed(model, candidate, stab);
    if (r_hat >= cfg.tau) {
      set_point(model, rec, candidate);
      rec.stability = r_hat;
      rec.verdict = Verdict::kFound;
      rec.steps = tested;
      return rec;
    }
  }
  rec.steps = tested;
  return rec;
}

}  // namespace trex
