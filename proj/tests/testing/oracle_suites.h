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

#ifndef TREX_TESTS_TESTING_ORACLE_SUITES_H_
#define TREX_TESTS_TESTING_ORACLE_SUITES_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "testing/models.h"
#include "trex/counterfactual.h"
#include "trex/lof.h"
#include "trex/mlp.h"
#include "trex/random.h"
#include "trex/stability.h"

namespace trex::testing {

// Local outlier factor written straight from its definition, recomputing
// every neighborhood on demand. Slow and independent of LofIndex.
class DirectLof {
 public:
  DirectLof(PointMatrix ref, int k) : ref_(std::move(ref)), k_(k) {}

  double score(const Vector& q) const {
    const long self = self_row(q);
    const auto nb = neighbors(q, self);
    double lrd_sum = 0.0;
    for (const auto& [dist, o] : nb) lrd_sum += lrd(o);
    return (lrd_sum / nb.size()) / lrd_of(q, self);
  }

 private:
  long self_row(const Vector& q) const {
    for (Eigen::Index i = 0; i < ref_.rows(); ++i) {
      if ((ref_.row(i).transpose() - q).norm() <= 1e-12) return i;
    }
    return -1;
  }

  std::vector<std::pair<double, long>> neighbors(const Vector& q, long skip) const {
    std::vector<std::pair<double, long>> all;
    for (Eigen::Index i = 0; i < ref_.rows(); ++i) {
      if (i == skip) continue;
      all.emplace_back((ref_.row(i).transpose() - q).norm(), static_cast<long>(i));
    }
    std::sort(all.begin(), all.end());
    all.resize(static_cast<std::size_t>(k_));
    return all;
  }

  double k_distance(long o) const {
    return neighbors(ref_.row(o).transpose(), o).back().first;
  }

  double lrd_of(const Vector& q, long skip) const {
    double reach = 0.0;
    const auto nb = neighbors(q, skip);
    for (const auto& [dist, o] : nb) reach += std::max(dist, k_distance(o));
    return 1.0 / (reach / nb.size());
  }

  double lrd(long o) const { return lrd_of(ref_.row(o).transpose(), o); }

  PointMatrix ref_;
  int k_;
};

// Worst relative disagreement between LofIndex and DirectLof over random
// instances with n <= 30, d <= 3; queries are fresh points and member rows.
inline double lof_suite_worst(int instances, std::uint64_t seed) {
  Rng rng(seed);
  double worst = 0.0;
  for (int t = 0; t < instances; ++t) {
    const int d = 1 + static_cast<int>(rng.uniform_index(3));
    const int n = 4 + static_cast<int>(rng.uniform_index(27));
    const int k = 1 + static_cast<int>(rng.uniform_index(std::min(n - 1, 8)));
    PointMatrix ref(n, d);
    for (int i = 0; i < n; ++i) ref.row(i) = random_point(d, rng).transpose();
    const LofIndex index = LofIndex::build(ref, k);
    const DirectLof direct(ref, k);
    for (int q = 0; q < 5; ++q) {
      const Vector x = q < 3 ? random_point(d, rng, -0.5, 1.5)
                             : Vector(ref.row(rng.uniform_index(n)).transpose());
      const double want = direct.score(x);
      const double got = index.score(x);
      worst = std::max(worst, std::abs(got - want) / std::max(1.0, std::abs(want)));
    }
  }
  return worst;
}

// True if some pre-activation at x is within `margin` of a ReLU kink.
inline bool near_relu_kink(const MlpModel& m, const Vector& x, double margin) {
  Vector a = x;
  for (std::size_t l = 0; l + 1 < m.num_layers(); ++l) {
    const Vector z = m.weights()[l] * a + m.biases()[l];
    if (z.cwiseAbs().minCoeff() < margin) return true;
    a = z.cwiseMax(0.0);
  }
  return false;
}

struct GradientSuiteResult {
  double worst = 0.0;
  int instances = 0;
  int resampled = 0;
};

// Analytic gradient of R_hat on a frozen sample versus central differences
// (h = 1e-5). Instances whose sample touches a ReLU kink or an |.| kink
// within the difference stencil are redrawn.
inline GradientSuiteResult gradient_suite(int instances, std::uint64_t seed) {
  Rng rng(seed);
  GradientSuiteResult result;
  const double h = 1e-5;
  for (std::uint64_t s = 0; result.instances < instances; ++s) {
    const int d = 1 + static_cast<int>(rng.uniform_index(3));
    const int width = 2 + static_cast<int>(rng.uniform_index(9));
    const MlpModel m = random_model({d, width, width, 1}, derive_seed(seed, s));
    const Vector x = random_point(d, rng);
    StabilityConfig cfg;
    cfg.k = 64;
    cfg.sigma2 = 0.01;
    cfg.seed = derive_seed(seed + 1, s);
    cfg.mode = SampleMode::kFrozen;
    const NeighborhoodSample sample = sample_gaussian_neighborhood(x, cfg);
    bool bad = near_relu_kink(m, x, 1e-3);
    const double mx = m.forward(x);
    for (int i = 0; i < cfg.k && !bad; ++i) {
      const Vector p = sample.points.row(i).transpose();
      bad = near_relu_kink(m, p, 1e-3) || std::abs(m.forward(p) - mx) < 1e-4;
    }
    if (bad) {
      ++result.resampled;
      continue;
    }
    const Vector analytic = stability_gradient(m, x, cfg);
    const Vector fd = central_difference(
        [&](const Vector& p) { return stability_relaxed(m, p, cfg); }, x, h);
    result.worst = std::max(result.worst, relative_error(analytic, fd, 1e-6));
    ++result.instances;
  }
  return result;
}

// Distance between the l2 min-cost counterfactual of a linear model and the
// orthogonal projection onto its decision hyperplane, worst over instances.
inline double projection_suite_worst(int instances, std::uint64_t seed) {
  Rng rng(seed);
  double worst = 0.0;
  for (int t = 0; t < instances;) {
    const int d = 2 + static_cast<int>(rng.uniform_index(3));
    Vector w(d);
    for (int j = 0; j < d; ++j) w[j] = 4.0 * rng.gaussian();
    const double b = rng.gaussian();
    const Vector x = random_point(d, rng);
    const double z = w.dot(x) + b;
    if (z > -0.05) continue;
    const MlpModel m = linear_model(w, b);
    const Vector projection = x - z / w.squaredNorm() * w;
    const CounterfactualRecord r = min_cost_cf(m, x, Norm::kL2);
    if (r.verdict != Verdict::kFound) return INFINITY;
    worst = std::max(worst, (r.counterfactual - projection).norm());
    ++t;
  }
  return worst;
}

}  // namespace trex::testing

#endif  // TREX_TESTS_TESTING_ORACLE_SUITES_H_
