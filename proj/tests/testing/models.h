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

#ifndef TREX_TESTS_TESTING_MODELS_H_
#define TREX_TESTS_TESTING_MODELS_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "trex/dataset.h"
#include "trex/mlp.h"
#include "trex/random.h"
#include "trex/types.h"

namespace trex::testing {

// Single-layer model sigma(w . x + b).
inline MlpModel linear_model(const Vector& w, double b) {
  const int d = static_cast<int>(w.size());
  Eigen::MatrixXd weights = w.transpose();
  return MlpModel({d, 1}, {weights}, {Eigen::VectorXd::Constant(1, b)});
}

// Output c everywhere (up to rounding of the logit).
inline MlpModel constant_model(int d, double c) {
  return linear_model(Vector::Zero(d), std::log(c / (1.0 - c)));
}

// sigmoid(slope * (x - center)) in one dimension.
inline MlpModel sigmoid_1d(double slope, double center) {
  return linear_model(Vector::Constant(1, slope), -slope * center);
}

// init_mlp plus small nonzero biases, so ReLU kinks land off the origin.
inline MlpModel random_model(const std::vector<int>& sizes, std::uint64_t seed) {
  MlpModel model = init_mlp(sizes, seed);
  Rng rng(derive_seed(seed, "test-biases"));
  for (auto& b : model.mutable_biases()) {
    for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = 0.3 * rng.gaussian();
  }
  return model;
}

inline Vector random_point(Eigen::Index d, Rng& rng, double lo = 0.0,
                           double hi = 1.0) {
  Vector x(d);
  for (Eigen::Index i = 0; i < d; ++i) x[i] = lo + (hi - lo) * rng.uniform();
  return x;
}

inline Vector central_difference(const std::function<double(const Vector&)>& f,
                                 const Vector& x, double h = 1e-5) {
  Vector g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vector up = x, down = x;
    up[i] += h;
    down[i] -= h;
    g[i] = (f(up) - f(down)) / (2.0 * h);
  }
  return g;
}

// Max-norm relative error with an absolute floor for tiny gradients.
inline double relative_error(const Vector& got, const Vector& want,
                             double floor = 1e-8) {
  const double scale = std::max(want.cwiseAbs().maxCoeff(), floor);
  return (got - want).cwiseAbs().maxCoeff() / scale;
}

// Two well separated Gaussian blobs in [0,1]^2, labels 0 and 1.
inline Dataset two_clusters(std::size_t n_per_class, std::uint64_t seed) {
  Rng rng(seed);
  PointMatrix x(2 * n_per_class, 2);
  std::vector<int> y(2 * n_per_class);
  for (std::size_t i = 0; i < 2 * n_per_class; ++i) {
    const int label = i < n_per_class ? 0 : 1;
    const double cx = label == 0 ? 0.25 : 0.75;
    x(i, 0) = cx + 0.05 * rng.gaussian();
    x(i, 1) = cx + 0.05 * rng.gaussian();
    y[i] = label;
  }
  std::vector<ColumnMeta> cols(2);
  cols[0].name = "x0";
  cols[1].name = "x1";
  return Dataset(std::move(x), std::move(y), std::move(cols));
}

struct MoonsFixture {
  Dataset train;
  Dataset test;
  MlpModel model;
};

// Small trained moons classifier shared by the generator and harness tests.
inline MoonsFixture moons_fixture(std::size_t n = 200, int width = 32,
                                  std::uint64_t seed = 1) {
  auto [train_set, test_set] = split(make_moons(n, 0.1, seed), 0.3, seed + 1);
  TrainConfig cfg;
  cfg.epochs = 50;
  cfg.learning_rate = 0.005;
  cfg.seed = seed + 2;
  const std::vector<int> sizes = {2, width, width, 1};
  MlpModel model = trex::train(init_mlp(sizes, seed + 3), train_set, cfg);
  return {std::move(train_set), std::move(test_set), std::move(model)};
}

}  // namespace trex::testing

#endif  // TREX_TESTS_TESTING_MODELS_H_
