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

#ifndef TREX_MLP_H_
#define TREX_MLP_H_

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "trex/dataset.h"
#include "trex/types.h"

namespace trex {

// Feed-forward binary classifier: affine + ReLU hidden layers, affine +
// logistic output. Layer l maps size[l] -> size[l+1], so weights[l] has
// shape (size[l+1], size[l]).
//
// The ReLU derivative at exactly zero is taken to be 0. Outputs are clamped
// to [DBL_MIN, 1 - 2^-53] so they stay strictly inside (0, 1) even when the
// logit saturates.
class MlpModel {
 public:
  MlpModel(std::vector<int> layer_sizes, std::vector<Eigen::MatrixXd> weights,
           std::vector<Eigen::VectorXd> biases);

  // All weights and biases zero; forward() is 0.5 everywhere.
  static MlpModel zeros(std::vector<int> layer_sizes);

  const std::vector<int>& layer_sizes() const { return layer_sizes_; }
  int input_dim() const { return layer_sizes_.front(); }
  std::size_t num_layers() const { return weights_.size(); }

  const std::vector<Eigen::MatrixXd>& weights() const { return weights_; }
  const std::vector<Eigen::VectorXd>& biases() const { return biases_; }
  std::vector<Eigen::MatrixXd>& mutable_weights() { return weights_; }
  std::vector<Eigen::VectorXd>& mutable_biases() { return biases_; }

  double forward(const Eigen::Ref<const Vector>& x) const;
  Vector input_gradient(const Eigen::Ref<const Vector>& x) const;

  // Row i of the result corresponds to row i of `points`.
  Vector forward_batch(const PointMatrix& points) const;
  // Outputs and input gradients of every row in one pass.
  void forward_and_gradient_batch(const PointMatrix& points, Vector* outputs,
                                  PointMatrix* gradients) const;

  // Pre-sigmoid output at x and its input gradient.
  double logit_and_gradient(const Eigen::Ref<const Vector>& x,
                            Vector* gradient) const;
  // Pre-sigmoid output for every row.
  Vector logits_batch(const PointMatrix& points) const;

  bool operator==(const MlpModel& other) const;

 private:
  void check_dim(Eigen::Index d) const;

  std::vector<int> layer_sizes_;
  std::vector<Eigen::MatrixXd> weights_;
  std::vector<Eigen::VectorXd> biases_;
};

double sigmoid(double z);

// Weights ~ N(0, 1/fan_in) drawn layer by layer in row-major order from
// Rng(seed); biases zero.
MlpModel init_mlp(std::span<const int> layer_sizes, std::uint64_t seed);

struct TrainConfig {
  int epochs = 50;
  int batch_size = 32;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-7;
  // Drives the minibatch order.
  std::uint64_t seed = 0;

  void validate() const;
};

struct ParameterGradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
};

// Gradients of sum_i L_i with respect to every parameter, given dL_i/dlogit_i
// for each row of `points`.
ParameterGradients parameter_gradients(const MlpModel& model,
                                       const PointMatrix& points,
                                       const Vector& dloss_dlogit);

class AdamOptimizer {
 public:
  AdamOptimizer(const MlpModel& model, double learning_rate, double beta1,
                double beta2, double epsilon);

  void step(MlpModel& model, const ParameterGradients& grads);

 private:
  double lr_, beta1_, beta2_, epsilon_;
  long t_ = 0;
  std::vector<Eigen::MatrixXd> m_w_, v_w_;
  std::vector<Eigen::VectorXd> m_b_, v_b_;
};

// Adam on binary cross-entropy. Deterministic for a given (model, data, cfg).
MlpModel train(const MlpModel& model, const Dataset& data,
               const TrainConfig& cfg);

// Fraction of rows where 1[m(x) >= 0.5] equals the label.
double accuracy(const MlpModel& model, const Dataset& data);

// Sampling lower bound on the local Lipschitz constant at x: the largest
// |m(x) - m(x_i)| / |x - x_i| over n_samples points uniform in the radius
// ball. Heuristic only; it can never exceed the true local constant.
double local_lipschitz_estimate(const MlpModel& model,
                                const Eigen::Ref<const Vector>& x,
                                int n_samples, double radius,
                                std::uint64_t seed);

// Global upper bound (1/4) * prod_l ||W_l||_2.
double analytic_lipschitz_bound(const MlpModel& model);

}  // namespace trex

#endif  // TREX_MLP_H_
