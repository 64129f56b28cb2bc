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

#include "trex/mlp.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <Eigen/SVD>

#include "trex/errors.h"
#include "trex/random.h"

namespace trex {

namespace {

using Batch = Eigen::MatrixXd;

constexpr double kMaxOutput = 1.0 - 0x1.0p-53;

void validate_layer_sizes(const std::vector<int>& sizes) {
  if (sizes.size() < 2) {
    throw PreconditionError(
        "MlpModel: layer_sizes needs an input and an output layer");
  }
  if (sizes.back() != 1) {
    throw PreconditionError("MlpModel: output layer must have size 1");
  }
  for (const int s : sizes) {
    if (s <= 0) throw PreconditionError("MlpModel: layer sizes must be positive");
  }
}

double clamp_output(double p) {
  return std::clamp(p, std::numeric_limits<double>::min(), kMaxOutput);
}

// Activations of every layer for a batch; activations[0] is the input.
struct ForwardPass {
  std::vector<Batch> activations;
  std::vector<Batch> pre_activations;
  Vector logits;
};

ForwardPass run_forward(const MlpModel& model, const PointMatrix& points) {
  ForwardPass pass;
  const std::size_t n_layers = model.num_layers();
  pass.activations.reserve(n_layers);
  pass.pre_activations.reserve(n_layers);
  pass.activations.emplace_back(points);
  for (std::size_t l = 0; l < n_layers; ++l) {
    Batch z;
    z.noalias() = pass.activations.back() * model.weights()[l].transpose();
    z.rowwise() += model.biases()[l].transpose();
    if (l + 1 == n_layers) {
      pass.logits = z.col(0);
    } else {
      pass.activations.push_back(z.cwiseMax(0.0));
    }
    pass.pre_activations.push_back(std::move(z));
  }
  return pass;
}

// Back-propagates per-row dL/dlogit to dL/dinput of hidden layer l (rows are
// samples). Returns the gradient with respect to the network input when
// stop_layer == 0.
Batch backprop_to(const MlpModel& model, const ForwardPass& pass,
                  const Vector& dlogit, std::size_t stop_layer,
                  ParameterGradients* grads) {
  const std::size_t n_layers = model.num_layers();
  Batch delta = dlogit;  // n x 1, gradient at the pre-activation of layer L-1
  for (std::size_t l = n_layers; l-- > stop_layer;) {
    if (grads != nullptr) {
      grads->weights[l].noalias() = delta.transpose() * pass.activations[l];
      grads->biases[l] = delta.colwise().sum().transpose();
    }
    Batch upstream;
    upstream.noalias() = delta * model.weights()[l];
    if (l == 0) return upstream;
    // ReLU derivative; exactly zero pre-activations get derivative 0.
    delta = (pass.pre_activations[l - 1].array() > 0.0)
                .select(upstream.array(), 0.0)
                .matrix();
  }
  return delta;
}

}  // namespace

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

MlpModel::MlpModel(std::vector<int> layer_sizes,
                   std::vector<Eigen::MatrixXd> weights,
                   std::vector<Eigen::VectorXd> biases)
    : layer_sizes_(std::move(layer_sizes)),
      weights_(std::move(weights)),
      biases_(std::move(biases)) {
  validate_layer_sizes(layer_sizes_);
  const std::size_t n_layers = layer_sizes_.size() - 1;
  if (weights_.size() != n_layers || biases_.size() != n_layers) {
    throw PreconditionError("MlpModel: expected " + std::to_string(n_layers) +
                            " weight matrices and bias vectors");
  }
  for (std::size_t l = 0; l < n_layers; ++l) {
    if (weights_[l].rows() != layer_sizes_[l + 1] ||
        weights_[l].cols() != layer_sizes_[l] ||
        biases_[l].size() != layer_sizes_[l + 1]) {
      throw PreconditionError("MlpModel: parameter shape mismatch at layer " +
                              std::to_string(l));
    }
  }
}

MlpModel MlpModel::zeros(std::vector<int> layer_sizes) {
  validate_layer_sizes(layer_sizes);
  std::vector<Eigen::MatrixXd> w;
  std::vector<Eigen::VectorXd> b;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    w.push_back(Eigen::MatrixXd::Zero(layer_sizes[l + 1], layer_sizes[l]));
    b.push_back(Eigen::VectorXd::Zero(layer_sizes[l + 1]));
  }
  return MlpModel(std::move(layer_sizes), std::move(w), std::move(b));
}

void MlpModel::check_dim(Eigen::Index d) const {
  if (d != input_dim()) {
    throw PreconditionError("MlpModel: input has dimension " +
                            std::to_string(d) + ", model expects " +
                            std::to_string(input_dim()));
  }
}

double MlpModel::forward(const Eigen::Ref<const Vector>& x) const {
  check_dim(x.size());
  const PointMatrix row = x.transpose();
  return forward_batch(row)[0];
}

Vector MlpModel::input_gradient(const Eigen::Ref<const Vector>& x) const {
  check_dim(x.size());
  PointMatrix points = x.transpose();
  Vector out;
  PointMatrix grads;
  forward_and_gradient_batch(points, &out, &grads);
  return grads.row(0).transpose();
}

double MlpModel::logit_and_gradient(const Eigen::Ref<const Vector>& x,
                                    Vector* gradient) const {
  check_dim(x.size());
  const PointMatrix points = x.transpose();
  const ForwardPass pass = run_forward(*this, points);
  *gradient =
      backprop_to(*this, pass, Vector::Ones(1), 0, nullptr).row(0).transpose();
  return pass.logits[0];
}

Vector MlpModel::logits_batch(const PointMatrix& points) const {
  check_dim(points.cols());
  return run_forward(*this, points).logits;
}

Vector MlpModel::forward_batch(const PointMatrix& points) const {
  check_dim(points.cols());
  Vector logits = run_forward(*this, points).logits;
  return logits.unaryExpr([](double z) { return clamp_output(sigmoid(z)); });
}

void MlpModel::forward_and_gradient_batch(const PointMatrix& points,
                                          Vector* outputs,
                                          PointMatrix* gradients) const {
  check_dim(points.cols());
  const ForwardPass pass = run_forward(*this, points);
  Vector dlogit(pass.logits.size());
  outputs->resize(pass.logits.size());
  for (Eigen::Index i = 0; i < pass.logits.size(); ++i) {
    const double p = sigmoid(pass.logits[i]);
    dlogit[i] = p * (1.0 - p);
    (*outputs)[i] = clamp_output(p);
  }
  *gradients = backprop_to(*this, pass, dlogit, 0, nullptr);
}

bool MlpModel::operator==(const MlpModel& other) const {
  if (layer_sizes_ != other.layer_sizes_) return false;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    if (weights_[l] != other.weights_[l] || biases_[l] != other.biases_[l]) {
      return false;
    }
  }
  return true;
}

MlpModel init_mlp(std::span<const int> layer_sizes, std::uint64_t seed) {
  MlpModel model =
      MlpModel::zeros(std::vector<int>(layer_sizes.begin(), layer_sizes.end()));
  Rng rng(seed);
  for (auto& w : model.mutable_weights()) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(w.cols()));
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) {
        w(r, c) = scale * rng.gaussian();
      }
    }
  }
  return model;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw PreconditionError("TrainConfig: epochs must be >= 1");
  if (batch_size < 1) {
    throw PreconditionError("TrainConfig: batch_size must be >= 1");
  }
  if (!(learning_rate > 0.0)) {
    throw PreconditionError("TrainConfig: learning_rate must be > 0");
  }
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) ||
      !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    throw PreconditionError("TrainConfig: Adam betas must lie in [0, 1)");
  }
  if (!(adam_epsilon > 0.0)) {
    throw PreconditionError("TrainConfig: adam_epsilon must be > 0");
  }
}

ParameterGradients parameter_gradients(const MlpModel& model,
                                       const PointMatrix& points,
                                       const Vector& dloss_dlogit) {
  if (dloss_dlogit.size() != points.rows()) {
    throw PreconditionError("parameter_gradients: one dloss/dlogit per row");
  }
  if (points.cols() != model.input_dim()) {
    throw PreconditionError("parameter_gradients: dimension mismatch");
  }
  const ForwardPass pass = run_forward(model, points);
  ParameterGradients grads;
  grads.weights.resize(model.num_layers());
  grads.biases.resize(model.num_layers());
  backprop_to(model, pass, dloss_dlogit, 0, &grads);
  return grads;
}

AdamOptimizer::AdamOptimizer(const MlpModel& model, double learning_rate,
                             double beta1, double beta2, double epsilon)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), epsilon_(epsilon) {
  for (std::size_t l = 0; l < model.num_layers(); ++l) {
    const auto& w = model.weights()[l];
    m_w_.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
    v_w_.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
    m_b_.push_back(Eigen::VectorXd::Zero(model.biases()[l].size()));
    v_b_.push_back(Eigen::VectorXd::Zero(model.biases()[l].size()));
  }
}

void AdamOptimizer::step(MlpModel& model, const ParameterGradients& grads) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  const auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
    m = beta1_ * m + (1.0 - beta1_) * g;
    v = beta2_ * v + (1.0 - beta2_) * g.cwiseProduct(g);
    param.array() -=
        lr_ * (m.array() / c1) / ((v.array() / c2).sqrt() + epsilon_);
  };
  for (std::size_t l = 0; l < model.num_layers(); ++l) {
    update(model.mutable_weights()[l], m_w_[l], v_w_[l], grads.weights[l]);
    update(model.mutable_biases()[l], m_b_[l], v_b_[l], grads.biases[l]);
  }
}

MlpModel train(const MlpModel& model, const Dataset& data,
               const TrainConfig& cfg) {
  cfg.validate();
  if (data.empty()) throw PreconditionError("train: dataset is empty");
  if (static_cast<int>(data.dim()) != model.input_dim()) {
    throw PreconditionError("train: dataset has " + std::to_string(data.dim()) +
                            " features, model expects " +
                            std::to_string(model.input_dim()));
  }

  MlpModel trained = model;
  AdamOptimizer adam(trained, cfg.learning_rate, cfg.adam_beta1,
                     cfg.adam_beta2, cfg.adam_epsilon);
  Rng rng(derive_seed(cfg.seed, "minibatch-order"));
  const std::size_t n = data.size();
  const auto batch = static_cast<std::size_t>(cfg.batch_size);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t count = std::min(batch, n - start);
      PointMatrix xb(count, data.dim());
      Vector yb(count);
      for (std::size_t i = 0; i < count; ++i) {
        xb.row(i) = data.features().row(order[start + i]);
        yb[i] = data.label(order[start + i]);
      }
      const ForwardPass pass = run_forward(trained, xb);
      Vector dlogit(count);
      for (std::size_t i = 0; i < count; ++i) {
        const double z = pass.logits[i];
        // Stable BCE with logits.
        epoch_loss += std::max(z, 0.0) - z * yb[i] +
                      std::log1p(std::exp(-std::abs(z)));
        dlogit[i] = (sigmoid(z) - yb[i]) / static_cast<double>(count);
      }
      ParameterGradients grads;
      grads.weights.resize(trained.num_layers());
      grads.biases.resize(trained.num_layers());
      backprop_to(trained, pass, dlogit, 0, &grads);
      adam.step(trained, grads);
    }
    if (!std::isfinite(epoch_loss)) {
      throw TrainingError("train: loss became non-finite in epoch " +
                              std::to_string(epoch),
                          epoch);
    }
  }
  return trained;
}

double accuracy(const MlpModel& model, const Dataset& data) {
  if (data.empty()) throw PreconditionError("accuracy: dataset is empty");
  const Vector p = model.forward_batch(data.features());
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    correct += static_cast<int>(p[i] >= 0.5) == data.label(i);
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

double local_lipschitz_estimate(const MlpModel& model,
                                const Eigen::Ref<const Vector>& x,
                                int n_samples, double radius,
                                std::uint64_t seed) {
  if (n_samples < 2) {
    throw PreconditionError("local_lipschitz_estimate: n_samples must be >= 2");
  }
  if (!(radius > 0.0)) {
    throw PreconditionError("local_lipschitz_estimate: radius must be > 0");
  }
  const Eigen::Index d = x.size();
  Rng rng(seed);
  PointMatrix points(n_samples, d);
  for (int i = 0; i < n_samples; ++i) {
    Vector dir(d);
    for (Eigen::Index j = 0; j < d; ++j) dir[j] = rng.gaussian();
    const double norm = dir.norm();
    const double r =
        radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
    points.row(i) = (x + (norm > 0.0 ? r / norm : 0.0) * dir).transpose();
  }
  const double center = model.forward(x);
  const Vector outputs = model.forward_batch(points);
  double best = 0.0;
  for (int i = 0; i < n_samples; ++i) {
    const double dist = (points.row(i).transpose() - x).norm();
    if (dist > 0.0) best = std::max(best, std::abs(center - outputs[i]) / dist);
  }
  return best;
}

double analytic_lipschitz_bound(const MlpModel& model) {
  double bound = 0.25;
  for (const auto& w : model.weights()) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(w);
    bound *= svd.singularValues().size() > 0 ? svd.singularValues()[0] : 0.0;
  }
  return bound;
}

}  // namespace trex
