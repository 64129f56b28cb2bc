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

#ifndef TREX_ENSEMBLE_H_
#define TREX_ENSEMBLE_H_

#include <cstdint>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "trex/dataset.h"
#include "trex/mlp.h"
#include "trex/types.h"

namespace trex {

enum class ChangeKind { kWeightInit, kLeaveOut, kSyntheticNatural };

std::string_view change_kind_name(ChangeKind kind);
ChangeKind parse_change_kind(std::string_view name);

enum class FieldShape {
  kConstant,  // g(x) = v_max
  kLogistic,  // g(x) = v_max * sigmoid(w . x + b)
};

// Perturbation size of the synthetic model change at x:
//
//   v(x) = min(g(x), m(x), 1 - m(x))
//
// The min keeps m(x) +/- v(x) inside [0, 1]. Lip(v) <= max(Lip(g), gamma_m).
struct PerturbationField {
  FieldShape shape = FieldShape::kConstant;
  double v_max = 0.0;
  Vector w;
  double b = 0.0;

  double envelope(const Eigen::Ref<const Vector>& x) const;
  // v given the base output m(x).
  double value(const Eigen::Ref<const Vector>& x, double base_output) const;
  // Lipschitz constant of g: 0 or v_max |w| / 4.
  double envelope_lipschitz() const;
  void validate(Eigen::Index dim) const;
};

// A base model m and changed models M_1..M_n.
class ModelEnsemble {
 public:
  static ModelEnsemble retrained(MlpModel base, ChangeKind kind,
                                 std::vector<MlpModel> members,
                                 std::vector<std::uint64_t> seeds);
  // Member i is m + signs[i] * v.
  static ModelEnsemble synthetic(MlpModel base, PerturbationField field,
                                 std::vector<int> signs, std::uint64_t seed);

  const MlpModel& base() const { return base_; }
  ChangeKind kind() const { return kind_; }
  std::size_t size() const { return size_; }
  const std::vector<std::uint64_t>& seeds() const { return seeds_; }

  // Retrained kinds only.
  const std::vector<MlpModel>& members() const { return members_; }
  // Synthetic kind only.
  const PerturbationField& field() const { return field_; }
  const std::vector<int>& signs() const { return signs_; }

  double predict(std::size_t member, const Eigen::Ref<const Vector>& x) const;
  Vector predict_batch(std::size_t member, const PointMatrix& points) const;
  // (points x members) matrix of every member output.
  Eigen::MatrixXd predict_all(const PointMatrix& points) const;

  // Lipschitz bound on every synthetic member given gamma_m of the base:
  // gamma_m + max(Lip(g), gamma_m).
  double synthetic_lipschitz(double gamma_m) const;

 private:
  ModelEnsemble(MlpModel base, ChangeKind kind)
      : base_(std::move(base)), kind_(kind) {}
  void require_synthetic(const char* op) const;

  MlpModel base_;
  ChangeKind kind_;
  std::size_t size_ = 0;
  std::vector<std::uint64_t> seeds_;
  std::vector<MlpModel> members_;
  PerturbationField field_;
  std::vector<int> signs_;
};

inline constexpr double kDefaultLeaveOutFraction = 0.01;
inline constexpr int kDefaultEnsembleSize = 50;

// Seed of member i: derive_seed(master_seed, i).
std::vector<std::uint64_t> member_seeds(std::uint64_t master_seed,
                                        std::size_t n_models);

// Member with seed s is train(init_mlp(sizes, s), data_s, cfg with seed s),
// where data_s is the full data for kWeightInit and
// leave_out_resample(data, leave_out_fraction, derive_seed(s, 1)) for
// kLeaveOut. Layer sizes come from `base`.
ModelEnsemble retrain_ensemble(const MlpModel& base, const Dataset& data,
                               const TrainConfig& cfg, ChangeKind kind,
                               const std::vector<std::uint64_t>& seeds,
                               double leave_out_fraction =
                                   kDefaultLeaveOutFraction,
                               unsigned workers = 0);
ModelEnsemble retrain_ensemble(const MlpModel& base, const Dataset& data,
                               const TrainConfig& cfg, int n_models,
                               ChangeKind kind, std::uint64_t master_seed,
                               double leave_out_fraction =
                                   kDefaultLeaveOutFraction,
                               unsigned workers = 0);

// n_pairs (+v, -v) member pairs around `model` with a logistic field whose
// weights are standard normal draws from Rng(seed) and b = 0.
ModelEnsemble synthetic_natural_ensemble(const MlpModel& model, double v_max,
                                         int n_pairs, std::uint64_t seed);
ModelEnsemble synthetic_natural_ensemble(const MlpModel& model,
                                         const PerturbationField& field,
                                         int n_pairs, std::uint64_t seed = 0);

}  // namespace trex

#endif  // TREX_ENSEMBLE_H_
