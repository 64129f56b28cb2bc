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

#include "trex/ensemble.h"

#include <algorithm>
#include <optional>
#include <string>
#include <utility>

#include "trex/errors.h"
#include "trex/parallel.h"
#include "trex/random.h"

namespace trex {

std::string_view change_kind_name(ChangeKind kind) {
  switch (kind) {
    case ChangeKind::kWeightInit:
      return "weight-init";
    case ChangeKind::kLeaveOut:
      return "leave-out";
    case ChangeKind::kSyntheticNatural:
      return "synthetic-natural";
  }
  return "weight-init";
}

ChangeKind parse_change_kind(std::string_view name) {
  if (name == "weight-init") return ChangeKind::kWeightInit;
  if (name == "leave-out") return ChangeKind::kLeaveOut;
  if (name == "synthetic-natural") return ChangeKind::kSyntheticNatural;
  throw ConfigError("unknown change kind '" + std::string(name) +
                    "' (expected weight-init, leave-out or synthetic-natural)");
}

double PerturbationField::envelope(const Eigen::Ref<const Vector>& x) const {
  if (shape == FieldShape::kConstant) return v_max;
  return v_max * sigmoid(w.dot(x) + b);
}

double PerturbationField::value(const Eigen::Ref<const Vector>& x,
                                double base_output) const {
  return std::min({envelope(x), base_output, 1.0 - base_output});
}

double PerturbationField::envelope_lipschitz() const {
  if (shape == FieldShape::kConstant) return 0.0;
  return 0.25 * v_max * w.norm();
}

void PerturbationField::validate(Eigen::Index dim) const {
  if (!(v_max >= 0.0 && v_max < 0.5)) {
    throw PreconditionError("perturbation field: v_max must lie in [0, 0.5)");
  }
  if (shape == FieldShape::kLogistic && w.size() != dim) {
    throw PreconditionError("perturbation field: w has dimension " +
                      std::to_string(w.size()) + ", model expects " +
                      std::to_string(dim));
  }
}

ModelEnsemble ModelEnsemble::retrained(MlpModel base, ChangeKind kind,
                                       std::vector<MlpModel> members,
                                       std::vector<std::uint64_t> seeds) {
  if (kind == ChangeKind::kSyntheticNatural) {
    throw PreconditionError("ModelEnsemble::retrained: kind is synthetic");
  }
  if (members.empty()) {
    throw PreconditionError("ModelEnsemble: at least one member is required");
  }
  if (seeds.size() != members.size()) {
    throw PreconditionError("ModelEnsemble: one seed per member is required");
  }
  for (const MlpModel& m : members) {
    if (m.input_dim() != base.input_dim()) {
      throw PreconditionError("ModelEnsemble: member input dimension differs");
    }
  }
  ModelEnsemble e(std::move(base), kind);
  e.size_ = members.size();
  e.members_ = std::move(members);
  e.seeds_ = std::move(seeds);
  return e;
}

ModelEnsemble ModelEnsemble::synthetic(MlpModel base, PerturbationField field,
                                       std::vector<int> signs,
                                       std::uint64_t seed) {
  field.validate(base.input_dim());
  if (signs.empty()) {
    throw PreconditionError("ModelEnsemble: at least one member is required");
  }
  for (const int s : signs) {
    if (s != 1 && s != -1) {
      throw PreconditionError("ModelEnsemble: signs must be +1 or -1");
    }
  }
  ModelEnsemble e(std::move(base), ChangeKind::kSyntheticNatural);
  e.size_ = signs.size();
  e.seeds_.assign(signs.size(), seed);
  e.field_ = std::move(field);
  e.signs_ = std::move(signs);
  return e;
}

void ModelEnsemble::require_synthetic(const char* op) const {
  if (kind_ != ChangeKind::kSyntheticNatural) {
    throw PreconditionError(std::string(op) +
                            ": ensemble is not synthetic-natural");
  }
}

double ModelEnsemble::predict(std::size_t member,
                              const Eigen::Ref<const Vector>& x) const {
  if (member >= size_) throw PreconditionError("ModelEnsemble: bad member");
  if (kind_ != ChangeKind::kSyntheticNatural) {
    return members_[member].forward(x);
  }
  const double m = base_.forward(x);
  return m + signs_[member] * field_.value(x, m);
}

Vector ModelEnsemble::predict_batch(std::size_t member,
                                    const PointMatrix& points) const {
  if (member >= size_) throw PreconditionError("ModelEnsemble: bad member");
  if (kind_ != ChangeKind::kSyntheticNatural) {
    return members_[member].forward_batch(points);
  }
  Vector out = base_.forward_batch(points);
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    out[i] += signs_[member] * field_.value(points.row(i).transpose(), out[i]);
  }
  return out;
}

Eigen::MatrixXd ModelEnsemble::predict_all(const PointMatrix& points) const {
  Eigen::MatrixXd out(points.rows(), static_cast<Eigen::Index>(size_));
  if (kind_ != ChangeKind::kSyntheticNatural) {
    for (std::size_t j = 0; j < size_; ++j) {
      out.col(static_cast<Eigen::Index>(j)) = members_[j].forward_batch(points);
    }
    return out;
  }
  const Vector m = base_.forward_batch(points);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const double v = field_.value(points.row(i).transpose(), m[i]);
    for (std::size_t j = 0; j < size_; ++j) {
      out(i, static_cast<Eigen::Index>(j)) = m[i] + signs_[j] * v;
    }
  }
  return out;
}

double ModelEnsemble::synthetic_lipschitz(double gamma_m) const {
  require_synthetic("synthetic_lipschitz");
  return gamma_m + std::max(field_.envelope_lipschitz(), gamma_m);
}

std::vector<std::uint64_t> member_seeds(std::uint64_t master_seed,
                                        std::size_t n_models) {
  std::vector<std::uint64_t> seeds(n_models);
  for (std::size_t i = 0; i < n_models; ++i) {
    seeds[i] = derive_seed(master_seed, static_cast<std::uint64_t>(i));
  }
  return seeds;
}

ModelEnsemble retrain_ensemble(const MlpModel& base, const Dataset& data,
                               const TrainConfig& cfg, ChangeKind kind,
                               const std::vector<std::uint64_t>& seeds,
                               double leave_out_fraction, unsigned workers) {
  if (kind == ChangeKind::kSyntheticNatural) {
    throw PreconditionError(
        "retrain_ensemble: use synthetic_natural_ensemble for synthetic "
        "changes");
  }
  if (seeds.empty()) {
    throw PreconditionError("retrain_ensemble: n_models must be >= 1");
  }
  cfg.validate();
  std::vector<std::optional<MlpModel>> trained(seeds.size());
  parallel_for(
      seeds.size(),
      [&](std::size_t i) {
        const std::uint64_t s = seeds[i];
        TrainConfig member_cfg = cfg;
        member_cfg.seed = s;
        try {
          const MlpModel init = init_mlp(base.layer_sizes(), s);
          if (kind == ChangeKind::kLeaveOut) {
            const Dataset kept =
                leave_out_resample(data, leave_out_fraction, derive_seed(s, 1));
            trained[i] = train(init, kept, member_cfg);
          } else {
            trained[i] = train(init, data, member_cfg);
          }
        } catch (const TrainingError& e) {
          throw TrainingError("ensemble member " + std::to_string(i) + ": " +
                                  e.what(),
                              e.epoch());
        } catch (const Error& e) {
          throw Error("ensemble member " + std::to_string(i) + ": " +
                      e.what());
        }
      },
      workers);
  std::vector<MlpModel> members;
  members.reserve(seeds.size());
  for (auto& m : trained) members.push_back(std::move(*m));
  return ModelEnsemble::retrained(base, kind, std::move(members), seeds);
}

ModelEnsemble retrain_ensemble(const MlpModel& base, const Dataset& data,
                               const TrainConfig& cfg, int n_models,
                               ChangeKind kind, std::uint64_t master_seed,
                               double leave_out_fraction, unsigned workers) {
  if (n_models < 1) {
    throw PreconditionError("retrain_ensemble: n_models must be >= 1");
  }
  return retrain_ensemble(
      base, data, cfg, kind,
      member_seeds(master_seed, static_cast<std::size_t>(n_models)),
      leave_out_fraction, workers);
}

ModelEnsemble synthetic_natural_ensemble(const MlpModel& model,
                                         const PerturbationField& field,
                                         int n_pairs, std::uint64_t seed) {
  if (n_pairs < 1) {
    throw PreconditionError("synthetic_natural_ensemble: n_pairs must be >= 1");
  }
  std::vector<int> signs;
  signs.reserve(2 * static_cast<std::size_t>(n_pairs));
  for (int i = 0; i < n_pairs; ++i) {
    signs.push_back(1);
    signs.push_back(-1);
  }
  return ModelEnsemble::synthetic(model, field, std::move(signs), seed);
}

ModelEnsemble synthetic_natural_ensemble(const MlpModel& model, double v_max,
                                         int n_pairs, std::uint64_t seed) {
  PerturbationField field;
  field.shape = FieldShape::kLogistic;
  field.v_max = v_max;
  field.w.resize(model.input_dim());
  Rng rng(seed);
  for (Eigen::Index j = 0; j < field.w.size(); ++j) field.w[j] = rng.gaussian();
  return synthetic_natural_ensemble(model, field, n_pairs, seed);
}

}  // namespace trex
