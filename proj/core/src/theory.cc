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

#include "trex/theory.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "trex/counterfactual.h"
#include "trex/errors.h"
#include "trex/random.h"
#include "trex/stability.h"

namespace trex {

double concentration_bound(int k, double eps, double gamma, double gamma_m,
                           double sigma2) {
  if (k < 1) throw PreconditionError("concentration_bound: k must be >= 1");
  if (!(eps > 0.0)) throw PreconditionError("concentration_bound: eps <= 0");
  if (!(gamma >= 0.0 && gamma_m >= 0.0 && gamma + gamma_m > 0.0)) {
    throw PreconditionError(
        "concentration_bound: gamma + gamma_m must be positive");
  }
  if (!(sigma2 > 0.0)) {
    throw PreconditionError("concentration_bound: sigma2 must be > 0");
  }
  const double g = gamma + gamma_m;
  const double exponent = -static_cast<double>(k) * eps * eps /
                          (8.0 * g * g * sigma2);
  return std::clamp(std::exp(exponent), 0.0, 1.0);
}

CoverageResult coverage_check(const ModelEnsemble& ensemble,
                                       const PointMatrix& queries,
                                       const CoverageConfig& cfg) {
  if (ensemble.kind() != ChangeKind::kSyntheticNatural) {
    throw PreconditionError(
        "coverage_check: needs a synthetic-natural ensemble; "
        "retrained ensembles have no certified Lipschitz constant");
  }
  if (queries.rows() == 0) {
    throw PreconditionError("coverage_check: no queries");
  }
  if (cfg.sample_seeds < 1 || cfg.ks.empty() || cfg.eps.empty()) {
    throw PreconditionError(
        "coverage_check: empty k grid, eps grid or seed count");
  }
  const MlpModel& base = ensemble.base();
  CoverageResult result;
  result.gamma_m = cfg.gamma_m ? *cfg.gamma_m : analytic_lipschitz_bound(base);
  result.gamma = ensemble.synthetic_lipschitz(result.gamma_m);
  const std::size_t members = ensemble.size();
  const Eigen::MatrixXd at_queries = ensemble.predict_all(queries);

  for (const int k : cfg.ks) {
    std::vector<CoverageRow> rows(cfg.eps.size());
    for (std::size_t e = 0; e < cfg.eps.size(); ++e) {
      rows[e].k = k;
      rows[e].eps = cfg.eps[e];
      rows[e].bound = concentration_bound(k, cfg.eps[e], result.gamma,
                                          result.gamma_m, cfg.sigma2);
    }
    for (Eigen::Index q = 0; q < queries.rows(); ++q) {
      const Vector x = queries.row(q).transpose();
      for (int s = 0; s < cfg.sample_seeds; ++s) {
        StabilityConfig stab;
        stab.k = k;
        stab.sigma2 = cfg.sigma2;
        stab.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(s));
        stab.mode = SampleMode::kFreshPerCall;
        const NeighborhoodSample sample = sample_gaussian_neighborhood(x, stab);
        const Vector m = base.forward_batch(sample.points);
        const Eigen::MatrixXd changed = ensemble.predict_all(sample.points);
        double mean_dist = 0.0;
        for (Eigen::Index i = 0; i < sample.points.rows(); ++i) {
          mean_dist += (sample.points.row(i).transpose() - x).norm();
        }
        mean_dist /= static_cast<double>(k);
        const double r = m.mean() - result.gamma * mean_dist;
        for (std::size_t j = 0; j < members; ++j) {
          const Eigen::Index col = static_cast<Eigen::Index>(j);
          const double z = (m - changed.col(col)).mean();
          const double mx = at_queries(q, col);
          for (CoverageRow& row : rows) {
            ++row.trials;
            if (mx < r - row.eps) ++row.violations;
            if (z >= row.eps) ++row.z_exceedances;
          }
        }
      }
    }
    for (CoverageRow& row : rows) {
      row.violation_rate = static_cast<double>(row.violations) /
                           static_cast<double>(row.trials);
      row.z_tail_rate = static_cast<double>(row.z_exceedances) /
                        static_cast<double>(row.trials);
      result.rows.push_back(row);
    }
  }
  return result;
}

RashomonCheck rashomon_bound_check(const ModelEnsemble& ensemble,
                                   const PointMatrix& points) {
  if (points.rows() == 0) {
    throw PreconditionError("rashomon_bound_check: no points");
  }
  const Vector m = ensemble.base().forward_batch(points);
  const Eigen::MatrixXd out = ensemble.predict_all(points);
  const double members = static_cast<double>(out.cols());
  RashomonCheck check;
  double max_msd = 0.0;
  double max_var = 0.0;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const Eigen::RowVectorXd dev = out.row(i).array() - m[i];
    check.lhs += dev.cwiseAbs().sum();
    max_msd = std::max(max_msd, dev.squaredNorm() / members);
    const Eigen::RowVectorXd centered = out.row(i).array() - out.row(i).mean();
    max_var = std::max(max_var, centered.squaredNorm() / members);
  }
  check.lhs /= static_cast<double>(out.size());
  check.bound = std::sqrt(max_msd);
  check.centered_bound = std::sqrt(max_var);
  check.holds = check.lhs <= check.bound + 1e-9;
  return check;
}

namespace {

double decision_agreement(const Vector& reference, const Vector& outputs,
                          Eigen::Index n) {
  Eigen::Index same = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    same += (reference[i] >= kDecisionThreshold) ==
                    (outputs[i] >= kDecisionThreshold)
                ? 1
                : 0;
  }
  return static_cast<double>(same) / static_cast<double>(n);
}

}  // namespace

TargetedResult targeted_invalidation(const MlpModel& model,
                                     const Eigen::Ref<const Vector>& target,
                                     const Dataset& data,
                                     double fidelity_weight,
                                     const TargetedConfig& cfg) {
  if (model.forward(target) < kDecisionThreshold) {
    throw PreconditionError(
        "targeted_invalidation: target is not classified favorably");
  }
  if (data.empty()) throw PreconditionError("targeted_invalidation: no data");
  if (!(fidelity_weight >= 0.0)) {
    throw PreconditionError("targeted_invalidation: fidelity_weight < 0");
  }
  if (cfg.max_epochs < 0 || !(cfg.learning_rate > 0.0)) {
    throw PreconditionError("targeted_invalidation: bad budget or rate");
  }
  const Eigen::Index n = static_cast<Eigen::Index>(data.size());
  PointMatrix points(n + 1, data.dim());
  points.topRows(n) = data.features();
  points.row(n) = target.transpose();
  const Vector reference = model.forward_batch(points);

  TargetedResult result{model, 0.0, 0.0, 0, false};
  AdamOptimizer adam(result.model, cfg.learning_rate, 0.9, 0.999, 1e-7);
  Vector outputs = reference;
  for (int epoch = 0;; ++epoch) {
    result.epochs = epoch;
    result.agreement = decision_agreement(reference, outputs, n);
    result.target_output = outputs[n];
    if (result.target_output < kDecisionThreshold &&
        result.agreement >= cfg.min_agreement) {
      result.success = true;
      break;
    }
    if (epoch == cfg.max_epochs) break;
    Vector dloss(n + 1);
    for (Eigen::Index i = 0; i < n; ++i) {
      dloss[i] = fidelity_weight * 2.0 * (outputs[i] - reference[i]) /
                 static_cast<double>(n) * outputs[i] * (1.0 - outputs[i]);
    }
    dloss[n] = 2.0 * outputs[n] * outputs[n] * (1.0 - outputs[n]);
    adam.step(result.model, parameter_gradients(result.model, points, dloss));
    outputs = result.model.forward_batch(points);
  }
  return result;
}

Vector off_manifold_target(const MlpModel& model, const Dataset& data) {
  const int d = static_cast<int>(data.dim());
  if (d < 1 || d > 3 || data.empty()) {
    throw PreconditionError(
        "off_manifold_target: needs non-empty data of dimension 1 to 3");
  }
  constexpr int kSteps = 41;
  int total = 1;
  for (int j = 0; j < d; ++j) total *= kSteps;
  PointMatrix grid(total, d);
  for (int idx = 0; idx < total; ++idx) {
    int rest = idx;
    for (int j = 0; j < d; ++j) {
      grid(idx, j) = -0.5 + 0.05 * (rest % kSteps);
      rest /= kSteps;
    }
  }
  const Vector outputs = model.forward_batch(grid);
  double best = -1.0;
  Eigen::Index best_idx = -1;
  for (Eigen::Index i = 0; i < grid.rows(); ++i) {
    if (outputs[i] < kDecisionThreshold) continue;
    const double nearest =
        (data.features().rowwise() - grid.row(i)).rowwise().norm().minCoeff();
    if (nearest > best) {
      best = nearest;
      best_idx = i;
    }
  }
  if (best_idx < 0) {
    throw PreconditionError(
        "off_manifold_target: no grid point is classified favorably");
  }
  return grid.row(best_idx).transpose();
}

void write_coverage_csv(std::ostream& out, const CoverageResult& result) {
  const auto put = [&out](double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.write(buf, ptr - buf);
  };
  out << "k,eps,trials,violations,violation_rate,z_exceedances,z_tail_rate,"
         "bound,gamma,gamma_m\n";
  for (const CoverageRow& r : result.rows) {
    out << r.k << ',';
    put(r.eps);
    out << ',' << r.trials << ',' << r.violations << ',';
    put(r.violation_rate);
    out << ',' << r.z_exceedances << ',';
    put(r.z_tail_rate);
    out << ',';
    put(r.bound);
    out << ',';
    put(result.gamma);
    out << ',';
    put(result.gamma_m);
    out << '\n';
  }
}

}  // namespace trex
