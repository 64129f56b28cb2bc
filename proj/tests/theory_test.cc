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

#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "testing/models.h"
#include "trex/errors.h"

namespace trex {
namespace {

TEST(ConcentrationBoundTest, ClosedFormValues) {
  // Oracles from tests/oracles/generate_oracles.py.
  EXPECT_NEAR(concentration_bound(8, 1.0, 0.5, 0.5, 1.0), 0.36787944117144233, 1e-12);
  EXPECT_NEAR(concentration_bound(8, 1.0, 1.0, 0.0, 1.0), std::exp(-1.0), 1e-12);
  const double tiny = concentration_bound(1000, 0.1, 0.25, 0.75, 0.01);
  EXPECT_NEAR(tiny / 5.166420632837861e-55, 1.0, 1e-12);
}

TEST(ConcentrationBoundTest, SmallEpsilonClampsToOne) {
  EXPECT_NEAR(concentration_bound(10, 1e-300, 1.0, 1.0, 0.01), 1.0, 1e-15);
  EXPECT_LE(concentration_bound(10, 1e-300, 1.0, 1.0, 0.01), 1.0);
}

TEST(ConcentrationBoundTest, StrictlyDecreasingAsKDoubles) {
  double previous = 2.0;
  for (int k = 1; k <= 4096; k *= 2) {
    const double b = concentration_bound(k, 0.1, 1.0, 0.5, 0.01);
    EXPECT_LT(b, previous) << "k=" << k;
    previous = b;
  }
}

TEST(ConcentrationBoundTest, Preconditions) {
  EXPECT_THROW(concentration_bound(0, 0.1, 1, 1, 0.01), PreconditionError);
  EXPECT_THROW(concentration_bound(1, 0.0, 1, 1, 0.01), PreconditionError);
  EXPECT_THROW(concentration_bound(1, 0.1, 0, 0, 0.01), PreconditionError);
  EXPECT_THROW(concentration_bound(1, 0.1, 1, 1, 0.0), PreconditionError);
}

PointMatrix first_rows(const Dataset& d, int n) {
  return d.features().topRows(std::min<Eigen::Index>(n, d.features().rows()));
}

TEST(CoverageTest, ZeroAmplitudeNeverViolates) {
  const auto fx = testing::moons_fixture();
  const ModelEnsemble e = synthetic_natural_ensemble(fx.model, 0.0, 2, 1);
  CoverageConfig cfg;
  cfg.ks = {50};
  cfg.sample_seeds = 2;
  const CoverageResult r = coverage_check(e, first_rows(fx.test, 10), cfg);
  for (const CoverageRow& row : r.rows) {
    EXPECT_EQ(row.violations, 0u);
    EXPECT_EQ(row.z_exceedances, 0u);
  }
}

TEST(CoverageTest, EpsilonAboveOneNeverViolates) {
  const auto fx = testing::moons_fixture();
  const ModelEnsemble e = synthetic_natural_ensemble(fx.model, 0.3, 2, 1);
  CoverageConfig cfg;
  cfg.ks = {20};
  cfg.eps = {1.01, 2.0};
  cfg.sample_seeds = 2;
  const CoverageResult r = coverage_check(e, first_rows(fx.test, 10), cfg);
  for (const CoverageRow& row : r.rows) EXPECT_EQ(row.violation_rate, 0.0);
}

TEST(CoverageTest, EmpiricalRateWithinBoundOnMoons) {
  const auto fx = testing::moons_fixture();
  const ModelEnsemble e = synthetic_natural_ensemble(fx.model, 0.05, 5, 2);
  CoverageConfig cfg;
  cfg.ks = {100};
  cfg.sample_seeds = 4;
  cfg.seed = 3;
  const CoverageResult r = coverage_check(e, first_rows(fx.test, 25), cfg);
  ASSERT_EQ(r.rows.size(), 3u);
  EXPECT_EQ(r.gamma, e.synthetic_lipschitz(r.gamma_m));
  for (const CoverageRow& row : r.rows) {
    EXPECT_EQ(row.trials, 25u * 10u * 4u);
    EXPECT_LE(row.violation_rate, row.bound);
    EXPECT_LE(row.z_tail_rate, row.bound);
  }
  std::ostringstream out;
  write_coverage_csv(out, r);
  EXPECT_FALSE(out.str().empty());
}

TEST(CoverageTest, RequiresSyntheticEnsemble) {
  const MlpModel m = testing::constant_model(2, 0.6);
  const ModelEnsemble e = ModelEnsemble::retrained(m, ChangeKind::kWeightInit, {m}, {0});
  EXPECT_THROW(coverage_check(e, PointMatrix::Zero(1, 2), CoverageConfig{}),
               PreconditionError);
}

TEST(RashomonTest, CopiesGiveZero) {
  const MlpModel m = testing::random_model({2, 4, 1}, 1);
  const ModelEnsemble e =
      ModelEnsemble::retrained(m, ChangeKind::kWeightInit, {m, m, m}, {0, 1, 2});
  const RashomonCheck c = rashomon_bound_check(e, PointMatrix::Random(10, 2));
  EXPECT_EQ(c.lhs, 0.0);
  EXPECT_EQ(c.bound, 0.0);
  EXPECT_TRUE(c.holds);
}

TEST(RashomonTest, ConstantFieldIsTight) {
  const MlpModel m = testing::linear_model(Eigen::Vector2d(1.0, -1.0), 0.2);
  PerturbationField f;
  f.v_max = 0.05;
  const ModelEnsemble e = synthetic_natural_ensemble(m, f, 4);
  PointMatrix pts(5, 2);
  pts << 0, 0, 0.5, 0.5, 1, 0, 0, 1, 0.3, 0.8;
  const RashomonCheck c = rashomon_bound_check(e, pts);
  EXPECT_NEAR(c.lhs, 0.05, 1e-12);
  EXPECT_NEAR(c.bound, 0.05, 1e-12);
  EXPECT_NEAR(c.lhs, c.bound, 1e-9);
  EXPECT_TRUE(c.holds);
}

TEST(RashomonTest, HoldsForRetrainedEnsemble) {
  const auto fx = testing::moons_fixture();
  TrainConfig cfg;
  cfg.learning_rate = 0.005;
  const ModelEnsemble e =
      retrain_ensemble(fx.model, fx.train, cfg, 3, ChangeKind::kWeightInit, 4);
  const RashomonCheck c = rashomon_bound_check(e, fx.train.features());
  EXPECT_TRUE(c.holds);
  EXPECT_GT(c.lhs, 0.0);
  EXPECT_LE(c.centered_bound, c.bound + 1e-12);
}

TEST(TargetedTest, NoFidelityFlipsTarget) {
  const auto fx = testing::moons_fixture();
  const Vector target = off_manifold_target(fx.model, fx.train);
  ASSERT_GE(fx.model.forward(target), 0.5);
  TargetedConfig cfg;
  cfg.min_agreement = 0.0;
  cfg.learning_rate = 0.01;
  const TargetedResult r = targeted_invalidation(fx.model, target, fx.train, 0.0, cfg);
  EXPECT_TRUE(r.success);
  EXPECT_LT(r.target_output, 0.5);
}

TEST(TargetedTest, FarTargetFlipsWithHighAgreement) {
  const auto fx = testing::moons_fixture();
  const Vector target = off_manifold_target(fx.model, fx.train);
  const TargetedResult r = targeted_invalidation(fx.model, target, fx.train, 1.0);
  EXPECT_TRUE(r.success);
  EXPECT_LT(r.model.forward(target), 0.5);
  EXPECT_GE(r.agreement, 0.99);
  EXPECT_EQ(r.target_output, r.model.forward(target));
}

TEST(TargetedTest, RejectsNegativeTarget) {
  const auto fx = testing::moons_fixture();
  for (std::size_t i = 0; i < fx.train.size(); ++i) {
    if (fx.model.forward(fx.train.row(i)) < 0.5) {
      EXPECT_THROW(targeted_invalidation(fx.model, fx.train.row(i), fx.train, 1.0),
                   PreconditionError);
      return;
    }
  }
  FAIL() << "no negative training row";
}

}  // namespace
}  // namespace trex
