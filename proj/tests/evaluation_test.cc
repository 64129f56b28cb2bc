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

#include "trex/evaluation.h"

#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "testing/models.h"
#include "trex/errors.h"

namespace trex {
namespace {

CounterfactualRecord record_at(const Vector& cf, double cost, Norm norm = Norm::kL2) {
  CounterfactualRecord r;
  r.original = Vector::Zero(cf.size());
  r.counterfactual = cf;
  r.cost = cost;
  r.norm = norm;
  r.verdict = Verdict::kFound;
  return r;
}

TEST(ValidityTest, BaseModelAloneIsFullyValid) {
  const MlpModel m = testing::linear_model(Eigen::Vector2d(3.0, 1.0), -2.0);
  const ModelEnsemble e = ModelEnsemble::retrained(m, ChangeKind::kWeightInit, {m}, {0});
  const std::vector<CounterfactualRecord> recs = {
      record_at(Eigen::Vector2d(0.9, 0.5), 0.1), record_at(Eigen::Vector2d(0.6, 0.3), 0.2)};
  EXPECT_EQ(validity(recs, e), 100.0);
}

TEST(ValidityTest, FlippedModelInvalidatesEverything) {
  const Eigen::Vector2d w(3.0, 1.0);
  const MlpModel m = testing::linear_model(w, -2.0);
  const MlpModel flipped = testing::linear_model(-w, 2.0);
  const ModelEnsemble e =
      ModelEnsemble::retrained(m, ChangeKind::kWeightInit, {flipped}, {0});
  const std::vector<CounterfactualRecord> recs = {
      record_at(Eigen::Vector2d(0.9, 0.5), 0.1), record_at(Eigen::Vector2d(0.6, 0.3), 0.2)};
  EXPECT_EQ(validity(recs, e), 0.0);
}

TEST(ValidityTest, OneFlipOfFourPairsIsSeventyFivePercent) {
  const MlpModel m = testing::linear_model(Eigen::Vector2d(1.0, 0.0), -0.5);
  const MlpModel shifted = testing::linear_model(Eigen::Vector2d(1.0, 0.0), -0.7);
  const ModelEnsemble e =
      ModelEnsemble::retrained(m, ChangeKind::kLeaveOut, {m, shifted}, {0, 1});
  const std::vector<CounterfactualRecord> recs = {
      record_at(Eigen::Vector2d(0.9, 0.0), 0.4), record_at(Eigen::Vector2d(0.6, 0.0), 0.1)};
  EXPECT_EQ(validity(recs, e), 75.0);
}

TEST(ValidityTest, NotFoundRecordsAreSkippedAndEmptyThrows) {
  const MlpModel m = testing::constant_model(1, 0.9);
  const ModelEnsemble e = ModelEnsemble::retrained(m, ChangeKind::kWeightInit, {m}, {0});
  CounterfactualRecord missing;
  EXPECT_THROW(validity({missing}, e), PreconditionError);
  EXPECT_THROW(validity({}, e), PreconditionError);
  EXPECT_EQ(validity({missing, record_at(Vector::Zero(1), 0.0)}, e), 100.0);
}

TEST(CostSummaryTest, SingleAndMixedNorms) {
  auto s = cost_summary({record_at(Vector::Zero(1), 0.3)});
  EXPECT_DOUBLE_EQ(s.at(Norm::kL2).mean, 0.3);
  EXPECT_EQ(s.at(Norm::kL2).std, 0.0);
  s = cost_summary({record_at(Vector::Zero(1), 0.2, Norm::kL1),
                    record_at(Vector::Zero(1), 0.6, Norm::kL1),
                    record_at(Vector::Zero(1), 1.0, Norm::kL2)});
  EXPECT_DOUBLE_EQ(s.at(Norm::kL1).mean, 0.4);
  EXPECT_DOUBLE_EQ(s.at(Norm::kL1).std, 0.2);
  EXPECT_EQ(s.at(Norm::kL1).count, 2u);
  EXPECT_EQ(s.at(Norm::kL2).count, 1u);
  EXPECT_THROW(cost_summary({}), PreconditionError);
}

TEST(LofSummaryTest, OppositePredictionsAverageToZero) {
  PointMatrix ref(4, 1);
  ref << 0, 1, 2, 3;
  const LofIndex idx = LofIndex::build(ref, 2);
  const std::vector<CounterfactualRecord> recs = {record_at(Vector::Constant(1, 1.5), 0),
                                                  record_at(Vector::Constant(1, 40.0), 0)};
  const LofSummary s = lof_summary(recs, idx);
  EXPECT_EQ(s.mean_prediction, 0.0);
  EXPECT_EQ(s.count, 2u);
  EXPECT_DOUBLE_EQ(s.mean_score, (idx.score(recs[0].counterfactual) +
                                  idx.score(recs[1].counterfactual)) / 2.0);
}

TEST(SelectQueriesTest, TrueNegativesOnly) {
  const MlpModel m = testing::sigmoid_1d(10.0, 0.5);
  PointMatrix x(4, 1);
  x << 0.1, 0.2, 0.9, 0.3;
  std::vector<ColumnMeta> cols(1);
  const Dataset d(x, {0, 1, 0, 0}, cols);
  EXPECT_EQ(select_queries(m, d), (std::vector<std::size_t>{0, 3}));
}

GenerationConfig quick_generation() {
  GenerationConfig g;
  g.trex.k = 100;
  g.trex.seed = 3;
  g.trex.max_steps = 30;
  g.trex.neighbor_budget = 20;
  g.workers = 1;
  return g;
}

TEST(EvaluateTest, ReportShapeAndDeterminism) {
  const auto fx = testing::moons_fixture();
  const ModelEnsemble wi = retrain_ensemble(fx.model, fx.train, TrainConfig{}, 2,
                                            ChangeKind::kWeightInit, 5);
  const std::vector<Generator> gens = {Generator::kMinCost, Generator::kTrexI,
                                       Generator::kNearestNeighbor, Generator::kTrexNN};
  const auto run = [&] {
    return evaluate(fx.train, fx.test, fx.model, gens, {Norm::kL2}, quick_generation(),
                    &wi, nullptr, 10);
  };
  const EvaluationResult a = run();
  ASSERT_EQ(a.report.rows.size(), 4u);
  EXPECT_EQ(a.report.rows[0].generator, Generator::kMinCost);
  EXPECT_EQ(a.report.rows[3].generator, Generator::kTrexNN);
  const std::size_t n_queries = select_queries(fx.model, fx.test).size();
  for (const ReportRow& row : a.report.rows) {
    EXPECT_EQ(row.queries, n_queries);
    EXPECT_GE(row.wi_validity, 0.0);
    EXPECT_LE(row.wi_validity, 100.0);
    EXPECT_TRUE(std::isnan(row.lo_validity));
  }
  std::ostringstream first, second;
  a.report.write_csv(first);
  run().report.write_csv(second);
  EXPECT_EQ(first.str(), second.str());
  EXPECT_EQ(first.str().substr(0, first.str().find('\n')),
            "generator,norm,queries,counterfactuals,found,cost_mean,cost_std,"
            "lof_prediction,lof_score,wi_validity,lo_validity");
  const std::string table = a.report.render_table();
  EXPECT_NE(table.find("WI VAL."), std::string::npos);
  EXPECT_NE(table.find("trex-nn"), std::string::npos);
}

TEST(EvaluateTest, AggregatesMatchDirectRecomputation) {
  const auto fx = testing::moons_fixture();
  const ModelEnsemble wi = retrain_ensemble(fx.model, fx.train, TrainConfig{}, 2,
                                            ChangeKind::kWeightInit, 5);
  const EvaluationResult r = evaluate(fx.train, fx.test, fx.model,
                                      {Generator::kNearestNeighbor}, {Norm::kL1},
                                      quick_generation(), &wi, nullptr, 10);
  const auto& recs = r.groups[0];
  double cost = 0.0;
  double valid = 0.0;
  for (const auto& rec : recs) {
    cost += rec.cost;
    for (std::size_t j = 0; j < wi.size(); ++j) valid += wi.predict(j, rec.counterfactual) >= 0.5;
  }
  EXPECT_NEAR(r.report.rows[0].cost.mean, cost / recs.size(), 1e-12);
  EXPECT_NEAR(r.report.rows[0].wi_validity, 100.0 * valid / (recs.size() * wi.size()), 1e-12);
  for (const auto& rec : recs) {
    EXPECT_EQ(rec.stability,
              stability_relaxed(fx.model, rec.counterfactual, quick_generation().trex.stability()));
  }
}

TEST(AblationTest, ZeroThresholdKeepsBase) {
  const auto fx = testing::moons_fixture();
  const GenerationConfig g = quick_generation();
  const auto queries = select_queries(fx.model, fx.test);
  const auto base = generate_counterfactuals(fx.model, fx.train, fx.test, queries,
                                             Generator::kMinCost, Norm::kL2, g);
  const LofIndex lof = LofIndex::build(fx.train.features(), 10);
  TrexConfig trex = g.trex;
  const auto rows = ablation(fx.model, base, trex, {0.0},
                             {Measure::kPoint, Measure::kMean, Measure::kRelaxed}, lof,
                             nullptr, nullptr, 1);
  ASSERT_EQ(rows.size(), 3u);
  const auto base_cost = cost_summary(base).at(Norm::kL2);
  for (const AblationRow& row : rows) {
    EXPECT_EQ(row.cost.mean, base_cost.mean);
    EXPECT_EQ(row.found, base.size());
  }
  std::ostringstream out;
  write_ablation_csv(out, rows);
  EXPECT_EQ(out.str().rfind("tau,measure,norm,", 0), 0u);
}

}  // namespace
}  // namespace trex
