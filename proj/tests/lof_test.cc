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

#include "trex/lof.h"

#include <string>

#include <gtest/gtest.h>

#include "testing/oracle_suites.h"
#include "trex/errors.h"
#include "trex/random.h"

namespace trex {
namespace {

PointMatrix line(std::initializer_list<double> values) {
  PointMatrix p(values.size(), 1);
  Eigen::Index i = 0;
  for (double v : values) p(i++, 0) = v;
  return p;
}

PointMatrix grid10() {
  PointMatrix p(100, 2);
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) p.row(10 * i + j) << i, j;
  }
  return p;
}

TEST(LofBuildTest, NeighborListsAndTies) {
  const LofIndex idx = LofIndex::build(line({0, 1, 2, 9}), 2);
  for (std::size_t r = 0; r < 4; ++r) EXPECT_EQ(idx.neighbors(r).size(), 2u);
  // Row 1 has rows 0 and 2 at distance 1: lower index first.
  EXPECT_EQ(idx.neighbors(1), (std::vector<std::size_t>{0, 2}));
  const LofIndex tie = LofIndex::build(line({5, 4, 6}), 1);
  EXPECT_EQ(tie.neighbors(0), (std::vector<std::size_t>{1}));
}

TEST(LofBuildTest, RejectsBadK) {
  EXPECT_THROW(LofIndex::build(line({0, 1, 2}), 3), PreconditionError);
  EXPECT_THROW(LofIndex::build(line({0, 1, 2}), 0), PreconditionError);
}

TEST(LofBuildTest, DuplicatesNameRows) {
  try {
    LofIndex::build(line({0, 1, 0.5, 1 + 1e-13}), 1);
    FAIL() << "expected duplicate error";
  } catch (const PreconditionError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("rows 1 and 3"), std::string::npos) << what;
  }
}

TEST(LofScoreTest, TwoPointSymmetry) {
  EXPECT_DOUBLE_EQ(LofIndex::build(line({0, 10}), 1).score(Vector::Zero(1)), 1.0);
}

// Oracles from tests/oracles/generate_oracles.py (direct transcription;
// scikit-learn agrees to its 1e-10 smoothing).
TEST(LofScoreTest, FarPointOfSmallSet) {
  const LofIndex idx = LofIndex::build(line({0, 1, 2, 9}), 2);
  const double s = idx.score(Vector::Constant(1, 9.0));
  EXPECT_GT(s, 1.5);
  EXPECT_NEAR(s, 4.374999999999999, 1e-12);
  EXPECT_NEAR(s, testing::DirectLof(line({0, 1, 2, 9}), 2).score(Vector::Constant(1, 9.0)),
              1e-12);
  EXPECT_EQ(idx.predict(Vector::Constant(1, 9.0)), -1);
}

TEST(LofScoreTest, NovelQueriesIn2d) {
  PointMatrix pts(8, 2);
  pts << 0.1, 0.2, 0.4, 0.1, 0.35, 0.8, 0.9, 0.45, 0.6, 0.6, 0.15, 0.55, 0.75, 0.95,
      0.5, 0.3;
  const LofIndex idx = LofIndex::build(pts, 3);
  EXPECT_NEAR(idx.score(Eigen::Vector2d(0.45, 0.45)), 0.9085758780700397, 1e-12);
  EXPECT_NEAR(idx.score(Eigen::Vector2d(1.6, 1.7)), 3.059602729172793, 1e-12);
}

TEST(LofScoreTest, GridInteriorIsInlier) {
  const LofIndex idx = LofIndex::build(grid10(), 4);
  const Vector q = Eigen::Vector2d(4.5, 4.5);
  const double s = idx.score(q);
  EXPECT_GE(s, 0.95);
  EXPECT_LE(s, 1.05);
  EXPECT_EQ(idx.predict(q), 1);
  EXPECT_NEAR(s, testing::DirectLof(grid10(), 4).score(q), 1e-12);
}

TEST(LofScoreTest, PredictThresholdMustExceedOne) {
  const LofIndex idx = LofIndex::build(line({0, 1, 2, 9}), 2);
  EXPECT_THROW(idx.predict(Vector::Zero(1), 1.0), PreconditionError);
}

TEST(LofScoreTest, RejectsBadQueries) {
  const LofIndex idx = LofIndex::build(line({0, 1, 2}), 1);
  EXPECT_THROW(idx.score(Vector::Constant(1, NAN)), PreconditionError);
  EXPECT_THROW(idx.score(Vector::Zero(2)), PreconditionError);
}

TEST(LofOracleTest, FiftyRandomInstancesMatchDirectTranscription) {
  EXPECT_LE(testing::lof_suite_worst(50, 77), 1e-12);
}

TEST(LofPropertyTest, PermutationInvariance) {
  Rng rng(4);
  PointMatrix pts(25, 2);
  for (int i = 0; i < 25; ++i) pts.row(i) = testing::random_point(2, rng).transpose();
  const auto order = random_permutation(25, 9);
  PointMatrix shuffled(25, 2);
  for (int i = 0; i < 25; ++i) shuffled.row(i) = pts.row(order[i]);
  const LofIndex a = LofIndex::build(pts, 5);
  const LofIndex b = LofIndex::build(shuffled, 5);
  for (int q = 0; q < 10; ++q) {
    const Vector x = testing::random_point(2, rng);
    EXPECT_NEAR(a.score(x), b.score(x), 1e-12);
  }
}

TEST(LofPropertyTest, ScaleInvariance) {
  Rng rng(5);
  PointMatrix pts(20, 3);
  for (int i = 0; i < 20; ++i) pts.row(i) = testing::random_point(3, rng).transpose();
  const LofIndex a = LofIndex::build(pts, 4);
  const LofIndex b = LofIndex::build(pts * 7.5, 4);
  for (int q = 0; q < 10; ++q) {
    const Vector x = testing::random_point(3, rng, -1.0, 2.0);
    EXPECT_NEAR(a.score(x), b.score(7.5 * x), 1e-12);
  }
}

}  // namespace
}  // namespace trex
