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

#include "trex/random.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <gtest/gtest.h>

#include "trex/parallel.h"

namespace trex {
namespace {

// Reference values from tests/oracles/generate_oracles.py, which rebuilds the
// generator from its constants in Python.

TEST(RngTest, MatchesSplitMix64Reference) {
  Rng rng(0);
  EXPECT_EQ(rng.next(), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(rng.next(), 0x6e789e6aa1b965f4ULL);
  EXPECT_EQ(rng.next(), 0x06c45d188009454fULL);
}

TEST(RngTest, UniformMatchesOracle) {
  Rng rng(42);
  EXPECT_EQ(rng.uniform(), 0.7415648787718233);
  EXPECT_EQ(rng.uniform(), 0.1599103928769201);
  EXPECT_EQ(rng.uniform(), 0.27860113025513866);
}

TEST(RngTest, BoxMullerMatchesOracle) {
  Rng rng(7);
  EXPECT_NEAR(rng.gaussian(), 0.9884743323187353, 1e-15);
  EXPECT_NEAR(rng.gaussian(), 0.10465664748899398, 1e-15);
  EXPECT_NEAR(rng.gaussian(), -1.8642558067312274, 1e-15);
  EXPECT_NEAR(rng.gaussian(), -1.0700431037183418, 1e-15);
}

TEST(RngTest, DeriveSeedMatchesOracle) {
  EXPECT_EQ(derive_seed(1, 2), 0x8a829f051aeaa7deULL);
  EXPECT_EQ(derive_seed(5, "abc"), 0xc28bec29342448aeULL);
}

TEST(RngTest, DerivedStreamsDiffer) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 1000; ++s) seen.insert(derive_seed(9, s));
  EXPECT_EQ(seen.size(), 1000u);
}

TEST(RngTest, UniformIndexStaysInRange) {
  Rng rng(3);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) ++counts[rng.uniform_index(7)];
  for (int c : counts) EXPECT_NEAR(c, 10000, 500);
  EXPECT_THROW(rng.uniform_index(0), std::exception);
}

TEST(RngTest, GaussianMoments) {
  Rng rng(123);
  const int n = 200000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double g = rng.gaussian();
    sum += g;
    sq += g * g;
  }
  EXPECT_NEAR(sum / n, 0.0, 4.0 / std::sqrt(n));
  EXPECT_NEAR(sq / n, 1.0, 0.02);
}

TEST(RngTest, PermutationIsDeterministicAndComplete) {
  const auto a = random_permutation(50, 17);
  const auto b = random_permutation(50, 17);
  EXPECT_EQ(a, b);
  auto sorted = a;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) EXPECT_EQ(sorted[i], i);
  EXPECT_NE(a, random_permutation(50, 18));
}

TEST(ParallelForTest, VisitsEveryIndexOnce) {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; }, 4);
  EXPECT_EQ(std::accumulate(hits.begin(), hits.end(), 0), 1000);
  EXPECT_TRUE(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
}

TEST(ParallelForTest, RethrowsLowestFailure) {
  try {
    parallel_for(
        100,
        [](std::size_t i) {
          if (i == 30 || i == 70) throw std::runtime_error(std::to_string(i));
        },
        4);
    FAIL() << "expected a throw";
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "30");
  }
}

}  // namespace
}  // namespace trex
