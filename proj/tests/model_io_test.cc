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

#include "trex/model_io.h"

#include <filesystem>
#include <string>

#include <gtest/gtest.h>

#include "json.hpp"
#include "testing/models.h"
#include "trex/errors.h"

namespace trex {
namespace {

double max_weight_error(const MlpModel& a, const MlpModel& b) {
  double worst = 0.0;
  for (std::size_t l = 0; l < a.num_layers(); ++l) {
    worst = std::max(worst, (a.weights()[l] - b.weights()[l]).cwiseAbs().maxCoeff());
    worst = std::max(worst, (a.biases()[l] - b.biases()[l]).cwiseAbs().maxCoeff());
  }
  return worst;
}

TEST(ModelIoTest, JsonRoundTripWithinTolerance) {
  const MlpModel m = testing::random_model({3, 7, 5, 1}, 12);
  const MlpModel back = model_from_json(model_to_json(m));
  EXPECT_EQ(back.layer_sizes(), m.layer_sizes());
  EXPECT_LE(max_weight_error(m, back), 1e-15);
}

TEST(ModelIoTest, WeightsAreRowMajor) {
  Eigen::MatrixXd w(2, 3);
  w << 1, 2, 3, 4, 5, 6;
  Eigen::MatrixXd w2 = Eigen::MatrixXd::Ones(1, 2);
  const MlpModel m({3, 2, 1}, {w, w2}, {Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(1)});
  const auto doc = nlohmann::json::parse(model_to_json(m));
  EXPECT_EQ(doc["weights"][0], nlohmann::json({1.0, 2.0, 3.0, 4.0, 5.0, 6.0}));
  EXPECT_EQ(doc["version"], kModelFormatVersion);
  EXPECT_EQ(doc["hidden_activation"], "relu");
  EXPECT_EQ(doc["output_activation"], "sigmoid");
}

TEST(ModelIoTest, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "trex_model_io_test.json";
  const MlpModel m = testing::random_model({2, 4, 1}, 3);
  save_model(m, path);
  EXPECT_LE(max_weight_error(m, load_model(path)), 1e-15);
  std::filesystem::remove(path);
}

TEST(ModelIoTest, RejectsMalformedDocuments) {
  const MlpModel m = testing::random_model({2, 3, 1}, 1);
  auto doc = nlohmann::json::parse(model_to_json(m));
  EXPECT_THROW(model_from_json("{not json"), DataError);

  auto bad_version = doc;
  bad_version["version"] = kModelFormatVersion + 1;
  EXPECT_THROW(model_from_json(bad_version.dump()), DataError);

  auto bad_act = doc;
  bad_act["hidden_activation"] = "tanh";
  EXPECT_THROW(model_from_json(bad_act.dump()), DataError);

  auto bad_shape = doc;
  bad_shape["weights"][0].erase(0);
  EXPECT_THROW(model_from_json(bad_shape.dump()), DataError);

  EXPECT_THROW(load_model("/nonexistent/dir/model.json"), DataError);
}

}  // namespace
}  // namespace trex
