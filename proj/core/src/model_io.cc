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

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "trex/errors.h"

namespace trex {

using nlohmann::json;

std::string model_to_json(const MlpModel& model) {
  json doc;
  doc["format"] = "trex-mlp";
  doc["version"] = kModelFormatVersion;
  doc["layer_sizes"] = model.layer_sizes();
  doc["hidden_activation"] = "relu";
  doc["output_activation"] = "sigmoid";
  json weights = json::array();
  json biases = json::array();
  for (std::size_t l = 0; l < model.num_layers(); ++l) {
    const auto& w = model.weights()[l];
    json flat = json::array();
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) flat.push_back(w(r, c));
    }
    weights.push_back(std::move(flat));
    const auto& b = model.biases()[l];
    biases.push_back(std::vector<double>(b.data(), b.data() + b.size()));
  }
  doc["weights"] = std::move(weights);
  doc["biases"] = std::move(biases);
  return doc.dump(1) + "\n";
}

MlpModel model_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("model JSON: ") + e.what());
  }
  try {
    if (doc.at("format") != "trex-mlp") {
      throw DataError("model JSON: unexpected format tag");
    }
    if (doc.at("version").get<int>() != kModelFormatVersion) {
      throw DataError("model JSON: unsupported version " +
                      doc.at("version").dump());
    }
    if (doc.at("hidden_activation") != "relu" ||
        doc.at("output_activation") != "sigmoid") {
      throw DataError("model JSON: only relu/sigmoid activations are supported");
    }
    const auto sizes = doc.at("layer_sizes").get<std::vector<int>>();
    const auto& weights = doc.at("weights");
    const auto& biases = doc.at("biases");
    if (sizes.size() < 2 || weights.size() != sizes.size() - 1 ||
        biases.size() != sizes.size() - 1) {
      throw DataError("model JSON: layer count mismatch");
    }
    std::vector<Eigen::MatrixXd> w;
    std::vector<Eigen::VectorXd> b;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
      const auto flat = weights[l].get<std::vector<double>>();
      const auto bias = biases[l].get<std::vector<double>>();
      const auto rows = static_cast<Eigen::Index>(sizes[l + 1]);
      const auto cols = static_cast<Eigen::Index>(sizes[l]);
      if (static_cast<Eigen::Index>(flat.size()) != rows * cols ||
          static_cast<Eigen::Index>(bias.size()) != rows) {
        throw DataError("model JSON: parameter shape mismatch at layer " +
                        std::to_string(l));
      }
      Eigen::MatrixXd m(rows, cols);
      for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = flat[r * cols + c];
      }
      w.push_back(std::move(m));
      b.push_back(Eigen::Map<const Eigen::VectorXd>(bias.data(), rows));
    }
    return MlpModel(sizes, std::move(w), std::move(b));
  } catch (const json::exception& e) {
    throw DataError(std::string("model JSON: ") + e.what());
  } catch (const PreconditionError& e) {
    throw DataError(std::string("model JSON: ") + e.what());
  }
}

void save_model(const MlpModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write model file " + path.string());
  out << model_to_json(model);
}

MlpModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return model_from_json(buffer.str());
}

}  // namespace trex
