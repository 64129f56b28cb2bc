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

#ifndef TREX_MODEL_IO_H_
#define TREX_MODEL_IO_H_

#include <filesystem>
#include <string>
#include <string_view>

#include "trex/mlp.h"

namespace trex {

inline constexpr int kModelFormatVersion = 1;

// Versioned JSON document:
//   {"format": "trex-mlp", "version": 1, "layer_sizes": [...],
//    "hidden_activation": "relu", "output_activation": "sigmoid",
//    "weights": [[row-major values], ...], "biases": [[...], ...]}
// Doubles are written with 17 significant digits, so a round trip is exact.
std::string model_to_json(const MlpModel& model);
MlpModel model_from_json(std::string_view text);

void save_model(const MlpModel& model, const std::filesystem::path& path);
MlpModel load_model(const std::filesystem::path& path);

}  // namespace trex

#endif  // TREX_MODEL_IO_H_
