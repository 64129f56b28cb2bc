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

#ifndef TREX_TOOLS_COMMANDS_H_
#define TREX_TOOLS_COMMANDS_H_

#include <filesystem>
#include <string>
#include <vector>

#include "run_config.h"
#include "trex/dataset.h"

namespace trex::cli {

struct Splits {
  Dataset train;
  Dataset test;
};

// Rebuilds the train/test splits described by the config.
Splits prepare_data(const RunConfig& cfg);

struct CommandOptions {
  bool quiet = false;
};

// Each stage reads what earlier stages wrote under cfg.output_dir, writes
// its own files there and refreshes manifest.json.
void cmd_train(const RunConfig& cfg, const CommandOptions& opts);
void cmd_generate(const RunConfig& cfg, const CommandOptions& opts);
void cmd_evaluate(const RunConfig& cfg, const CommandOptions& opts);
void cmd_theory(const RunConfig& cfg, const CommandOptions& opts);

// Hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

// Lists every regular file under dir (except manifest.json) with its
// SHA-256, plus the config hash, seeds and tool version.
void write_manifest(const RunConfig& cfg);

}  // namespace trex::cli

#endif  // TREX_TOOLS_COMMANDS_H_
