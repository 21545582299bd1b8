// Copyright 2026 The specmix Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Flat key=value run configuration shared by every subcommand.
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "specmix/synthdata.hpp"
#include "specmix/trainer.hpp"

namespace specmix::cli {

enum class EvalModel { kTeacher, kStudent };

struct RunConfig {
  trainer::TrainConfig train;
  synth::DatasetConfig data;
  std::string manifest = "data/manifest.csv";
  std::size_t source_domain = 0;
  std::size_t target_domain = 1;
  std::string init;  // pretrained checkpoint; empty: pretrain in-process
  EvalModel eval_model = EvalModel::kTeacher;
  std::string runs_dir = "runs";

  void validate() const;
};

/// Every recognised key, in canonical order.
const std::vector<std::string>& config_keys();

/// Sets one key from its textual value. Throws ValueError on an unknown
/// key or an unparsable value.
void set_key(RunConfig& cfg, const std::string& key, const std::string& value);
std::string get_key(const RunConfig& cfg, const std::string& key);

/// Parses `key=value` lines; blank lines and `#` comments are skipped and
/// surrounding whitespace is trimmed. Throws ValueError on malformed or
/// unknown keys.
void apply_config_text(RunConfig& cfg, const std::string& text, const std::string& origin);
RunConfig load_config(const std::filesystem::path& path);

/// Canonical effective config: one `key=value` line per key. Values
/// are printed so that reparsing yields the identical config.
std::string to_text(const RunConfig& cfg);

/// FNV-1a 64 over the canonical text (excluding runs_dir) followed by
/// `extra`, as 16 hex digits.
std::string config_hash(const RunConfig& cfg, const std::string& extra = "");

/// Kebab-case flag name for a key (`batch_size` -> `batch-size`).
std::string flag_name(const std::string& key);

}  // namespace specmix::cli
