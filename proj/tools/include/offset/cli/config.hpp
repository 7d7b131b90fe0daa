/*
 * Copyright 2026 The offset-detect Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <string>
#include <vector>

#include "offset/cli/io.hpp"
#include "offset/eval/experiment.hpp"

namespace offset::cli {

/// Every knob of an experiment as a flat document of dotted keys
/// ("asset.outer_step", "attack.ratio", ...). Optional stages carry an
/// "enabled" switch so their parameters survive while switched off.
struct RunConfig {
  eval::ExperimentSpec spec;
  bool unlearn_enabled = false;
  eval::UnlearnConfig unlearn;
  bool adaptive_enabled = false;
  attacks::AdaptiveConfig adaptive;

  /// The experiment with optional stages resolved; validated.
  eval::ExperimentSpec build() const;
};

/// Sorted-key JSON object with every known key.
Json to_json(const RunConfig& config);
/// Starts from defaults and applies every key of `flat`. Unknown keys and
/// ill-typed values raise ConfigError.
RunConfig from_json(const Json& flat);
/// Full dotted key for `key`; a bare last segment ("ratio") is accepted
/// when it names exactly one key.
std::string resolve_key(const std::string& key);
void apply_setting(RunConfig& config, const std::string& key, const Json& value);
std::vector<std::string> known_keys();

/// The "asset.*" subset, used by the detect subcommand.
Json asset_to_json(const detect::AssetConfig& config);

/// A command-line value: JSON when it parses, else a bare string.
Json parse_value(const std::string& text);

struct Sweep {
  std::string key;
  std::vector<Json> values;
};
/// KEY=V1,V2,... ; raises ConfigError on malformed input.
Sweep parse_sweep(const std::string& arg);

}  // namespace offset::cli
