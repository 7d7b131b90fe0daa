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

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "offset/dataset.hpp"
#include "offset/nn/mlp.hpp"

namespace offset::cli {

namespace fs = std::filesystem;
using Json = nlohmann::json;

inline constexpr int kManifestVersion = 1;
inline constexpr const char* kManifestName = "manifest.json";
inline constexpr const char* kFeatureFile = "features.f32";
inline constexpr const char* kLabelFile = "labels.u8";
inline constexpr const char* kMaskFile = "mask.u8";

/// Rounds every feature to the nearest float32 so the in-memory dataset is
/// exactly what a later read_dataset returns.
void round_to_float32(Matrix& features);

/// Writes manifest.json plus raw little-endian float32 features (row-major,
/// no header) and one byte per sample for labels and mask.
void write_dataset(const fs::path& dir, const LabeledDataset& data, const Json& provenance);
LabeledDataset read_dataset(const fs::path& dir);
Json read_manifest(const fs::path& dir);

/// Binary model file: magic, layer count, per-layer shape, then float64
/// little-endian weights and biases.
void write_model(const fs::path& path, const nn::MlpModel& model);
nn::MlpModel read_model(const fs::path& path);

/// One index per line, ascending.
void write_index_list(const fs::path& path, const std::vector<std::size_t>& indices);
std::vector<std::size_t> read_index_list(const fs::path& path);

/// Pretty-printed with sorted keys and a trailing newline.
void write_json(const fs::path& path, const Json& value);
Json read_json(const fs::path& path);
void write_text(const fs::path& path, const std::string& text);
void ensure_directory(const fs::path& dir);

/// Shortest text that parses back to the same double.
std::string format_double(double value);

}  // namespace offset::cli
