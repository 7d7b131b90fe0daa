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

#include "offset/cli/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <system_error>

#include "offset/errors.hpp"

namespace offset::cli {
namespace {

constexpr std::array<char, 8> kModelMagic{'O', 'F', 'F', 'M', 'L', 'P', '0', '1'};

template <typename T>
T to_little(T value) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(value);
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
    return std::bit_cast<T>(bytes);
  } else {
    return value;
  }
}

std::string read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path.string());
  return data;
}

void write_bytes(const fs::path& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

template <typename T>
void put(std::string& buf, T value) {
  const T le = to_little(value);
  char raw[sizeof(T)];
  std::memcpy(raw, &le, sizeof(T));
  buf.append(raw, sizeof(T));
}

class Reader {
 public:
  Reader(const std::string& data, const fs::path& path) : data_(data), path_(path) {}

  template <typename T>
  T get() {
    if (pos_ + sizeof(T) > data_.size()) throw IoError("truncated file: " + path_.string());
    T value;
    std::memcpy(&value, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return to_little(value);
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  const std::string& data_;
  const fs::path& path_;
  std::size_t pos_ = 0;
};

std::size_t json_size(const Json& manifest, const char* key) {
  const auto it = manifest.find(key);
  if (it == manifest.end() || !it->is_number_unsigned())
    throw IoError(std::string("manifest field missing or not a count: ") + key);
  return it->get<std::size_t>();
}

bool json_flag(const Json& manifest, const char* key) {
  const auto it = manifest.find(key);
  if (it == manifest.end() || !it->is_boolean())
    throw IoError(std::string("manifest field missing or not a flag: ") + key);
  return it->get<bool>();
}

std::string json_name(const Json& manifest, const char* key) {
  const auto it = manifest.find(key);
  if (it == manifest.end() || !it->is_string())
    throw IoError(std::string("manifest field missing: ") + key);
  const std::string name = it->get<std::string>();
  if (name.empty() || fs::path(name).has_parent_path())
    throw IoError("manifest file name must be a plain name: " + name);
  return name;
}

}  // namespace

void round_to_float32(Matrix& features) {
  for (double& v : features.values()) v = static_cast<double>(static_cast<float>(v));
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

void write_dataset(const fs::path& dir, const LabeledDataset& data, const Json& provenance) {
  data.validate();
  if (data.num_classes > 256) throw ConfigError("labels are stored as bytes; at most 256 classes");
  ensure_directory(dir);

  std::string features;
  features.reserve(data.features.size() * sizeof(float));
  for (double v : data.features.values()) put(features, static_cast<float>(v));
  write_bytes(dir / kFeatureFile, features);

  Json manifest;
  manifest["version"] = kManifestVersion;
  manifest["n"] = data.size();
  manifest["d"] = data.dim();
  manifest["k"] = data.num_classes;
  manifest["has_labels"] = data.has_labels();
  manifest["has_mask"] = data.has_mask();
  manifest["target_class"] = data.target_class ? Json(*data.target_class) : Json(nullptr);
  manifest["features_file"] = kFeatureFile;
  manifest["labels_file"] = data.has_labels() ? Json(kLabelFile) : Json(nullptr);
  manifest["mask_file"] = data.has_mask() ? Json(kMaskFile) : Json(nullptr);
  manifest["provenance"] = provenance;

  if (data.has_labels()) {
    std::string labels;
    for (std::size_t y : *data.labels) labels.push_back(static_cast<char>(y));
    write_bytes(dir / kLabelFile, labels);
  } else {
    fs::remove(dir / kLabelFile);
  }
  if (data.has_mask()) {
    std::string mask;
    for (bool p : *data.poison_mask) mask.push_back(p ? 1 : 0);
    write_bytes(dir / kMaskFile, mask);
  } else {
    fs::remove(dir / kMaskFile);
  }
  write_json(dir / kManifestName, manifest);
}

Json read_manifest(const fs::path& dir) {
  const Json manifest = read_json(dir / kManifestName);
  if (!manifest.is_object()) throw IoError("manifest is not an object: " + dir.string());
  if (manifest.value("version", 0) != kManifestVersion)
    throw IoError("unsupported manifest version in " + dir.string());
  return manifest;
}

LabeledDataset read_dataset(const fs::path& dir) {
  const Json manifest = read_manifest(dir);
  const std::size_t n = json_size(manifest, "n");
  const std::size_t d = json_size(manifest, "d");
  const std::size_t k = json_size(manifest, "k");

  LabeledDataset data;
  data.num_classes = k;
  const std::string features = read_bytes(dir / json_name(manifest, "features_file"));
  if (features.size() != n * d * sizeof(float))
    throw IoError("feature file length does not match n * d * 4 in " + dir.string());
  Reader fr(features, dir);
  std::vector<double> values(n * d);
  for (double& v : values) v = static_cast<double>(fr.get<float>());
  data.features = Matrix(n, d, std::move(values));

  if (json_flag(manifest, "has_labels")) {
    const std::string raw = read_bytes(dir / json_name(manifest, "labels_file"));
    if (raw.size() != n) throw IoError("label file length does not match n in " + dir.string());
    std::vector<std::size_t> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<unsigned char>(raw[i]);
    data.labels = std::move(labels);
  }
  if (json_flag(manifest, "has_mask")) {
    const std::string raw = read_bytes(dir / json_name(manifest, "mask_file"));
    if (raw.size() != n) throw IoError("mask file length does not match n in " + dir.string());
    std::vector<bool> mask(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (raw[i] != 0 && raw[i] != 1) throw IoError("mask bytes must be 0 or 1 in " + dir.string());
      mask[i] = raw[i] == 1;
    }
    data.poison_mask = std::move(mask);
  }
  const auto target = manifest.find("target_class");
  if (target != manifest.end() && target->is_number_unsigned())
    data.target_class = target->get<std::size_t>();
  data.validate();
  return data;
}

void write_model(const fs::path& path, const nn::MlpModel& model) {
  if (!model.all_finite()) throw NumericError("refusing to save a model with non-finite parameters");
  std::string buf(kModelMagic.begin(), kModelMagic.end());
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(model.layer_count()));
  for (const auto& layer : model.layers()) {
    put<std::uint64_t>(buf, layer.in_dim());
    put<std::uint64_t>(buf, layer.out_dim());
  }
  for (const auto& layer : model.layers()) {
    for (double w : layer.weight.values()) put(buf, w);
    for (double b : layer.bias) put(buf, b);
  }
  if (path.has_parent_path()) ensure_directory(path.parent_path());
  write_bytes(path, buf);
}

nn::MlpModel read_model(const fs::path& path) {
  const std::string data = read_bytes(path);
  if (data.size() < kModelMagic.size() ||
      !std::equal(kModelMagic.begin(), kModelMagic.end(), data.begin()))
    throw IoError("not a model file: " + path.string());
  const std::string body = data.substr(kModelMagic.size());
  Reader r(body, path);
  const auto count = r.get<std::uint32_t>();
  if (count == 0 || count > 64) throw IoError("implausible layer count in " + path.string());
  std::vector<std::pair<std::size_t, std::size_t>> shapes;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto in = r.get<std::uint64_t>();
    const auto out = r.get<std::uint64_t>();
    if (in == 0 || out == 0 || in > (1u << 24) || out > (1u << 24))
      throw IoError("implausible layer shape in " + path.string());
    shapes.emplace_back(in, out);
  }
  std::vector<nn::DenseLayer> layers;
  for (const auto& [in, out] : shapes) {
    nn::DenseLayer layer{Matrix(in, out), std::vector<double>(out)};
    for (double& w : layer.weight.values()) w = r.get<double>();
    for (double& b : layer.bias) b = r.get<double>();
    layers.push_back(std::move(layer));
  }
  if (!r.done()) throw IoError("trailing bytes in " + path.string());
  try {
    return nn::MlpModel::from_layers(std::move(layers));
  } catch (const ConfigError& e) {
    throw IoError(std::string("inconsistent model file: ") + e.what());
  }
}

void write_index_list(const fs::path& path, const std::vector<std::size_t>& indices) {
  std::string text;
  for (std::size_t i : indices) text += std::to_string(i) + "\n";
  write_text(path, text);
}

std::vector<std::size_t> read_index_list(const fs::path& path) {
  std::istringstream in(read_bytes(path));
  std::vector<std::size_t> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::size_t value = 0;
    const auto [end, ec] = std::from_chars(line.data(), line.data() + line.size(), value);
    if (ec != std::errc() || end != line.data() + line.size())
      throw IoError("bad index line '" + line + "' in " + path.string());
    out.push_back(value);
  }
  return out;
}

void write_json(const fs::path& path, const Json& value) {
  write_text(path, value.dump(2) + "\n");
}

Json read_json(const fs::path& path) {
  const std::string text = read_bytes(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError("invalid JSON in " + path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) { write_bytes(path, text); }

std::string format_double(double value) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) return std::to_string(value);
  return std::string(buf, end);
}

}  // namespace offset::cli
