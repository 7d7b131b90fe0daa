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

#include "offset/dataset.hpp"

#include <algorithm>
#include <string>

#include "offset/errors.hpp"

namespace offset {

std::size_t LabeledDataset::poison_count() const {
  if (!poison_mask) return 0;
  return static_cast<std::size_t>(std::count(poison_mask->begin(), poison_mask->end(), true));
}

std::vector<std::size_t> LabeledDataset::poison_indices() const {
  std::vector<std::size_t> out;
  if (!poison_mask) return out;
  for (std::size_t i = 0; i < poison_mask->size(); ++i) {
    if ((*poison_mask)[i]) out.push_back(i);
  }
  return out;
}

void LabeledDataset::validate() const {
  const std::size_t n = size();
  if (labels) {
    if (labels->size() != n) {
      throw DimensionError("label count " + std::to_string(labels->size()) +
                           " != sample count " + std::to_string(n));
    }
    for (std::size_t y : *labels) {
      if (y >= num_classes) {
        throw IndexError("label " + std::to_string(y) + " >= class count " +
                         std::to_string(num_classes));
      }
    }
  }
  if (poison_mask && poison_mask->size() != n) {
    throw DimensionError("mask length does not match sample count");
  }
  if (target_class && *target_class >= num_classes) {
    throw IndexError("target class out of range");
  }
  if (!features.all_finite()) throw ConfigError("dataset contains non-finite features");
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> rows) const {
  LabeledDataset out;
  out.features = features.gather(rows);
  out.target_class = target_class;
  out.num_classes = num_classes;
  if (labels) {
    std::vector<std::size_t> picked;
    picked.reserve(rows.size());
    for (std::size_t r : rows) picked.push_back((*labels)[r]);
    out.labels = std::move(picked);
  }
  if (poison_mask) {
    std::vector<bool> picked;
    picked.reserve(rows.size());
    for (std::size_t r : rows) picked.push_back((*poison_mask)[r]);
    out.poison_mask = std::move(picked);
  }
  return out;
}

LabeledDataset LabeledDataset::without_rows(std::span<const std::size_t> rows) const {
  std::vector<bool> drop(size(), false);
  for (std::size_t r : rows) {
    if (r >= size()) throw IndexError("row index out of range");
    drop[r] = true;
  }
  std::vector<std::size_t> keep;
  keep.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) {
    if (!drop[i]) keep.push_back(i);
  }
  return subset(keep);
}

LabeledDataset LabeledDataset::without_labels() const {
  LabeledDataset out = *this;
  out.labels.reset();
  return out;
}

LabeledDataset LabeledDataset::without_mask() const {
  LabeledDataset out = *this;
  out.poison_mask.reset();
  return out;
}

LabeledDataset concat(const LabeledDataset& a, const LabeledDataset& b) {
  if (a.dim() != b.dim() || a.num_classes != b.num_classes) {
    throw DimensionError("cannot concatenate datasets of different shape");
  }
  std::vector<double> values(a.features.values().begin(), a.features.values().end());
  values.insert(values.end(), b.features.values().begin(), b.features.values().end());
  LabeledDataset out;
  out.features = Matrix(a.size() + b.size(), a.dim(), std::move(values));
  out.num_classes = a.num_classes;
  out.target_class = a.target_class ? a.target_class : b.target_class;
  if (a.labels && b.labels) {
    auto labels = *a.labels;
    labels.insert(labels.end(), b.labels->begin(), b.labels->end());
    out.labels = std::move(labels);
  }
  if (a.poison_mask && b.poison_mask) {
    auto mask = *a.poison_mask;
    mask.insert(mask.end(), b.poison_mask->begin(), b.poison_mask->end());
    out.poison_mask = std::move(mask);
  }
  return out;
}

}  // namespace offset
