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
#include <optional>
#include <span>
#include <vector>

#include "offset/matrix.hpp"

namespace offset {

/// Feature matrix plus optional labels and harness-only ground truth.
///
/// `poison_mask` is never read by detection code; it exists so the
/// evaluation harness can score a detector after the fact.
struct LabeledDataset {
  Matrix features;
  std::optional<std::vector<std::size_t>> labels;
  std::optional<std::vector<bool>> poison_mask;
  std::optional<std::size_t> target_class;
  std::size_t num_classes = 0;

  std::size_t size() const noexcept { return features.rows(); }
  std::size_t dim() const noexcept { return features.cols(); }
  bool has_labels() const noexcept { return labels.has_value(); }
  bool has_mask() const noexcept { return poison_mask.has_value(); }

  std::size_t poison_count() const;
  std::vector<std::size_t> poison_indices() const;

  /// Throws ConfigError when lengths or label ranges are inconsistent.
  void validate() const;

  LabeledDataset subset(std::span<const std::size_t> rows) const;
  /// Every row except the listed ones, preserving order.
  LabeledDataset without_rows(std::span<const std::size_t> rows) const;
  LabeledDataset without_labels() const;
  LabeledDataset without_mask() const;
};

/// Concatenates rows; both sides must agree on dim and num_classes. Labels
/// and mask are kept only when both sides carry them.
LabeledDataset concat(const LabeledDataset& a, const LabeledDataset& b);

}  // namespace offset
