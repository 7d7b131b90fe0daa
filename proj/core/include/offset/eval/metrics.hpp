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

#include "offset/dataset.hpp"
#include "offset/nn/mlp.hpp"

namespace offset::eval {

struct Metrics {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;
  double tpr = 0.0;
  double fpr = 0.0;
  /// Downstream model (after the defense) on triggered / clean test data.
  double asr = 0.0;
  double acc = 0.0;
  std::size_t remaining_poisons = 0;
  /// The undefended victim, for reference.
  double victim_asr = 0.0;
  double victim_acc = 0.0;
  /// Model trained on the un-poisoned training split, when requested.
  std::optional<double> clean_acc;
};

/// Confusion counts, TPR/FPR and remaining poisons from a flagged index set
/// against the ground-truth mask. Rates are 0 when their denominator is 0.
Metrics detection_metrics(std::span<const std::size_t> flagged, const std::vector<bool>& mask);

/// Fraction of triggered samples classified as `target_class`.
double attack_success_rate(const nn::MlpModel& model, const LabeledDataset& triggered,
                           std::size_t target_class);

/// Upstream detection metrics plus downstream ASR/ACC of `downstream`.
Metrics compute_metrics(std::span<const std::size_t> flagged, const LabeledDataset& poisoned,
                        const nn::MlpModel& downstream, const LabeledDataset& clean_test,
                        const LabeledDataset& triggered_test);

/// Element-wise mean of rates; counts are summed.
Metrics aggregate(std::span<const Metrics> runs);

}  // namespace offset::eval
