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
#include <span>
#include <vector>

#include "offset/dataset.hpp"
#include "offset/nn/mlp.hpp"
#include "offset/nn/optimizer.hpp"
#include "offset/rng.hpp"

namespace offset::eval {

/// Spectral-signature baseline: within each class, score samples by their
/// squared projection on the top singular direction of the centered
/// penultimate features and flag the top 1.5 * expected_ratio fraction.
/// Classes with fewer than two samples are skipped.
std::vector<std::size_t> spectral_baseline(const nn::MlpModel& victim, const LabeledDataset& poisoned,
                                           double expected_ratio);

struct UnlearnConfig {
  std::size_t epochs = 5;
  double learning_rate = 3e-3;
  std::size_t batch_size = 64;
  nn::OptimizerKind optimizer = nn::OptimizerKind::adam;
};

/// Alternates a cross-entropy descent epoch on the unflagged samples with a
/// cross-entropy ascent epoch on the flagged ones. An empty flagged set is a
/// no-op.
nn::MlpModel unlearn(nn::MlpModel victim, const LabeledDataset& poisoned,
                     std::span<const std::size_t> flagged, const UnlearnConfig& config, Rng& rng);

}  // namespace offset::eval
