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

namespace offset::nn {

struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 64;
  OptimizerKind optimizer = OptimizerKind::adam;
  double learning_rate = 1e-3;

  void validate() const;
};

/// One shuffled pass of mini-batch cross-entropy steps over `rows`.
/// Returns the mean loss seen during the pass.
double ce_epoch(MlpModel& model, const Matrix& features, std::span<const std::size_t> labels,
                std::span<const std::size_t> rows, std::size_t batch_size, OptimizerState& state,
                Rng& rng, Direction direction = Direction::descend,
                std::size_t first_trainable_layer = 0);

/// Empirical-risk minimization with cross entropy.
MlpModel train_supervised(MlpModel model, const LabeledDataset& dataset, std::size_t epochs,
                          std::size_t batch_size, OptimizerState& state, Rng& rng);

/// Convenience overload that owns a fresh optimizer.
MlpModel train_supervised(MlpModel model, const LabeledDataset& dataset, const TrainConfig& config,
                          Rng& rng);

enum class FineTuneMode { ft_all, ft_last };

/// ft_last updates only the output layer; ft_all updates every layer.
MlpModel fine_tune(MlpModel pretrained, const LabeledDataset& dataset, FineTuneMode mode,
                   const TrainConfig& config, Rng& rng);

std::vector<std::size_t> predict(const MlpModel& model, const Matrix& features);

/// Fraction of rows whose argmax matches the label.
double accuracy(const MlpModel& model, const Matrix& features,
                std::span<const std::size_t> labels);

}  // namespace offset::nn
