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

#include "offset/nn/train.hpp"

#include <numeric>

#include "offset/errors.hpp"
#include "offset/nn/losses.hpp"

namespace offset::nn {

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("batch size must be at least 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
}

double ce_epoch(MlpModel& model, const Matrix& features, std::span<const std::size_t> labels,
                std::span<const std::size_t> rows, std::size_t batch_size, OptimizerState& state,
                Rng& rng, Direction direction, std::size_t first_trainable_layer) {
  if (batch_size < 1) throw ConfigError("batch size must be at least 1");
  std::vector<std::size_t> order(rows.begin(), rows.end());
  rng.shuffle(order);
  double total = 0.0;
  std::vector<std::size_t> batch_labels;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t stop = std::min(order.size(), start + batch_size);
    std::span<const std::size_t> idx(order.data() + start, stop - start);
    batch_labels.clear();
    for (std::size_t i : idx) batch_labels.push_back(labels[i]);
    const Matrix batch = features.gather(idx);
    auto fwd = forward(model, batch);
    auto loss = batch_loss_ce(fwd.logits, batch_labels);
    auto grads = backward(model, fwd.cache, loss.grad);
    optimizer_step(model, state, grads.params, direction, first_trainable_layer);
    for (double v : loss.values) total += v;
  }
  return order.empty() ? 0.0 : total / static_cast<double>(order.size());
}

namespace {

const std::vector<std::size_t>& require_labels(const LabeledDataset& dataset) {
  if (!dataset.labels) throw MissingLabelsError("supervised training needs a labeled dataset");
  return *dataset.labels;
}

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return rows;
}

}  // namespace

MlpModel train_supervised(MlpModel model, const LabeledDataset& dataset, std::size_t epochs,
                          std::size_t batch_size, OptimizerState& state, Rng& rng) {
  const auto& labels = require_labels(dataset);
  if (batch_size < 1) throw ConfigError("batch size must be at least 1");
  if (dataset.dim() != model.input_dim()) throw DimensionError("dataset/model input dim mismatch");
  if (dataset.num_classes > model.output_dim()) {
    throw DimensionError("model has fewer logits than dataset classes");
  }
  const auto rows = all_rows(dataset.size());
  for (std::size_t e = 0; e < epochs; ++e) {
    ce_epoch(model, dataset.features, labels, rows, batch_size, state, rng);
  }
  return model;
}

MlpModel train_supervised(MlpModel model, const LabeledDataset& dataset, const TrainConfig& config,
                          Rng& rng) {
  config.validate();
  auto state = OptimizerState::create(config.optimizer, config.learning_rate, model);
  return train_supervised(std::move(model), dataset, config.epochs, config.batch_size, state, rng);
}

MlpModel fine_tune(MlpModel pretrained, const LabeledDataset& dataset, FineTuneMode mode,
                   const TrainConfig& config, Rng& rng) {
  config.validate();
  const auto& labels = require_labels(dataset);
  if (pretrained.output_dim() != dataset.num_classes) {
    throw DimensionError("pretrained output dim does not match dataset class count");
  }
  if (dataset.dim() != pretrained.input_dim()) {
    throw DimensionError("dataset/model input dim mismatch");
  }
  const std::size_t first = mode == FineTuneMode::ft_last ? pretrained.layer_count() - 1 : 0;
  auto state = OptimizerState::create(config.optimizer, config.learning_rate, pretrained);
  const auto rows = all_rows(dataset.size());
  for (std::size_t e = 0; e < config.epochs; ++e) {
    ce_epoch(pretrained, dataset.features, labels, rows, config.batch_size, state, rng,
             Direction::descend, first);
  }
  return pretrained;
}

std::vector<std::size_t> predict(const MlpModel& model, const Matrix& features) {
  const Matrix out = logits(model, features);
  std::vector<std::size_t> classes(out.rows());
  for (std::size_t r = 0; r < out.rows(); ++r) classes[r] = argmax(out.row(r));
  return classes;
}

double accuracy(const MlpModel& model, const Matrix& features,
                std::span<const std::size_t> labels) {
  if (labels.size() != features.rows()) throw DimensionError("one label per row required");
  if (labels.empty()) return 0.0;
  const auto pred = predict(model, features);
  std::size_t hit = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hit += pred[i] == labels[i];
  return static_cast<double>(hit) / static_cast<double>(labels.size());
}

}  // namespace offset::nn
