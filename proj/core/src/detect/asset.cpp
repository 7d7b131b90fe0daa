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

#include "offset/detect/asset.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "offset/errors.hpp"

namespace offset::detect {

double AssetConfig::effective_outer_step() const {
  if (outer_step) return *outer_step;
  return mode == LossMode::labeled ? kLabeledOuterStep : kUnlabeledOuterStep;
}

void AssetConfig::validate() const {
  if (!(effective_outer_step() > 0.0) || !(inner_step > 0.0)) throw ConfigError("step sizes must be positive");
  if (!(ao_threshold > 0.0)) throw ConfigError("AO threshold must be positive");
  if (!(gmm_beta > 0.0 && gmm_beta < 1.0)) throw ConfigError("GMM beta must lie in (0, 1)");
  if (poison_batch < 2 || base_batch < 2) throw ConfigError("batch sizes must be at least 2");
  if (detector_logits == 1) throw ConfigError("detector needs at least 2 logits");
}

double select_max_loss(LossMode mode, std::span<const double> logits,
                       std::optional<std::size_t> label) {
  return max_loss_and_grad(mode, logits, label).value;
}

nn::LossAndGrad max_loss_and_grad(LossMode mode, std::span<const double> logits,
                                  std::optional<std::size_t> label) {
  if (mode == LossMode::unlabeled) return nn::loss_var(logits);
  if (!label) throw MissingLabelsError("labeled mode needs a label for the maximization loss");
  return nn::loss_ce(logits, *label);
}

FeatureScaler FeatureScaler::fit(const Matrix& base_features) {
  const std::size_t n = base_features.rows();
  const std::size_t d = base_features.cols();
  if (n == 0) throw InsufficientDataError("cannot fit a feature scaler on zero rows");
  FeatureScaler s;
  s.mean_.assign(d, 0.0);
  s.inv_scale_.assign(d, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < d; ++j) s.mean_[j] += base_features(r, j);
  }
  for (double& m : s.mean_) m /= static_cast<double>(n);
  std::vector<double> var(d, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < d; ++j) {
      const double dv = base_features(r, j) - s.mean_[j];
      var[j] += dv * dv;
    }
  }
  for (std::size_t j = 0; j < d; ++j) {
    s.inv_scale_[j] = 1.0 / (std::sqrt(var[j] / static_cast<double>(n)) + kScaleFloor);
  }
  return s;
}

FeatureScaler FeatureScaler::identity(std::size_t dim) {
  FeatureScaler s;
  s.mean_.assign(dim, 0.0);
  s.inv_scale_.assign(dim, 1.0);
  return s;
}

Matrix FeatureScaler::apply(const Matrix& features) const {
  if (features.cols() != mean_.size()) throw DimensionError("feature scaler width mismatch");
  Matrix out = features;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    for (std::size_t j = 0; j < row.size(); ++j) row[j] = (row[j] - mean_[j]) * inv_scale_[j];
  }
  return out;
}

WeightNet WeightNet::random(std::size_t feature_dim, Rng& rng) {
  return WeightNet(nn::MlpModel::random({feature_dim, kHiddenWidth, 1}, rng));
}

std::vector<double> WeightNet::scores(const Matrix& features) const {
  const Matrix out = nn::logits(net_, features);
  std::vector<double> q(out.rows());
  for (std::size_t r = 0; r < out.rows(); ++r) q[r] = nn::sigmoid(out(r, 0));
  return q;
}

void WeightNet::step(const Matrix& features, int target, nn::OptimizerState& state) {
  auto fwd = nn::forward(net_, features);
  Matrix upstream(features.rows(), 1);
  for (std::size_t r = 0; r < features.rows(); ++r) {
    upstream(r, 0) = nn::loss_bce(nn::sigmoid(fwd.logits(r, 0)), target).grad_score;
  }
  auto grads = nn::backward(net_, fwd.cache, upstream);
  nn::optimizer_step(net_, state, grads.params, nn::Direction::descend);
}

std::vector<std::size_t> poison_concentration(const Matrix& poison_features,
                                              const Matrix& base_features,
                                              const AssetConfig& config, Rng& rng) {
  if (poison_features.cols() != base_features.cols()) {
    throw DimensionError("poisoned and base features differ in width");
  }
  if (poison_features.rows() < 4) {
    throw InsufficientDataError("poison concentration needs at least 4 rows");
  }
  WeightNet net = WeightNet::random(poison_features.cols(), rng);
  auto state = nn::OptimizerState::create(config.optimizer, config.inner_step, net.model());
  for (std::size_t j = 0; j < config.inner_iterations; ++j) {
    net.step(base_features, 0, state);
    net.step(poison_features, 1, state);
  }
  const auto scores = net.scores(poison_features);
  const auto ao = stats::adjusted_outlyingness(scores);
  const double mid = stats::median(scores);
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < scores.size(); ++r) {
    if (scores[r] > mid && ao[r] >= config.ao_threshold) rows.push_back(r);
  }
  return rows;
}

std::vector<std::size_t> poison_concentration(const nn::MlpModel& victim, const Matrix& poison_batch,
                                              const Matrix& base_batch, const AssetConfig& config) {
  Rng rng(config.seed);
  const Matrix poi = nn::penultimate_features(victim, poison_batch);
  const Matrix base = nn::penultimate_features(victim, base_batch);
  const auto scaler = config.standardize_features ? FeatureScaler::fit(base)
                                                  : FeatureScaler::identity(base.cols());
  return poison_concentration(scaler.apply(poi), scaler.apply(base), config, rng);
}

namespace {

std::vector<std::size_t> draw_batch(std::size_t n, std::size_t size, Rng& rng) {
  std::vector<std::size_t> idx(size);
  for (auto& i : idx) i = rng.below(n);
  return idx;
}

}  // namespace

DetectionRun asset_detect_with_model(const nn::MlpModel& victim, const LabeledDataset& poisoned,
                                     const LabeledDataset& base, const AssetConfig& config) {
  config.validate();
  const auto started = std::chrono::steady_clock::now();
  const bool labeled = config.mode == LossMode::labeled;
  if (labeled && !poisoned.has_labels()) {
    throw MissingLabelsError("labeled detection mode needs labels on the poisoned set");
  }
  if (poisoned.dim() != victim.input_dim() || base.dim() != victim.input_dim()) {
    throw DimensionError("dataset width does not match the victim model");
  }
  if (poisoned.size() < 4 || base.size() < 1) {
    throw InsufficientDataError("detection needs at least 4 poisoned and 1 base sample");
  }
  if (victim.layer_count() < 2) throw UnsupportedError("victim needs a hidden layer for features");

  const std::size_t logits_width =
      config.detector_logits == 0 ? victim.output_dim() : config.detector_logits;
  if (labeled && poisoned.num_classes > logits_width) {
    throw DimensionError("labeled mode needs at least one detector logit per class");
  }
  if (logits_width < 2) throw DimensionError("detector needs at least 2 logits");

  Rng rng(config.seed);
  std::vector<std::size_t> dims = victim.dims();
  dims.back() = logits_width;
  Rng init_rng = rng.fork();
  nn::MlpModel detector = nn::MlpModel::random(dims, init_rng);
  // One optimizer for both offset steps: the ascent is a descent step on the
  // negated loss as far as the moment estimates are concerned.
  auto state = nn::OptimizerState::create(config.optimizer, config.effective_outer_step(), detector);

  Matrix poison_feats;
  Matrix base_feats;
  if (config.concentrate) {
    poison_feats = nn::penultimate_features(victim, poisoned.features);
    base_feats = nn::penultimate_features(victim, base.features);
    if (config.standardize_features) {
      const auto scaler = FeatureScaler::fit(base_feats);
      poison_feats = scaler.apply(poison_feats);
      base_feats = scaler.apply(base_feats);
    }
  }

  DetectionRun run;
  run.report.concentrated_sizes.reserve(config.outer_iterations);
  std::vector<std::size_t> suspects;
  for (std::size_t it = 0; it < config.outer_iterations; ++it) {
    const auto poi_idx = draw_batch(poisoned.size(), config.poison_batch, rng);
    const auto base_idx = draw_batch(base.size(), config.base_batch, rng);

    {
      auto fwd = nn::forward(detector, base.features.gather(base_idx));
      auto loss = nn::batch_loss_var(fwd.logits);
      auto grads = nn::backward(detector, fwd.cache, loss.grad);
      nn::optimizer_step(detector, state, grads.params, nn::Direction::descend);
    }

    suspects.clear();
    if (config.concentrate) {
      Rng inner_rng = rng.fork();
      const auto rows = poison_concentration(poison_feats.gather(poi_idx),
                                             base_feats.gather(base_idx), config, inner_rng);
      for (std::size_t r : rows) suspects.push_back(poi_idx[r]);
    } else {
      suspects = poi_idx;
    }
    run.report.concentrated_sizes.push_back(suspects.size());
    if (suspects.empty()) continue;

    auto fwd = nn::forward(detector, poisoned.features.gather(suspects));
    Matrix upstream(suspects.size(), logits_width);
    for (std::size_t r = 0; r < suspects.size(); ++r) {
      std::optional<std::size_t> label;
      if (labeled) label = (*poisoned.labels)[suspects[r]];
      auto lg = max_loss_and_grad(config.mode, fwd.logits.row(r), label);
      std::copy(lg.grad.begin(), lg.grad.end(), upstream.row(r).begin());
    }
    auto grads = nn::backward(detector, fwd.cache, upstream);
    nn::optimizer_step(detector, state, grads.params, nn::Direction::ascend);
  }

  const Matrix final_logits = nn::logits(detector, poisoned.features);
  run.report.losses.resize(poisoned.size());
  for (std::size_t i = 0; i < poisoned.size(); ++i) {
    std::optional<std::size_t> label;
    if (labeled) label = (*poisoned.labels)[i];
    const double v = select_max_loss(config.mode, final_logits.row(i), label);
    if (!std::isfinite(v)) throw NumericError("non-finite detection loss for sample " + std::to_string(i));
    run.report.losses[i] = v;
  }
  auto gmm = stats::adaptive_gmm(run.report.losses, config.gmm_beta);
  run.report.flagged = std::move(gmm.flagged);
  run.report.fit = gmm.fit;
  run.report.config = config;
  run.detector = std::move(detector);
  run.report.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return run;
}

DetectionReport asset_detect(const nn::MlpModel& victim, const LabeledDataset& poisoned,
                             const LabeledDataset& base, const AssetConfig& config) {
  return asset_detect_with_model(victim, poisoned, base, config).report;
}

}  // namespace offset::detect
