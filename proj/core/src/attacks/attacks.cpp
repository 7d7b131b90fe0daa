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

#include "offset/attacks/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "offset/errors.hpp"

namespace offset::attacks {

std::size_t grid_side(std::size_t d) {
  const auto s = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(d))));
  if (d == 0 || s * s != d) {
    throw ConfigError("feature dim " + std::to_string(d) + " is not a perfect square");
  }
  return s;
}

SyntheticTask SyntheticTask::create(std::size_t k, std::size_t d, double noise_sigma, Rng& rng) {
  if (k < 2) throw ConfigError("synthetic task needs at least 2 classes");
  grid_side(d);
  if (!(noise_sigma >= 0.0)) throw ConfigError("noise sigma must be non-negative");
  SyntheticTask task;
  task.prototypes_ = Matrix(k, d);
  for (double& v : task.prototypes_.values()) v = rng.uniform(0.2, 0.8);
  task.noise_sigma_ = noise_sigma;
  return task;
}

LabeledDataset SyntheticTask::sample(std::size_t per_class_n, Rng& rng) const {
  const std::size_t k = num_classes();
  const std::size_t d = dim();
  LabeledDataset ds;
  ds.num_classes = k;
  ds.features = Matrix(per_class_n * k, d);
  std::vector<std::size_t> labels(per_class_n * k);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::size_t c = i % k;
    labels[i] = c;
    auto row = ds.features.row(i);
    for (std::size_t j = 0; j < d; ++j) {
      const double noise = noise_sigma_ > 0.0 ? noise_sigma_ * rng.normal() : 0.0;
      row[j] = std::clamp(prototypes_(c, j) + noise, 0.0, 1.0);
    }
  }
  ds.labels = std::move(labels);
  return ds;
}

LabeledDataset gen_synthetic(std::size_t k, std::size_t d, std::size_t per_class_n,
                             double noise_sigma, std::uint64_t seed) {
  Rng rng(seed);
  const auto task = SyntheticTask::create(k, d, noise_sigma, rng);
  return task.sample(per_class_n, rng);
}

TriggerSpec TriggerSpec::corner_patch(std::size_t grid, std::size_t size, double value) {
  if (size == 0 || size > grid) throw ConfigError("patch size must be in [1, grid]");
  TriggerSpec spec;
  spec.kind = TriggerKind::patch;
  spec.grid = grid;
  spec.patch_value = value;
  for (std::size_t r = grid - size; r < grid; ++r) {
    for (std::size_t c = grid - size; c < grid; ++c) spec.pixels.push_back({r, c});
  }
  return spec;
}

TriggerSpec TriggerSpec::blend(std::vector<double> pattern, double alpha) {
  TriggerSpec spec;
  spec.kind = TriggerKind::blend;
  spec.grid = grid_side(pattern.size());
  spec.pattern = std::move(pattern);
  spec.alpha = alpha;
  return spec;
}

TriggerSpec TriggerSpec::noise_blend(std::size_t d, double alpha, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> pattern(d);
  for (double& v : pattern) v = rng.uniform();
  return blend(std::move(pattern), alpha);
}

void TriggerSpec::validate(std::size_t d) const {
  if (grid * grid != d) throw DimensionError("trigger grid does not match sample dim");
  if (kind == TriggerKind::patch) {
    for (const auto& p : pixels) {
      if (p.row >= grid || p.col >= grid) throw ConfigError("patch pixel outside the grid");
    }
    if (!(patch_value >= 0.0 && patch_value <= 1.0)) throw ConfigError("patch value outside [0,1]");
  } else {
    if (pattern.size() != d) throw DimensionError("blend pattern length does not match sample");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("blend alpha must lie in [0, 1]");
  }
}

void apply_trigger_inplace(std::span<double> sample, const TriggerSpec& spec) {
  spec.validate(sample.size());
  if (spec.kind == TriggerKind::patch) {
    for (const auto& p : spec.pixels) sample[p.row * spec.grid + p.col] = spec.patch_value;
    return;
  }
  for (std::size_t j = 0; j < sample.size(); ++j) {
    sample[j] = std::clamp((1.0 - spec.alpha) * sample[j] + spec.alpha * spec.pattern[j], 0.0, 1.0);
  }
}

std::vector<double> apply_trigger(std::span<const double> sample, const TriggerSpec& spec) {
  std::vector<double> out(sample.begin(), sample.end());
  apply_trigger_inplace(out, spec);
  return out;
}

std::size_t poison_budget(double ratio, std::size_t n) {
  return static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n) + 1e-9));
}

namespace {

const std::vector<std::size_t>& labels_of(const LabeledDataset& ds) {
  if (!ds.labels) throw MissingLabelsError("poisoning needs a labeled dataset");
  return *ds.labels;
}

}  // namespace

LabeledDataset poison_dirty_label(const LabeledDataset& dataset, const TriggerSpec& spec,
                                  double ratio, std::size_t target_class, std::uint64_t seed) {
  if (!(ratio >= 0.0)) throw ConfigError("poison ratio must be non-negative");
  if (ratio > 0.5) throw ThreatModelError("poison ratio above 0.5 violates the threat model");
  if (target_class >= dataset.num_classes) throw IndexError("target class out of range");
  const auto& labels = labels_of(dataset);
  spec.validate(dataset.dim());

  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != target_class) candidates.push_back(i);
  }
  const std::size_t count = poison_budget(ratio, dataset.size());
  if (count > candidates.size()) {
    throw ThreatModelError("not enough non-target samples for the requested ratio");
  }

  LabeledDataset out = dataset;
  std::vector<bool> mask(dataset.size(), false);
  Rng rng(seed);
  for (std::size_t pick : rng.sample_without_replacement(candidates.size(), count)) {
    const std::size_t i = candidates[pick];
    apply_trigger_inplace(out.features.row(i), spec);
    (*out.labels)[i] = target_class;
    mask[i] = true;
  }
  out.poison_mask = std::move(mask);
  out.target_class = target_class;
  return out;
}

LabeledDataset poison_clean_label(const LabeledDataset& dataset, const TriggerSpec& spec,
                                  double in_class_ratio, std::size_t target_class,
                                  std::uint64_t seed) {
  if (!(in_class_ratio >= 0.0 && in_class_ratio <= 1.0)) {
    throw ConfigError("in-class ratio must lie in [0, 1]");
  }
  if (target_class >= dataset.num_classes) throw IndexError("target class out of range");
  const auto& labels = labels_of(dataset);
  spec.validate(dataset.dim());

  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == target_class) members.push_back(i);
  }
  if (members.empty()) throw EmptyClassError("dataset has no samples of the target class");
  const std::size_t count = poison_budget(in_class_ratio, members.size());

  LabeledDataset out = dataset;
  std::vector<bool> mask(dataset.size(), false);
  Rng rng(seed);
  for (std::size_t pick : rng.sample_without_replacement(members.size(), count)) {
    const std::size_t i = members[pick];
    apply_trigger_inplace(out.features.row(i), spec);
    mask[i] = true;
  }
  out.poison_mask = std::move(mask);
  out.target_class = target_class;
  return out;
}

LabeledDataset triggered_test_set(const LabeledDataset& clean_test, const TriggerSpec& spec,
                                  std::size_t target_class) {
  const auto& labels = labels_of(clean_test);
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != target_class) rows.push_back(i);
  }
  LabeledDataset out = clean_test.subset(rows);
  for (std::size_t r = 0; r < out.size(); ++r) apply_trigger_inplace(out.features.row(r), spec);
  out.target_class = target_class;
  return out;
}

std::vector<double> adaptive_perturb(const nn::MlpModel& detector, std::span<const double> sample,
                                     std::optional<std::size_t> label, detect::LossMode mode,
                                     const AdaptiveConfig& config) {
  if (sample.size() != detector.input_dim()) throw DimensionError("sample/detector dim mismatch");
  const std::size_t d = sample.size();
  std::vector<double> delta(d, 0.0);
  Matrix x(1, d);
  for (std::size_t s = 0; s < config.steps; ++s) {
    for (std::size_t j = 0; j < d; ++j) x(0, j) = sample[j] + delta[j];
    auto fwd = nn::forward(detector, x);
    auto lg = detect::max_loss_and_grad(mode, fwd.logits.row(0), label);
    Matrix upstream(1, lg.grad.size(), lg.grad);
    const auto back = nn::backward(detector, fwd.cache, upstream);
    for (std::size_t j = 0; j < d; ++j) {
      double next = delta[j] - config.step_size * back.input(0, j);
      if (config.linf_budget) next = std::clamp(next, -*config.linf_budget, *config.linf_budget);
      // keep the perturbed sample a valid image
      delta[j] = std::clamp(sample[j] + next, 0.0, 1.0) - sample[j];
    }
  }
  return delta;
}

LabeledDataset adaptive_poison(const LabeledDataset& poisoned, const nn::MlpModel& detector,
                               detect::LossMode mode, const AdaptiveConfig& config) {
  if (!poisoned.poison_mask) throw HarnessError("adaptive poisoning needs the poison mask");
  if (mode == detect::LossMode::labeled && !poisoned.labels) {
    throw MissingLabelsError("labeled adaptive attack needs labels");
  }
  LabeledDataset out = poisoned;
  for (std::size_t i : poisoned.poison_indices()) {
    std::optional<std::size_t> label;
    if (mode == detect::LossMode::labeled) label = (*poisoned.labels)[i];
    const auto delta = adaptive_perturb(detector, poisoned.features.row(i), label, mode, config);
    auto row = out.features.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) row[j] = std::clamp(row[j] + delta[j], 0.0, 1.0);
  }
  return out;
}

}  // namespace offset::attacks
