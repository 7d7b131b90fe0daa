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
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "offset/dataset.hpp"
#include "offset/detect/asset.hpp"
#include "offset/nn/mlp.hpp"
#include "offset/rng.hpp"

namespace offset::attacks {

/// Class prototypes of a synthetic image-like task. Samples are a
/// prototype plus clipped Gaussian noise.
class SyntheticTask {
 public:
  /// Prototypes uniform in [0.2, 0.8]^d. `d` must be a perfect square.
  static SyntheticTask create(std::size_t k, std::size_t d, double noise_sigma, Rng& rng);

  /// per_class_n samples of every class, interleaved (sample i has class i % k).
  LabeledDataset sample(std::size_t per_class_n, Rng& rng) const;

  std::size_t num_classes() const noexcept { return prototypes_.rows(); }
  std::size_t dim() const noexcept { return prototypes_.cols(); }
  const Matrix& prototypes() const noexcept { return prototypes_; }

 private:
  Matrix prototypes_;
  double noise_sigma_ = 0.0;
};

LabeledDataset gen_synthetic(std::size_t k, std::size_t d, std::size_t per_class_n,
                             double noise_sigma, std::uint64_t seed);

/// Side length of the square grid for a d-dimensional sample; throws
/// ConfigError when d is not a perfect square.
std::size_t grid_side(std::size_t d);

enum class TriggerKind { patch, blend };

struct Pixel {
  std::size_t row = 0;
  std::size_t col = 0;
};

struct TriggerSpec {
  TriggerKind kind = TriggerKind::patch;
  std::size_t grid = 0;
  std::vector<Pixel> pixels;
  double patch_value = 1.0;
  std::vector<double> pattern;
  double alpha = 0.0;

  /// Square patch of side `size` in the bottom-right corner.
  static TriggerSpec corner_patch(std::size_t grid, std::size_t size, double value = 1.0);
  static TriggerSpec blend(std::vector<double> pattern, double alpha);
  /// Blend toward a fixed uniform-noise pattern drawn from `seed`.
  static TriggerSpec noise_blend(std::size_t d, double alpha, std::uint64_t seed);

  void validate(std::size_t d) const;
};

std::vector<double> apply_trigger(std::span<const double> sample, const TriggerSpec& spec);
void apply_trigger_inplace(std::span<double> sample, const TriggerSpec& spec);

/// Number of poisons for a ratio of n samples; tolerant of the last-ulp
/// error in ratio * n.
std::size_t poison_budget(double ratio, std::size_t n);

/// Triggers floor(ratio * N) non-target samples and relabels them.
LabeledDataset poison_dirty_label(const LabeledDataset& dataset, const TriggerSpec& spec,
                                  double ratio, std::size_t target_class, std::uint64_t seed);

/// Triggers a fraction of the target-class samples; labels untouched.
LabeledDataset poison_clean_label(const LabeledDataset& dataset, const TriggerSpec& spec,
                                  double in_class_ratio, std::size_t target_class,
                                  std::uint64_t seed);

/// Triggered copies of every non-target sample, labeled with their true
/// class (used to measure attack success).
LabeledDataset triggered_test_set(const LabeledDataset& clean_test, const TriggerSpec& spec,
                                  std::size_t target_class);

struct AdaptiveConfig {
  std::size_t steps = 100;
  double step_size = 0.01;
  /// Optional per-coordinate bound on the perturbation.
  std::optional<double> linf_budget;
};

/// Gradient descent on the detector's maximization loss wrt an additive
/// perturbation. x + delta is kept inside [0, 1].
std::vector<double> adaptive_perturb(const nn::MlpModel& detector, std::span<const double> sample,
                                     std::optional<std::size_t> label, detect::LossMode mode,
                                     const AdaptiveConfig& config);

/// Applies adaptive_perturb to every masked sample of the dataset.
LabeledDataset adaptive_poison(const LabeledDataset& poisoned, const nn::MlpModel& detector,
                               detect::LossMode mode, const AdaptiveConfig& config);

}  // namespace offset::attacks
