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
#include "offset/nn/losses.hpp"
#include "offset/nn/mlp.hpp"
#include "offset/nn/optimizer.hpp"
#include "offset/rng.hpp"
#include "offset/stats/robust.hpp"

namespace offset::detect {

/// labeled: maximize cross entropy on suspects. unlabeled: maximize logit
/// variance. The minimization side always uses logit variance.
enum class LossMode { labeled, unlabeled };

struct AssetConfig {
  std::size_t outer_iterations = 300;
  std::size_t inner_iterations = 10;
  /// Unset means the mode default: kLabeledOuterStep or kUnlabeledOuterStep.
  std::optional<double> outer_step;
  double inner_step = 1e-2;
  double ao_threshold = 2.0;
  double gmm_beta = 1e-6;
  std::size_t poison_batch = 128;
  std::size_t base_batch = 256;
  LossMode mode = LossMode::labeled;
  /// Width of the detector's output layer; 0 means "same as the victim".
  std::size_t detector_logits = 0;
  nn::OptimizerKind optimizer = nn::OptimizerKind::adam;
  /// When false the inner loop is skipped and the whole poisoned
  /// mini-batch is used for the maximization step.
  bool concentrate = true;
  /// Standardize victim features with base-set statistics before the
  /// weight net sees them.
  bool standardize_features = true;
  std::uint64_t seed = 0;

  static constexpr double kLabeledOuterStep = 1e-3;
  static constexpr double kUnlabeledOuterStep = 3e-4;

  double effective_outer_step() const;
  void validate() const;
};

/// Value of the maximization loss for one row. The label is required in
/// labeled mode and ignored otherwise.
double select_max_loss(LossMode mode, std::span<const double> logits,
                       std::optional<std::size_t> label = std::nullopt);
nn::LossAndGrad max_loss_and_grad(LossMode mode, std::span<const double> logits,
                                  std::optional<std::size_t> label);

/// Per-column affine map fitted on base-set features: (x - mean) / (sd + floor).
/// Columns that are constant on clean data keep a finite scale.
class FeatureScaler {
 public:
  static constexpr double kScaleFloor = 1e-3;

  static FeatureScaler fit(const Matrix& base_features);
  static FeatureScaler identity(std::size_t dim);

  Matrix apply(const Matrix& features) const;

 private:
  std::vector<double> mean_;
  std::vector<double> inv_scale_;
};

/// Small scorer mapping victim features to a poison confidence in (0, 1):
/// feature_dim -> 128 -> 1 with a sigmoid on the output.
class WeightNet {
 public:
  static constexpr std::size_t kHiddenWidth = 128;

  static WeightNet random(std::size_t feature_dim, Rng& rng);

  std::vector<double> scores(const Matrix& features) const;
  /// One descent step on mean BCE toward `target` (0 or 1).
  void step(const Matrix& features, int target, nn::OptimizerState& state);

  const nn::MlpModel& model() const noexcept { return net_; }
  nn::MlpModel& model() noexcept { return net_; }

 private:
  explicit WeightNet(nn::MlpModel net) : net_(std::move(net)) {}
  nn::MlpModel net_;
};

/// Inner offset loop on precomputed victim features. Returns the rows of
/// `poison_features` whose score is an upper-side AO outlier (AO >= lambda).
std::vector<std::size_t> poison_concentration(const Matrix& poison_features,
                                              const Matrix& base_features,
                                              const AssetConfig& config, Rng& rng);

/// Same, starting from raw samples and the poisoned victim; features are
/// standardized with the base batch's statistics and the weight net is
/// initialized from config.seed.
std::vector<std::size_t> poison_concentration(const nn::MlpModel& victim, const Matrix& poison_batch,
                                              const Matrix& base_batch, const AssetConfig& config);

struct DetectionReport {
  /// Final maximization loss for every sample of the poisoned set.
  std::vector<double> losses;
  /// Ascending indices into the poisoned set.
  std::vector<std::size_t> flagged;
  stats::GaussianFit fit;
  /// Size of the concentrated batch at each outer iteration.
  std::vector<std::size_t> concentrated_sizes;
  AssetConfig config;
  double elapsed_seconds = 0.0;
};

/// Full nested-offset detection. `victim` supplies features to the inner
/// loop; the detector itself is a fresh MLP with the victim's hidden
/// shape. Labels of `base` are never read.
DetectionReport asset_detect(const nn::MlpModel& victim, const LabeledDataset& poisoned,
                             const LabeledDataset& base, const AssetConfig& config);

/// Trained detector plus report; used by the adaptive attack, which needs
/// the detector parameters.
struct DetectionRun {
  DetectionReport report;
  nn::MlpModel detector;
};
DetectionRun asset_detect_with_model(const nn::MlpModel& victim, const LabeledDataset& poisoned,
                                     const LabeledDataset& base, const AssetConfig& config);

}  // namespace offset::detect
