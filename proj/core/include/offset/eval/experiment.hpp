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
#include <vector>

#include "offset/attacks/attacks.hpp"
#include "offset/detect/asset.hpp"
#include "offset/eval/defenses.hpp"
#include "offset/eval/metrics.hpp"
#include "offset/nn/train.hpp"

namespace offset::eval {

enum class AttackKind { none, badnets, blend, clean_label };
enum class CaseTag { case0, case1_unlabeled, case2_ft_all, case2_ft_last };
enum class DefenseKind { asset, spectral, none };

struct AttackConfig {
  AttackKind kind = AttackKind::badnets;
  /// Fraction of the training set for dirty-label attacks; fraction of the
  /// target class for the clean-label attack.
  double ratio = 0.05;
  std::size_t target_class = 0;
  std::size_t patch_size = 3;
  double patch_value = 1.0;
  double blend_alpha = 0.2;
  std::uint64_t pattern_seed = 7;

  attacks::TriggerSpec trigger(std::size_t d) const;
};

struct DataConfig {
  std::size_t k = 4;
  std::size_t d = 64;
  /// Exact split sizes; classes are filled round-robin, so they differ by
  /// at most one sample when a size is not a multiple of k.
  std::size_t train_size = 2000;
  std::size_t base_size = 1000;
  std::size_t test_size = 1000;
  std::size_t pretrain_size = 1000;
  double noise_sigma = 0.1;
};

struct VictimConfig {
  std::vector<std::size_t> hidden{64};
  nn::TrainConfig train{};
};

struct ExperimentSpec {
  AttackConfig attack;
  DataConfig data;
  VictimConfig victim;
  detect::AssetConfig asset;
  CaseTag case_tag = CaseTag::case0;
  DefenseKind defense = DefenseKind::asset;
  /// Poison ratio handed to the Spectral baseline (ASSET never sees it).
  double spectral_expected_ratio = 0.05;
  /// Unlearn on the flagged samples instead of retraining on the filtered set.
  std::optional<UnlearnConfig> unlearn;
  /// White-box adaptive attack: perturb poisons against a detector trained
  /// by the attacker on the same pipeline before the defender runs.
  std::optional<attacks::AdaptiveConfig> adaptive;
  /// Also train on the un-poisoned split to report clean_acc.
  bool clean_reference = false;
  std::size_t trials = 1;
  std::uint64_t seed = 0;

  /// Case-1 forces unlabeled detection; called before any compute.
  void validate() const;
  /// Effective detector config after case rules are applied.
  detect::AssetConfig effective_asset(std::uint64_t trial_seed) const;
};

struct ExperimentResult {
  Metrics metrics;
  detect::DetectionReport report;
  std::vector<std::size_t> flagged;
  std::uint64_t seed = 0;
};

/// The data splits and models of one trial, exposed for harness code that
/// wants to run its own detector variants on the same setup.
struct Scenario {
  LabeledDataset train_clean;
  LabeledDataset poisoned;
  LabeledDataset base;
  LabeledDataset test;
  LabeledDataset triggered_test;
  std::optional<LabeledDataset> pretrain;
  std::optional<nn::MlpModel> pretrained;
  nn::MlpModel victim;
};

/// Builds data, applies the attack, and trains the victim for one seed.
Scenario build_scenario(const ExperimentSpec& spec, std::uint64_t seed);

/// Trains a downstream model with the experiment's victim recipe on `data`
/// (fine-tuning from the pretrained model in Case-2).
nn::MlpModel train_victim(const ExperimentSpec& spec, const Scenario& scenario,
                          const LabeledDataset& data, std::uint64_t seed);

/// One full trial: poison, train victim, detect, filter or unlearn,
/// retrain, measure.
ExperimentResult run_experiment(const ExperimentSpec& spec);
ExperimentResult run_trial(const ExperimentSpec& spec, std::uint64_t seed);

/// spec.trials independent trials with seeds spec.seed + t, fanned out over
/// worker threads (capped by OFFSET_DETECT_THREADS).
std::vector<ExperimentResult> run_trials(const ExperimentSpec& spec);

/// Worker count from OFFSET_DETECT_THREADS, else hardware concurrency.
std::size_t worker_threads();

/// Splitmix-style seed derivation for independent sub-streams.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace offset::eval
