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

#include "offset/eval/experiment.hpp"

#include <algorithm>
#include <cstdlib>
#include <mutex>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

#include "offset/errors.hpp"

namespace offset::eval {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

enum Stream : std::uint64_t {
  kTask = 1,
  kTrain,
  kBase,
  kTest,
  kPretrain,
  kPoison,
  kVictim,
  kPretrainModel,
  kDetector,
  kAttackerDetector,
  kRetrain,
  kUnlearn,
  kCleanReference,
};

}  // namespace

attacks::TriggerSpec AttackConfig::trigger(std::size_t d) const {
  const std::size_t grid = attacks::grid_side(d);
  switch (kind) {
    case AttackKind::blend:
      return attacks::TriggerSpec::noise_blend(d, blend_alpha, pattern_seed);
    case AttackKind::none:
    case AttackKind::badnets:
    case AttackKind::clean_label:
      break;
  }
  return attacks::TriggerSpec::corner_patch(grid, patch_size, patch_value);
}

void ExperimentSpec::validate() const {
  asset.validate();
  victim.train.validate();
  if (data.k < 2) throw ConfigError("need at least 2 classes");
  attacks::grid_side(data.d);
  if (data.train_size < 4 * data.k) throw ConfigError("training split too small");
  if (data.base_size < data.k) throw ConfigError("base set must hold at least one sample per class");
  if (data.test_size < data.k) throw ConfigError("test split too small");
  if (attack.target_class >= data.k) throw ConfigError("target class out of range");
  if (attack.kind != AttackKind::clean_label && attack.ratio > 0.5) {
    throw ThreatModelError("poison ratio above 0.5 violates the threat model");
  }
  if (!(attack.ratio >= 0.0)) throw ConfigError("poison ratio must be non-negative");
  if ((case_tag == CaseTag::case2_ft_all || case_tag == CaseTag::case2_ft_last) &&
      data.pretrain_size < data.k) {
    throw ConfigError("case2 needs a pretrain split");
  }
  if (case_tag == CaseTag::case1_unlabeled && defense == DefenseKind::spectral) {
    throw ConfigError("the spectral baseline needs labels and cannot run in case1");
  }
  if (victim.hidden.empty()) throw ConfigError("victim needs at least one hidden layer");
  if (trials < 1) throw ConfigError("trials must be at least 1");
}

detect::AssetConfig ExperimentSpec::effective_asset(std::uint64_t trial_seed) const {
  detect::AssetConfig cfg = asset;
  if (case_tag == CaseTag::case1_unlabeled) cfg.mode = detect::LossMode::unlabeled;
  cfg.seed = derive_seed(trial_seed, kDetector);
  return cfg;
}

namespace {

bool is_case2(CaseTag tag) { return tag == CaseTag::case2_ft_all || tag == CaseTag::case2_ft_last; }

std::vector<std::size_t> victim_dims(const ExperimentSpec& spec) {
  std::vector<std::size_t> dims{spec.data.d};
  dims.insert(dims.end(), spec.victim.hidden.begin(), spec.victim.hidden.end());
  dims.push_back(spec.data.k);
  return dims;
}

LabeledDataset apply_attack(const ExperimentSpec& spec, const LabeledDataset& train,
                            std::uint64_t seed) {
  const auto& a = spec.attack;
  if (a.kind == AttackKind::none || a.ratio == 0.0) {
    LabeledDataset out = train;
    out.poison_mask = std::vector<bool>(train.size(), false);
    out.target_class = a.target_class;
    return out;
  }
  const auto trigger = a.trigger(spec.data.d);
  const std::uint64_t s = derive_seed(seed, kPoison);
  if (a.kind == AttackKind::clean_label) {
    return attacks::poison_clean_label(train, trigger, a.ratio, a.target_class, s);
  }
  return attacks::poison_dirty_label(train, trigger, a.ratio, a.target_class, s);
}

nn::MlpModel fit_fresh(const ExperimentSpec& spec, const LabeledDataset& data, std::uint64_t seed) {
  Rng rng(seed);
  auto model = nn::MlpModel::random(victim_dims(spec), rng);
  return nn::train_supervised(std::move(model), data, spec.victim.train, rng);
}

}  // namespace

nn::MlpModel train_victim(const ExperimentSpec& spec, const Scenario& scenario,
                          const LabeledDataset& data, std::uint64_t seed) {
  if (!is_case2(spec.case_tag)) return fit_fresh(spec, data, seed);
  Rng rng(seed);
  const auto mode =
      spec.case_tag == CaseTag::case2_ft_last ? nn::FineTuneMode::ft_last : nn::FineTuneMode::ft_all;
  return nn::fine_tune(*scenario.pretrained, data, mode, spec.victim.train, rng);
}

Scenario build_scenario(const ExperimentSpec& spec, std::uint64_t seed) {
  spec.validate();
  const auto& dc = spec.data;
  Rng task_rng(derive_seed(seed, kTask));
  const auto task = attacks::SyntheticTask::create(dc.k, dc.d, dc.noise_sigma, task_rng);
  auto draw = [&](std::size_t n, Stream stream) {
    Rng rng(derive_seed(seed, stream));
    LabeledDataset drawn = task.sample((n + dc.k - 1) / dc.k, rng);
    if (drawn.size() == n) return drawn;
    std::vector<std::size_t> head(n);
    std::iota(head.begin(), head.end(), std::size_t{0});
    return drawn.subset(head);
  };

  Scenario sc;
  sc.train_clean = draw(dc.train_size, kTrain);
  sc.base = draw(dc.base_size, kBase).without_labels();
  sc.test = draw(dc.test_size, kTest);
  sc.poisoned = apply_attack(spec, sc.train_clean, seed);
  sc.triggered_test =
      attacks::triggered_test_set(sc.test, spec.attack.trigger(dc.d), spec.attack.target_class);
  if (is_case2(spec.case_tag)) {
    sc.pretrain = draw(dc.pretrain_size, kPretrain);
    sc.pretrained = fit_fresh(spec, *sc.pretrain, derive_seed(seed, kPretrainModel));
  }
  sc.victim = train_victim(spec, sc, sc.poisoned, derive_seed(seed, kVictim));
  return sc;
}

ExperimentResult run_trial(const ExperimentSpec& spec, std::uint64_t seed) {
  Scenario sc = build_scenario(spec, seed);
  const detect::AssetConfig asset_cfg = spec.effective_asset(seed);

  if (spec.adaptive) {
    // The attacker knows the whole defense: it trains its own detector on
    // the poisoned data, disguises every poison against it, and the victim
    // is trained again on the disguised data.
    auto attacker_cfg = asset_cfg;
    attacker_cfg.seed = derive_seed(seed, kAttackerDetector);
    const auto attacker = detect::asset_detect_with_model(sc.victim, sc.poisoned, sc.base, attacker_cfg);
    sc.poisoned = attacks::adaptive_poison(sc.poisoned, attacker.detector, attacker_cfg.mode,
                                           *spec.adaptive);
    sc.victim = train_victim(spec, sc, sc.poisoned, derive_seed(seed, kVictim));
  }

  // The detector sees neither the mask nor, in Case-1, the labels.
  LabeledDataset defender_view = sc.poisoned.without_mask();
  if (asset_cfg.mode == detect::LossMode::unlabeled) defender_view = defender_view.without_labels();

  ExperimentResult result;
  result.seed = seed;
  switch (spec.defense) {
    case DefenseKind::asset:
      result.report = detect::asset_detect(sc.victim, defender_view, sc.base, asset_cfg);
      result.flagged = result.report.flagged;
      break;
    case DefenseKind::spectral:
      result.flagged = spectral_baseline(sc.victim, defender_view, spec.spectral_expected_ratio);
      break;
    case DefenseKind::none:
      break;
  }

  nn::MlpModel downstream;
  if (spec.unlearn) {
    Rng rng(derive_seed(seed, kUnlearn));
    downstream = unlearn(sc.victim, sc.poisoned, result.flagged, *spec.unlearn, rng);
  } else {
    downstream = train_victim(spec, sc, sc.poisoned.without_rows(result.flagged),
                              derive_seed(seed, kRetrain));
  }
  result.metrics = compute_metrics(result.flagged, sc.poisoned, downstream, sc.test, sc.triggered_test);
  result.metrics.victim_acc = nn::accuracy(sc.victim, sc.test.features, *sc.test.labels);
  result.metrics.victim_asr =
      attack_success_rate(sc.victim, sc.triggered_test, spec.attack.target_class);
  if (spec.clean_reference) {
    const auto clean = train_victim(spec, sc, sc.train_clean, derive_seed(seed, kCleanReference));
    result.metrics.clean_acc = nn::accuracy(clean, sc.test.features, *sc.test.labels);
  }
  return result;
}

ExperimentResult run_experiment(const ExperimentSpec& spec) { return run_trial(spec, spec.seed); }

std::size_t worker_threads() {
  if (const char* env = std::getenv("OFFSET_DETECT_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
      // fall through to the hardware default
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<ExperimentResult> run_trials(const ExperimentSpec& spec) {
  spec.validate();
  std::vector<ExperimentResult> results(spec.trials);
  const std::size_t workers = std::min(worker_threads(), spec.trials);
  if (workers <= 1) {
    for (std::size_t t = 0; t < spec.trials; ++t) results[t] = run_trial(spec, spec.seed + t);
    return results;
  }
  std::mutex mu;
  std::size_t next = 0;
  std::exception_ptr failure;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        std::size_t t = 0;
        {
          std::lock_guard lock(mu);
          if (next >= spec.trials || failure) return;
          t = next++;
        }
        try {
          results[t] = run_trial(spec, spec.seed + t);
        } catch (...) {
          std::lock_guard lock(mu);
          failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return results;
}

}  // namespace offset::eval
