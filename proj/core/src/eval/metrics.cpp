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

#include "offset/eval/metrics.hpp"

#include "offset/errors.hpp"
#include "offset/nn/train.hpp"

namespace offset::eval {

Metrics detection_metrics(std::span<const std::size_t> flagged, const std::vector<bool>& mask) {
  std::vector<bool> hit(mask.size(), false);
  for (std::size_t i : flagged) {
    if (i >= mask.size()) throw IndexError("flagged index outside the dataset");
    hit[i] = true;
  }
  Metrics m;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) {
      hit[i] ? ++m.tp : ++m.fn;
    } else {
      hit[i] ? ++m.fp : ++m.tn;
    }
  }
  m.tpr = m.tp + m.fn > 0 ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn) : 0.0;
  m.fpr = m.fp + m.tn > 0 ? static_cast<double>(m.fp) / static_cast<double>(m.fp + m.tn) : 0.0;
  m.remaining_poisons = m.fn;
  return m;
}

double attack_success_rate(const nn::MlpModel& model, const LabeledDataset& triggered,
                           std::size_t target_class) {
  if (triggered.size() == 0) return 0.0;
  const auto pred = nn::predict(model, triggered.features);
  std::size_t hits = 0;
  for (std::size_t p : pred) hits += p == target_class;
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

Metrics compute_metrics(std::span<const std::size_t> flagged, const LabeledDataset& poisoned,
                        const nn::MlpModel& downstream, const LabeledDataset& clean_test,
                        const LabeledDataset& triggered_test) {
  if (!poisoned.poison_mask) throw HarnessError("metrics need the ground-truth poison mask");
  if (!clean_test.labels) throw MissingLabelsError("clean test set needs labels");
  Metrics m = detection_metrics(flagged, *poisoned.poison_mask);
  m.acc = nn::accuracy(downstream, clean_test.features, *clean_test.labels);
  const std::size_t target = triggered_test.target_class.value_or(poisoned.target_class.value_or(0));
  m.asr = attack_success_rate(downstream, triggered_test, target);
  return m;
}

Metrics aggregate(std::span<const Metrics> runs) {
  Metrics out;
  if (runs.empty()) return out;
  const double n = static_cast<double>(runs.size());
  double clean = 0.0;
  bool have_clean = true;
  for (const auto& r : runs) {
    out.tp += r.tp;
    out.fp += r.fp;
    out.tn += r.tn;
    out.fn += r.fn;
    out.remaining_poisons += r.remaining_poisons;
    out.tpr += r.tpr / n;
    out.fpr += r.fpr / n;
    out.asr += r.asr / n;
    out.acc += r.acc / n;
    out.victim_asr += r.victim_asr / n;
    out.victim_acc += r.victim_acc / n;
    if (r.clean_acc) {
      clean += *r.clean_acc / n;
    } else {
      have_clean = false;
    }
  }
  if (have_clean) out.clean_acc = clean;
  return out;
}

}  // namespace offset::eval
