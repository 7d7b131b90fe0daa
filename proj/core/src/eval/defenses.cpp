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

#include "offset/eval/defenses.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>

#include "offset/errors.hpp"
#include "offset/nn/train.hpp"

namespace offset::eval {

std::vector<std::size_t> spectral_baseline(const nn::MlpModel& victim, const LabeledDataset& poisoned,
                                           double expected_ratio) {
  if (!poisoned.labels) throw MissingLabelsError("spectral baseline needs labels");
  if (!(expected_ratio >= 0.0)) throw ConfigError("expected ratio must be non-negative");
  const Matrix feats = nn::penultimate_features(victim, poisoned.features);
  const auto& labels = *poisoned.labels;

  std::vector<std::size_t> flagged;
  for (std::size_t c = 0; c < poisoned.num_classes; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == c) members.push_back(i);
    }
    if (members.size() < 2) {
      if (!members.empty()) {
        std::cerr << "spectral: class " << c << " has fewer than 2 samples, skipped\n";
      }
      continue;
    }
    const auto removal = static_cast<std::size_t>(
        std::floor(1.5 * expected_ratio * static_cast<double>(members.size()) + 1e-9));
    if (removal == 0) continue;

    Eigen::MatrixXd x(static_cast<Eigen::Index>(members.size()),
                      static_cast<Eigen::Index>(feats.cols()));
    for (std::size_t r = 0; r < members.size(); ++r) {
      for (std::size_t j = 0; j < feats.cols(); ++j) {
        x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = feats(members[r], j);
      }
    }
    x.rowwise() -= x.colwise().mean();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinV);
    const Eigen::VectorXd top = svd.matrixV().col(0);
    const Eigen::VectorXd proj = x * top;

    std::vector<std::size_t> order(members.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double sa = proj(static_cast<Eigen::Index>(a)) * proj(static_cast<Eigen::Index>(a));
      const double sb = proj(static_cast<Eigen::Index>(b)) * proj(static_cast<Eigen::Index>(b));
      return sa > sb;
    });
    for (std::size_t r = 0; r < std::min(removal, order.size()); ++r) {
      flagged.push_back(members[order[r]]);
    }
  }
  std::sort(flagged.begin(), flagged.end());
  return flagged;
}

nn::MlpModel unlearn(nn::MlpModel victim, const LabeledDataset& poisoned,
                     std::span<const std::size_t> flagged, const UnlearnConfig& config, Rng& rng) {
  if (!poisoned.labels) throw MissingLabelsError("unlearning needs labels");
  if (flagged.empty()) {
    std::cerr << "unlearn: no flagged samples, model left unchanged\n";
    return victim;
  }
  std::vector<bool> is_flagged(poisoned.size(), false);
  for (std::size_t i : flagged) {
    if (i >= poisoned.size()) throw IndexError("flagged index outside the dataset");
    is_flagged[i] = true;
  }
  std::vector<std::size_t> keep;
  std::vector<std::size_t> drop;
  for (std::size_t i = 0; i < poisoned.size(); ++i) (is_flagged[i] ? drop : keep).push_back(i);

  auto descend_state = nn::OptimizerState::create(config.optimizer, config.learning_rate, victim);
  auto ascend_state = nn::OptimizerState::create(config.optimizer, config.learning_rate, victim);
  for (std::size_t e = 0; e < config.epochs; ++e) {
    nn::ce_epoch(victim, poisoned.features, *poisoned.labels, keep, config.batch_size,
                 descend_state, rng, nn::Direction::descend);
    nn::ce_epoch(victim, poisoned.features, *poisoned.labels, drop, config.batch_size,
                 ascend_state, rng, nn::Direction::ascend);
  }
  return victim;
}

}  // namespace offset::eval
