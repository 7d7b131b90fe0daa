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

#include "offset/matrix.hpp"

namespace offset::nn {

/// Loss value for one sample together with its gradient wrt the logits.
struct LossAndGrad {
  double value = 0.0;
  std::vector<double> grad;
};

/// Population variance of the logits: (1/k) sum (f_i - mean)^2.
LossAndGrad loss_var(std::span<const double> logits);

/// -log softmax(f)[label], evaluated with log-sum-exp.
LossAndGrad loss_ce(std::span<const double> logits, std::size_t label);

struct BceAndGrad {
  double value = 0.0;
  /// Gradient wrt the pre-sigmoid score, i.e. q - p.
  double grad_score = 0.0;
};

/// Standard binary cross entropy -(p log q + (1-p) log(1-q)); q is clamped
/// to [1e-12, 1 - 1e-12] before the logs.
BceAndGrad loss_bce(double q, int target);

double sigmoid(double score);
std::vector<double> softmax(std::span<const double> logits);

/// Index of the largest logit; ties go to the lowest index.
std::size_t argmax(std::span<const double> logits);

/// Per-row loss values and the stacked per-row gradients, ready to feed
/// into backward().
struct BatchLoss {
  std::vector<double> values;
  Matrix grad;
};

BatchLoss batch_loss_var(const Matrix& logits);
BatchLoss batch_loss_ce(const Matrix& logits, std::span<const std::size_t> labels);

}  // namespace offset::nn
