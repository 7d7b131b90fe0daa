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

#include "offset/nn/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "offset/errors.hpp"

namespace offset::nn {

LossAndGrad loss_var(std::span<const double> logits) {
  const std::size_t k = logits.size();
  if (k < 2) throw DimensionError("loss_var needs at least 2 logits");
  double mean = 0.0;
  for (double f : logits) mean += f;
  mean /= static_cast<double>(k);
  LossAndGrad out;
  out.grad.resize(k);
  const double scale = 2.0 / static_cast<double>(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double dev = logits[i] - mean;
    out.value += dev * dev;
    // The mean term's contribution sums to zero, so the gradient is just the
    // scaled deviation.
    out.grad[i] = scale * dev;
  }
  out.value /= static_cast<double>(k);
  return out;
}

std::vector<double> softmax(std::span<const double> logits) {
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - top);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

LossAndGrad loss_ce(std::span<const double> logits, std::size_t label) {
  const std::size_t k = logits.size();
  if (k < 2) throw DimensionError("loss_ce needs at least 2 logits");
  if (label >= k) {
    throw IndexError("label " + std::to_string(label) + " out of range for " + std::to_string(k) +
                     " logits");
  }
  const double top = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double f : logits) sum += std::exp(f - top);
  const double log_z = top + std::log(sum);
  LossAndGrad out;
  out.value = log_z - logits[label];
  out.grad.resize(k);
  for (std::size_t i = 0; i < k; ++i) out.grad[i] = std::exp(logits[i] - log_z);
  out.grad[label] -= 1.0;
  return out;
}

double sigmoid(double score) {
  if (score >= 0.0) return 1.0 / (1.0 + std::exp(-score));
  const double e = std::exp(score);
  return e / (1.0 + e);
}

BceAndGrad loss_bce(double q, int target) {
  const double p = target != 0 ? 1.0 : 0.0;
  const double qc = std::clamp(q, 1e-12, 1.0 - 1e-12);
  return {-(p * std::log(qc) + (1.0 - p) * std::log(1.0 - qc)), q - p};
}

std::size_t argmax(std::span<const double> logits) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < logits.size(); ++i) {
    if (logits[i] > logits[best]) best = i;
  }
  return best;
}

BatchLoss batch_loss_var(const Matrix& logits) {
  BatchLoss out;
  out.values.reserve(logits.rows());
  out.grad = Matrix(logits.rows(), logits.cols());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    auto lg = loss_var(logits.row(r));
    out.values.push_back(lg.value);
    std::copy(lg.grad.begin(), lg.grad.end(), out.grad.row(r).begin());
  }
  return out;
}

BatchLoss batch_loss_ce(const Matrix& logits, std::span<const std::size_t> labels) {
  if (labels.size() != logits.rows()) throw DimensionError("one label per logit row required");
  BatchLoss out;
  out.values.reserve(logits.rows());
  out.grad = Matrix(logits.rows(), logits.cols());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    auto lg = loss_ce(logits.row(r), labels[r]);
    out.values.push_back(lg.value);
    std::copy(lg.grad.begin(), lg.grad.end(), out.grad.row(r).begin());
  }
  return out;
}

}  // namespace offset::nn
