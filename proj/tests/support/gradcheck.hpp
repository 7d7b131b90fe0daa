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

// Central finite differences of independently written losses through the
// naive forward pass in oracles.hpp, compared against the library's
// analytic loss gradients and backward pass.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "offset/nn/losses.hpp"
#include "offset/nn/mlp.hpp"
#include "offset/rng.hpp"
#include "oracles.hpp"

namespace gradcheck {

enum class Loss { var, ce, bce };

inline std::string name(Loss loss) {
  switch (loss) {
    case Loss::var: return "var";
    case Loss::ce: return "ce";
    default: return "bce";
  }
}

/// Mean per-row loss of the oracle logits. BCE reads a single logit as the
/// pre-sigmoid score; labels are 0/1 targets there.
inline double oracle_loss(Loss loss, const offset::Matrix& logits,
                          const std::vector<std::size_t>& labels) {
  double total = 0.0;
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const auto f = logits.row(r);
    if (loss == Loss::var) {
      double mean = 0.0;
      for (double v : f) mean += v;
      mean /= static_cast<double>(f.size());
      double s = 0.0;
      for (double v : f) s += (v - mean) * (v - mean);
      total += s / static_cast<double>(f.size());
    } else if (loss == Loss::ce) {
      double top = f[0];
      for (double v : f) top = std::max(top, v);
      double z = 0.0;
      for (double v : f) z += std::exp(v - top);
      total += top + std::log(z) - f[labels[r]];
    } else {
      const double q = 1.0 / (1.0 + std::exp(-f[0]));
      total += labels[r] == 1 ? -std::log(q) : -std::log(1.0 - q);
    }
  }
  return total / static_cast<double>(logits.rows());
}

/// Library per-row upstream gradients wrt the logits.
inline offset::Matrix upstream(Loss loss, const offset::Matrix& logits,
                               const std::vector<std::size_t>& labels) {
  if (loss == Loss::var) return offset::nn::batch_loss_var(logits).grad;
  if (loss == Loss::ce) return offset::nn::batch_loss_ce(logits, labels).grad;
  offset::Matrix g(logits.rows(), 1);
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const double q = offset::nn::sigmoid(logits(r, 0));
    g(r, 0) = offset::nn::loss_bce(q, static_cast<int>(labels[r])).grad_score;
  }
  return g;
}

struct Outcome {
  std::size_t checked = 0;
  std::size_t skipped_kinks = 0;
  double worst_relative_error = 0.0;
};

/// Relative error with a small absolute floor so exactly-zero gradients
/// compare sanely.
inline double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-6});
}

/// Checks every parameter coordinate and every input coordinate of a
/// random two-layer MLP (in -> hidden -> out).
inline Outcome check(Loss loss, std::size_t in, std::size_t hidden, std::size_t out,
                     std::size_t batch, std::uint64_t seed, double h = 1e-5) {
  offset::Rng rng(seed);
  auto model = offset::nn::MlpModel::random({in, hidden, out}, rng);
  offset::Matrix x(batch, in);
  for (double& v : x.values()) v = rng.uniform(-1.0, 1.0);
  std::vector<std::size_t> labels(batch);
  for (auto& y : labels) y = rng.below(loss == Loss::bce ? 2 : out);

  const auto fwd = offset::nn::forward(model, x);
  const auto back = offset::nn::backward(model, fwd.cache, upstream(loss, fwd.logits, labels));
  const auto pattern = oracle::relu_pattern(model, x);

  Outcome res;
  auto probe = [&](double& slot, double analytic, const std::function<double()>& eval,
                   const std::function<std::vector<bool>()>& kinks) {
    const double saved = slot;
    slot = saved + h;
    const double up = eval();
    const auto pu = kinks();
    slot = saved - h;
    const double down = eval();
    const auto pd = kinks();
    slot = saved;
    if (pu != pattern || pd != pattern) {
      ++res.skipped_kinks;
      return;
    }
    const double numeric = (up - down) / (2.0 * h);
    res.worst_relative_error = std::max(res.worst_relative_error, relative_error(analytic, numeric));
    ++res.checked;
  };

  auto eval_model = [&] { return oracle_loss(loss, oracle::logits(model, x), labels); };
  auto kinks_model = [&] { return oracle::relu_pattern(model, x); };
  for (std::size_t l = 0; l < model.layer_count(); ++l) {
    auto& layer = model.layer(l);
    for (std::size_t i = 0; i < layer.in_dim(); ++i)
      for (std::size_t j = 0; j < layer.out_dim(); ++j)
        probe(layer.weight(i, j), back.params.weight[l](i, j), eval_model, kinks_model);
    for (std::size_t j = 0; j < layer.out_dim(); ++j)
      probe(layer.bias[j], back.params.bias[l][j], eval_model, kinks_model);
  }

  // Input gradients are per row and not averaged, so compare against the
  // batch-mean loss scaled back by the batch size.
  const double scale = static_cast<double>(batch);
  auto eval_input = [&] { return scale * oracle_loss(loss, oracle::logits(model, x), labels); };
  auto kinks_input = [&] { return oracle::relu_pattern(model, x); };
  for (std::size_t r = 0; r < batch; ++r)
    for (std::size_t c = 0; c < in; ++c) probe(x(r, c), back.input(r, c), eval_input, kinks_input);
  return res;
}

}  // namespace gradcheck
