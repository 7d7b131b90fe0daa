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

#include "offset/nn/optimizer.hpp"

#include <cmath>
#include <string>

#include "offset/errors.hpp"

namespace offset::nn {

OptimizerState OptimizerState::create(OptimizerKind kind, double step_size, const MlpModel& model) {
  if (!(step_size > 0.0)) throw ConfigError("optimizer step size must be positive");
  OptimizerState state;
  state.kind = kind;
  state.step_size = step_size;
  if (kind == OptimizerKind::adam) {
    state.first_moment = ParamGradients::zeros_like(model);
    state.second_moment = ParamGradients::zeros_like(model);
  }
  return state;
}

namespace {

bool finite(std::span<const double> xs) {
  for (double x : xs) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace

void optimizer_step(MlpModel& model, OptimizerState& state, const ParamGradients& grads,
                    Direction direction, std::size_t first_trainable_layer) {
  const std::size_t n_layers = model.layer_count();
  if (grads.weight.size() != n_layers || grads.bias.size() != n_layers) {
    throw DimensionError("gradient layer count does not match model");
  }
  for (std::size_t l = first_trainable_layer; l < n_layers; ++l) {
    const auto& layer = model.layer(l);
    if (grads.weight[l].rows() != layer.in_dim() || grads.weight[l].cols() != layer.out_dim() ||
        grads.bias[l].size() != layer.out_dim()) {
      throw DimensionError("gradient shape mismatch at layer " + std::to_string(l));
    }
    if (!finite(grads.weight[l].values()) || !finite(grads.bias[l])) {
      throw NumericError("non-finite gradient", l);
    }
  }
  if (state.kind == OptimizerKind::adam && state.first_moment.weight.size() != n_layers) {
    throw DimensionError("optimizer moments do not match model");
  }

  const double sign = direction == Direction::descend ? -1.0 : 1.0;
  ++state.steps;

  if (state.kind == OptimizerKind::sgd) {
    const double lr = state.step_size;
    for (std::size_t l = first_trainable_layer; l < n_layers; ++l) {
      auto w = model.layer(l).weight.values();
      auto g = grads.weight[l].values();
      for (std::size_t i = 0; i < w.size(); ++i) w[i] += sign * lr * g[i];
      auto& b = model.layer(l).bias;
      for (std::size_t i = 0; i < b.size(); ++i) b[i] += sign * lr * grads.bias[l][i];
    }
    return;
  }

  const double t = static_cast<double>(state.steps);
  const double corr1 = 1.0 - std::pow(state.beta1, t);
  const double corr2 = 1.0 - std::pow(state.beta2, t);
  // Moments track the descent direction, so an ascent step feeds -g. With a
  // fresh state this is exactly theta + update; with a state shared between
  // descent and ascent calls the moments stay coherent.
  auto adam = [&](std::span<double> param, std::span<const double> grad, std::span<double> m,
                  std::span<double> v) {
    for (std::size_t i = 0; i < param.size(); ++i) {
      const double g = -sign * grad[i];
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g;
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g * g;
      const double m_hat = m[i] / corr1;
      const double v_hat = v[i] / corr2;
      param[i] -= state.step_size * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  };
  for (std::size_t l = first_trainable_layer; l < n_layers; ++l) {
    adam(model.layer(l).weight.values(), grads.weight[l].values(),
         state.first_moment.weight[l].values(), state.second_moment.weight[l].values());
    adam(model.layer(l).bias, grads.bias[l], state.first_moment.bias[l],
         state.second_moment.bias[l]);
  }
}

}  // namespace offset::nn
