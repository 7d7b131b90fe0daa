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

#include "offset/nn/mlp.hpp"

namespace offset::nn {

enum class OptimizerKind { sgd, adam };
enum class Direction { descend, ascend };

struct OptimizerState {
  OptimizerKind kind = OptimizerKind::adam;
  double step_size = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t steps = 0;
  ParamGradients first_moment;
  ParamGradients second_moment;

  static OptimizerState create(OptimizerKind kind, double step_size, const MlpModel& model);
};

/// One update. Layers below `first_trainable_layer` are left untouched
/// (their moments are not advanced either). Ascend adds the update where
/// descend subtracts it.
void optimizer_step(MlpModel& model, OptimizerState& state, const ParamGradients& grads,
                    Direction direction, std::size_t first_trainable_layer = 0);

}  // namespace offset::nn
