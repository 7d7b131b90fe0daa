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
#include <vector>

#include "offset/matrix.hpp"
#include "offset/rng.hpp"

namespace offset::nn {

/// Fully connected layer. `weight` is stored input-major (in x out) so that
/// forward and backward inner loops both walk contiguous memory.
struct DenseLayer {
  Matrix weight;
  std::vector<double> bias;

  std::size_t in_dim() const noexcept { return weight.rows(); }
  std::size_t out_dim() const noexcept { return weight.cols(); }

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// Multi-layer perceptron: ReLU on every hidden layer, identity on the
/// output. Losses own their own output nonlinearity.
class MlpModel {
 public:
  MlpModel() = default;

  /// Weights and biases drawn from U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
  static MlpModel random(std::vector<std::size_t> dims, Rng& rng);
  static MlpModel zeros(std::vector<std::size_t> dims);
  /// Adopts existing layers; validates the shape chain.
  static MlpModel from_layers(std::vector<DenseLayer> layers);

  const std::vector<std::size_t>& dims() const noexcept { return dims_; }
  std::size_t input_dim() const noexcept { return dims_.front(); }
  std::size_t output_dim() const noexcept { return dims_.back(); }
  std::size_t layer_count() const noexcept { return layers_.size(); }
  std::size_t parameter_count() const noexcept;

  DenseLayer& layer(std::size_t i) { return layers_[i]; }
  const DenseLayer& layer(std::size_t i) const { return layers_[i]; }
  std::vector<DenseLayer>& layers() noexcept { return layers_; }
  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }

  bool all_finite() const noexcept;

  friend bool operator==(const MlpModel&, const MlpModel&) = default;

 private:
  explicit MlpModel(std::vector<std::size_t> dims);

  std::vector<std::size_t> dims_;
  std::vector<DenseLayer> layers_;
};

/// Everything backward() needs: the input seen by each layer and each
/// layer's pre-activation output.
struct ForwardCache {
  std::vector<Matrix> inputs;
  std::vector<Matrix> pre_activations;
};

struct ForwardResult {
  Matrix logits;
  ForwardCache cache;
};

ForwardResult forward(const MlpModel& model, const Matrix& batch);

/// Forward pass without keeping the cache.
Matrix logits(const MlpModel& model, const Matrix& batch);

/// Post-ReLU activations of the last hidden layer.
Matrix penultimate_features(const MlpModel& model, const Matrix& batch);

/// Same shapes as the model's parameters.
struct ParamGradients {
  std::vector<Matrix> weight;
  std::vector<std::vector<double>> bias;

  static ParamGradients zeros_like(const MlpModel& model);
};

struct BackwardResult {
  /// Mean over the batch rows.
  ParamGradients params;
  /// Row r holds d(loss_r)/d(input_r); not divided by the batch size.
  Matrix input;
};

/// `upstream` row r is the gradient of sample r's loss wrt its logits.
BackwardResult backward(const MlpModel& model, const ForwardCache& cache, const Matrix& upstream);

}  // namespace offset::nn
