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

#include "offset/nn/mlp.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "offset/errors.hpp"

namespace offset::nn {
namespace {

void check_dims(const std::vector<std::size_t>& dims) {
  if (dims.size() < 2) throw DimensionError("an MLP needs at least input and output dims");
  for (std::size_t d : dims) {
    if (d == 0) throw DimensionError("MLP layer dims must be positive");
  }
}

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

ConstMap view(const Matrix& m) {
  return ConstMap(m.values().data(), static_cast<Eigen::Index>(m.rows()),
                  static_cast<Eigen::Index>(m.cols()));
}

MutMap view(Matrix& m) {
  return MutMap(m.values().data(), static_cast<Eigen::Index>(m.rows()),
                static_cast<Eigen::Index>(m.cols()));
}

// out = x * W + b
void dense_forward(const DenseLayer& layer, const Matrix& x, Matrix& out) {
  out = Matrix(x.rows(), layer.out_dim());
  const Eigen::Map<const Eigen::RowVectorXd> bias(layer.bias.data(),
                                                  static_cast<Eigen::Index>(layer.bias.size()));
  auto o = view(out);
  o.noalias() = view(x) * view(layer.weight);
  o.rowwise() += bias;
}

Matrix relu(const Matrix& m) {
  Matrix out = m;
  for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
  return out;
}

}  // namespace

MlpModel::MlpModel(std::vector<std::size_t> dims) : dims_(std::move(dims)) {}

MlpModel MlpModel::zeros(std::vector<std::size_t> dims) {
  check_dims(dims);
  MlpModel model(std::move(dims));
  for (std::size_t l = 0; l + 1 < model.dims_.size(); ++l) {
    model.layers_.push_back(
        {Matrix(model.dims_[l], model.dims_[l + 1]), std::vector<double>(model.dims_[l + 1], 0.0)});
  }
  return model;
}

MlpModel MlpModel::random(std::vector<std::size_t> dims, Rng& rng) {
  MlpModel model = zeros(std::move(dims));
  for (DenseLayer& layer : model.layers_) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.in_dim()));
    for (double& w : layer.weight.values()) w = rng.uniform(-bound, bound);
    for (double& b : layer.bias) b = rng.uniform(-bound, bound);
  }
  return model;
}

MlpModel MlpModel::from_layers(std::vector<DenseLayer> layers) {
  if (layers.empty()) throw DimensionError("an MLP needs at least one layer");
  std::vector<std::size_t> dims{layers.front().in_dim()};
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (layers[l].in_dim() != dims.back()) {
      throw DimensionError("layer " + std::to_string(l) + " input dim does not chain");
    }
    if (layers[l].bias.size() != layers[l].out_dim()) {
      throw DimensionError("layer " + std::to_string(l) + " bias length mismatch");
    }
    dims.push_back(layers[l].out_dim());
  }
  check_dims(dims);
  MlpModel model(std::move(dims));
  model.layers_ = std::move(layers);
  return model;
}

std::size_t MlpModel::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const auto& layer : layers_) n += layer.weight.size() + layer.bias.size();
  return n;
}

bool MlpModel::all_finite() const noexcept {
  for (const auto& layer : layers_) {
    if (!layer.weight.all_finite()) return false;
    for (double b : layer.bias) {
      if (!std::isfinite(b)) return false;
    }
  }
  return true;
}

ForwardResult forward(const MlpModel& model, const Matrix& batch) {
  if (batch.cols() != model.input_dim()) {
    throw DimensionError("batch has " + std::to_string(batch.cols()) + " columns, model expects " +
                         std::to_string(model.input_dim()));
  }
  ForwardResult result;
  const std::size_t n_layers = model.layer_count();
  result.cache.inputs.reserve(n_layers);
  result.cache.pre_activations.resize(n_layers);
  result.cache.inputs.push_back(batch);
  for (std::size_t l = 0; l < n_layers; ++l) {
    dense_forward(model.layer(l), result.cache.inputs[l], result.cache.pre_activations[l]);
    if (l + 1 < n_layers) result.cache.inputs.push_back(relu(result.cache.pre_activations[l]));
  }
  result.logits = result.cache.pre_activations.back();
  return result;
}

Matrix logits(const MlpModel& model, const Matrix& batch) {
  if (batch.cols() != model.input_dim()) throw DimensionError("batch/model input dim mismatch");
  Matrix x = batch;
  Matrix pre;
  for (std::size_t l = 0; l < model.layer_count(); ++l) {
    dense_forward(model.layer(l), x, pre);
    if (l + 1 < model.layer_count()) x = relu(pre);
  }
  return pre;
}

Matrix penultimate_features(const MlpModel& model, const Matrix& batch) {
  if (model.layer_count() < 2) {
    throw UnsupportedError("penultimate features need a model with a hidden layer");
  }
  if (batch.cols() != model.input_dim()) throw DimensionError("batch/model input dim mismatch");
  Matrix x = batch;
  Matrix pre;
  for (std::size_t l = 0; l + 1 < model.layer_count(); ++l) {
    dense_forward(model.layer(l), x, pre);
    x = relu(pre);
  }
  return x;
}

ParamGradients ParamGradients::zeros_like(const MlpModel& model) {
  ParamGradients g;
  for (const auto& layer : model.layers()) {
    g.weight.emplace_back(layer.in_dim(), layer.out_dim());
    g.bias.emplace_back(layer.out_dim(), 0.0);
  }
  return g;
}

BackwardResult backward(const MlpModel& model, const ForwardCache& cache, const Matrix& upstream) {
  const std::size_t n_layers = model.layer_count();
  if (cache.inputs.size() != n_layers || cache.pre_activations.size() != n_layers) {
    throw DimensionError("forward cache does not match model depth");
  }
  const std::size_t n = upstream.rows();
  for (std::size_t l = 0; l < n_layers; ++l) {
    const auto& layer = model.layer(l);
    if (cache.inputs[l].cols() != layer.in_dim() || cache.inputs[l].rows() != n ||
        cache.pre_activations[l].cols() != layer.out_dim()) {
      throw DimensionError("stale forward cache at layer " + std::to_string(l));
    }
  }
  if (upstream.cols() != model.output_dim()) {
    throw DimensionError("upstream gradient width does not match model output");
  }

  BackwardResult result;
  result.params = ParamGradients::zeros_like(model);
  const double inv_n = n > 0 ? 1.0 / static_cast<double>(n) : 0.0;

  Matrix grad = upstream;  // gradient wrt pre-activation of layer l
  for (std::size_t l = n_layers; l-- > 0;) {
    const DenseLayer& layer = model.layer(l);
    const auto g = view(grad);
    auto dw = view(result.params.weight[l]);
    dw.noalias() = view(cache.inputs[l]).transpose() * g;
    dw *= inv_n;
    const Eigen::RowVectorXd db = g.colwise().sum() * inv_n;
    std::copy(db.data(), db.data() + db.size(), result.params.bias[l].begin());

    Matrix dx(n, layer.in_dim());
    view(dx).noalias() = g * view(layer.weight).transpose();

    if (l > 0) {
      const Matrix& pre = cache.pre_activations[l - 1];
      for (std::size_t k = 0; k < dx.size(); ++k) {
        if (!(pre.values()[k] > 0.0)) dx.values()[k] = 0.0;
      }
    }
    grad = std::move(dx);
  }
  result.input = std::move(grad);
  return result;
}

}  // namespace offset::nn
