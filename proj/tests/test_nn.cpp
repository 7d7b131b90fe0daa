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

#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "gen.hpp"
#include "gradcheck.hpp"
#include "offset/attacks/attacks.hpp"
#include "offset/errors.hpp"
#include "offset/nn/losses.hpp"
#include "offset/nn/mlp.hpp"
#include "offset/nn/optimizer.hpp"
#include "offset/nn/train.hpp"
#include "oracles.hpp"

using namespace offset;
using doctest::Approx;

namespace {

nn::MlpModel identity_model(std::size_t d) {
  nn::DenseLayer layer;
  layer.weight = Matrix(d, d);
  for (std::size_t i = 0; i < d; ++i) layer.weight(i, i) = 1.0;
  layer.bias.assign(d, 0.0);
  return nn::MlpModel::from_layers({layer});
}

}  // namespace

TEST_CASE("forward: zero model gives zero logits") {
  auto model = nn::MlpModel::zeros({5, 7, 3});
  Rng rng(1);
  auto out = nn::logits(model, gen::matrix(9, 5, rng));
  for (double v : out.values()) CHECK(v == 0.0);
}

TEST_CASE("forward: identity single layer") {
  auto out = nn::logits(identity_model(2), Matrix(1, 2, {1.0, 2.0}));
  CHECK(out(0, 0) == 1.0);
  CHECK(out(0, 1) == 2.0);
}

TEST_CASE("forward: matches naive matmul oracle") {
  Rng rng(0);
  auto model = nn::MlpModel::random({6, 10, 8, 4}, rng);
  auto batch = gen::matrix(13, 6, rng);
  auto got = nn::logits(model, batch);
  auto want = oracle::logits(model, batch);
  REQUIRE(got.rows() == want.rows());
  for (std::size_t i = 0; i < got.size(); ++i) CHECK(got.values()[i] == Approx(want.values()[i]).epsilon(1e-12));
}

TEST_CASE("forward: shape mismatch throws") {
  Rng rng(0);
  auto model = nn::MlpModel::random({4, 3, 2}, rng);
  CHECK_THROWS_AS(nn::logits(model, Matrix(2, 5)), DimensionError);
}

TEST_CASE("penultimate features") {
  SUBCASE("all-negative pre-activations give zeros") {
    auto model = nn::MlpModel::zeros({2, 3, 2});
    for (double& b : model.layer(0).bias) b = -1.0;
    auto h = nn::penultimate_features(model, Matrix(4, 2, 0.5));
    for (double v : h.values()) CHECK(v == 0.0);
  }
  SUBCASE("identity hidden layer passes positive input") {
    auto model = nn::MlpModel::zeros({2, 2, 3});
    model.layer(0).weight(0, 0) = 1.0;
    model.layer(0).weight(1, 1) = 1.0;
    auto h = nn::penultimate_features(model, Matrix(1, 2, {3.0, 4.0}));
    CHECK(h(0, 0) == 3.0);
    CHECK(h(0, 1) == 4.0);
  }
  SUBCASE("matches truncated oracle") {
    Rng rng(0);
    auto model = nn::MlpModel::random({5, 9, 3}, rng);
    auto batch = gen::matrix(7, 5, rng);
    auto got = nn::penultimate_features(model, batch);
    auto want = oracle::hidden(model, batch);
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(got.values()[i] == Approx(want.values()[i]).epsilon(1e-12));
  }
  SUBCASE("single layer is unsupported") {
    CHECK_THROWS_AS(nn::penultimate_features(identity_model(2), Matrix(1, 2)), UnsupportedError);
  }
}

TEST_CASE("loss_var examples") {
  CHECK(nn::loss_var(std::vector<double>{1, 1, 1, 1}).value == 0.0);
  CHECK(nn::loss_var(std::vector<double>{0, 2}).value == Approx(1.0));
  CHECK(nn::loss_var(std::vector<double>{3, 0, 0}).value == Approx(2.0));
}

TEST_CASE("loss_ce examples") {
  CHECK(nn::loss_ce(std::vector<double>(10, 0.3), 4).value == Approx(std::log(10.0)).epsilon(1e-12));
  CHECK(nn::loss_ce(std::vector<double>{0.0, std::log(3.0)}, 0).value == Approx(std::log(4.0)).epsilon(1e-12));
  CHECK(nn::loss_ce(std::vector<double>{30, 0, 0}, 0).value < 1e-9);
  CHECK_THROWS_AS(nn::loss_ce(std::vector<double>{0, 0}, 2), IndexError);
}

TEST_CASE("loss_ce stays finite for huge logits") {
  auto r = nn::loss_ce(std::vector<double>{1e300, -1e300, 0.0}, 1);
  CHECK(std::isfinite(r.value));
}

TEST_CASE("loss_bce examples") {
  CHECK(nn::loss_bce(0.5, 1).value == Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(nn::loss_bce(0.9, 1).value == Approx(-std::log(0.9)).epsilon(1e-12));
  CHECK(nn::loss_bce(0.9, 0).value == Approx(-std::log(0.1)).epsilon(1e-12));
  CHECK(std::isfinite(nn::loss_bce(0.0, 1).value));
  CHECK(std::isfinite(nn::loss_bce(1.0, 0).value));
}

TEST_CASE("gradients match central finite differences") {
  for (auto loss : {gradcheck::Loss::var, gradcheck::Loss::ce, gradcheck::Loss::bce}) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      CAPTURE(gradcheck::name(loss));
      CAPTURE(seed);
      const auto res = gradcheck::check(loss, 6, 10, loss == gradcheck::Loss::bce ? 1 : 4, 8, seed);
      CHECK(res.checked >= 100);
      CHECK(res.worst_relative_error < 1e-4);
    }
  }
}

TEST_CASE("backward examples") {
  Rng rng(3);
  auto model = nn::MlpModel::random({4, 6, 3}, rng);
  auto batch = gen::matrix(5, 4, rng);
  auto fwd = nn::forward(model, batch);

  SUBCASE("zero upstream gives zero gradients") {
    auto back = nn::backward(model, fwd.cache, Matrix(5, 3));
    for (const auto& w : back.params.weight)
      for (double v : w.values()) CHECK(v == 0.0);
    for (const auto& b : back.params.bias)
      for (double v : b) CHECK(v == 0.0);
  }
  SUBCASE("stale cache is rejected") {
    auto other = nn::MlpModel::random({4, 7, 3}, rng);
    CHECK_THROWS_AS(nn::backward(other, fwd.cache, Matrix(5, 3)), DimensionError);
  }
  SUBCASE("ce input gradient at uniform softmax through identity") {
    const std::size_t k = 4;
    auto id = identity_model(k);
    Matrix x(1, k, 0.25);
    auto f = nn::forward(id, x);
    const std::vector<std::size_t> label{2};
    auto back = nn::backward(id, f.cache, nn::batch_loss_ce(f.logits, label).grad);
    for (std::size_t j = 0; j < k; ++j) CHECK(back.input(0, j) == Approx(1.0 / k - (j == 2 ? 1.0 : 0.0)));
  }
}

TEST_CASE("optimizer: sgd direction") {
  auto model = nn::MlpModel::zeros({1, 1});
  auto grads = nn::ParamGradients::zeros_like(model);
  grads.weight[0](0, 0) = 1.0;
  SUBCASE("descend") {
    auto st = nn::OptimizerState::create(nn::OptimizerKind::sgd, 0.1, model);
    nn::optimizer_step(model, st, grads, nn::Direction::descend);
    CHECK(model.layer(0).weight(0, 0) == Approx(-0.1));
  }
  SUBCASE("ascend") {
    auto st = nn::OptimizerState::create(nn::OptimizerKind::sgd, 0.1, model);
    nn::optimizer_step(model, st, grads, nn::Direction::ascend);
    CHECK(model.layer(0).weight(0, 0) == Approx(0.1));
  }
}

TEST_CASE("optimizer: adam matches scalar oracle") {
  auto model = nn::MlpModel::zeros({1, 1});
  model.layer(0).weight(0, 0) = 0.3;
  auto st = nn::OptimizerState::create(nn::OptimizerKind::adam, 1e-2, model);
  oracle::ScalarAdam ref{1e-2};
  double theta = 0.3;
  for (double g : {0.7, -1.3}) {
    auto grads = nn::ParamGradients::zeros_like(model);
    grads.weight[0](0, 0) = g;
    nn::optimizer_step(model, st, grads, nn::Direction::descend);
    theta = ref.step(theta, g);
    CHECK(std::abs(model.layer(0).weight(0, 0) - theta) < 1e-12);
  }
}

TEST_CASE("optimizer: non-finite gradient names the layer") {
  Rng rng(0);
  auto model = nn::MlpModel::random({2, 3, 2}, rng);
  auto st = nn::OptimizerState::create(nn::OptimizerKind::sgd, 0.1, model);
  auto grads = nn::ParamGradients::zeros_like(model);
  grads.bias[1][0] = std::numeric_limits<double>::quiet_NaN();
  try {
    nn::optimizer_step(model, st, grads, nn::Direction::descend);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(e.layer() == 1);
  }
}

TEST_CASE("optimizer: frozen layers keep value") {
  Rng rng(0);
  auto model = nn::MlpModel::random({2, 3, 2}, rng);
  const auto before = model.layer(0);
  auto st = nn::OptimizerState::create(nn::OptimizerKind::adam, 0.1, model);
  auto grads = nn::ParamGradients::zeros_like(model);
  for (auto& w : grads.weight)
    for (double& v : w.values()) v = 1.0;
  nn::optimizer_step(model, st, grads, nn::Direction::descend, 1);
  CHECK(model.layer(0) == before);
}

TEST_CASE("training") {
  auto data = attacks::gen_synthetic(4, 64, 250, 0.1, 0);
  Rng rng(0);
  auto init = nn::MlpModel::random({64, 64, 4}, rng);

  SUBCASE("zero epochs leave parameters unchanged") {
    nn::TrainConfig cfg;
    cfg.epochs = 0;
    Rng r(1);
    CHECK(nn::train_supervised(init, data, cfg, r) == init);
  }
  SUBCASE("blobs are learned") {
    nn::TrainConfig cfg;
    cfg.epochs = 50;
    Rng r(1);
    auto model = nn::train_supervised(init, data, cfg, r);
    CHECK(nn::accuracy(model, data.features, *data.labels) >= 0.99);
  }
  SUBCASE("unlabeled data is rejected") {
    Rng r(1);
    CHECK_THROWS_AS(nn::train_supervised(init, data.without_labels(), nn::TrainConfig{}, r),
                    MissingLabelsError);
  }
  SUBCASE("badnets victim reaches high attack success") {
    auto trig = attacks::TriggerSpec::corner_patch(8, 3);
    auto poisoned = attacks::poison_dirty_label(data, trig, 0.05, 0, 0);
    Rng r(2);
    auto model = nn::train_supervised(init, poisoned, nn::TrainConfig{}, r);
    auto test = attacks::gen_synthetic(4, 64, 100, 0.1, 0);
    auto triggered = attacks::triggered_test_set(test, trig, 0);
    auto pred = nn::predict(model, triggered.features);
    std::size_t hit = 0;
    for (auto p : pred) hit += p == 0;
    CHECK(double(hit) / double(pred.size()) >= 0.9);
  }
}

TEST_CASE("fine tuning") {
  auto data = attacks::gen_synthetic(4, 64, 100, 0.1, 0);
  Rng rng(0);
  auto init = nn::MlpModel::random({64, 32, 4}, rng);
  nn::TrainConfig cfg;
  cfg.epochs = 3;
  SUBCASE("ft_last freezes hidden layers") {
    Rng r(1);
    auto tuned = nn::fine_tune(init, data, nn::FineTuneMode::ft_last, cfg, r);
    CHECK(tuned.layer(0) == init.layer(0));
    CHECK_FALSE(tuned.layer(1) == init.layer(1));
  }
  SUBCASE("ft_all with zero epochs is a no-op") {
    cfg.epochs = 0;
    Rng r(1);
    CHECK(nn::fine_tune(init, data, nn::FineTuneMode::ft_all, cfg, r) == init);
  }
  SUBCASE("input width mismatch") {
    auto narrow = attacks::gen_synthetic(4, 16, 10, 0.1, 0);
    Rng r(1);
    CHECK_THROWS_AS(nn::fine_tune(init, narrow, nn::FineTuneMode::ft_all, cfg, r), DimensionError);
  }
}
