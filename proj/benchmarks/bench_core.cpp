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

#include <benchmark/benchmark.h>

#include <vector>

#include "offset/detect/asset.hpp"
#include "offset/eval/experiment.hpp"
#include "offset/nn/losses.hpp"
#include "offset/nn/mlp.hpp"
#include "offset/stats/robust.hpp"

using namespace offset;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (double& v : m.values()) v = rng.uniform();
  return m;
}

std::vector<double> random_values(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

void BM_Forward(benchmark::State& state) {
  Rng rng(0);
  auto model = nn::MlpModel::random({64, 64, 4}, rng);
  auto batch = random_matrix(static_cast<std::size_t>(state.range(0)), 64, rng);
  for (auto _ : state) benchmark::DoNotOptimize(nn::logits(model, batch));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Forward)->Arg(128)->Arg(1024);

void BM_ForwardBackward(benchmark::State& state) {
  Rng rng(0);
  auto model = nn::MlpModel::random({64, 64, 4}, rng);
  auto batch = random_matrix(static_cast<std::size_t>(state.range(0)), 64, rng);
  for (auto _ : state) {
    auto fwd = nn::forward(model, batch);
    auto loss = nn::batch_loss_var(fwd.logits);
    benchmark::DoNotOptimize(nn::backward(model, fwd.cache, loss.grad));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ForwardBackward)->Arg(128)->Arg(1024);

void BM_Medcouple(benchmark::State& state) {
  Rng rng(1);
  auto x = random_values(static_cast<std::size_t>(state.range(0)), rng);
  for (auto _ : state) benchmark::DoNotOptimize(stats::medcouple(x));
}
BENCHMARK(BM_Medcouple)->Arg(64)->Arg(128)->Arg(512);

void BM_AdaptiveOutlyingness(benchmark::State& state) {
  Rng rng(2);
  auto x = random_values(static_cast<std::size_t>(state.range(0)), rng);
  for (auto _ : state) benchmark::DoNotOptimize(stats::adjusted_outlyingness(x));
}
BENCHMARK(BM_AdaptiveOutlyingness)->Arg(128);

void BM_AdaptiveGmm(benchmark::State& state) {
  Rng rng(3);
  auto x = random_values(static_cast<std::size_t>(state.range(0)), rng);
  for (auto _ : state) benchmark::DoNotOptimize(stats::adaptive_gmm(x, 1e-6));
}
BENCHMARK(BM_AdaptiveGmm)->Arg(2000);

const eval::Scenario& scenario() {
  static const eval::Scenario sc = eval::build_scenario(eval::ExperimentSpec{}, 0);
  return sc;
}

void BM_PoisonConcentration(benchmark::State& state) {
  const auto& sc = scenario();
  Rng rng(4);
  std::vector<std::size_t> poi(128), base(256);
  for (auto& i : poi) i = rng.below(sc.poisoned.size());
  for (auto& i : base) i = rng.below(sc.base.size());
  const Matrix p = sc.poisoned.features.gather(poi);
  const Matrix b = sc.base.features.gather(base);
  detect::AssetConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(detect::poison_concentration(sc.victim, p, b, cfg));
}
BENCHMARK(BM_PoisonConcentration)->Unit(benchmark::kMillisecond);

// Whole detection divided by the outer iteration count.
void BM_AssetOuterIteration(benchmark::State& state) {
  const auto& sc = scenario();
  const auto poisoned = sc.poisoned.without_mask();
  detect::AssetConfig cfg;
  cfg.outer_iterations = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(detect::asset_detect(sc.victim, poisoned, sc.base, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_AssetOuterIteration)->Arg(20)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
