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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "offset/detect/asset.hpp"
#include "offset/errors.hpp"
#include "offset/eval/experiment.hpp"
#include "offset/stats/robust.hpp"

using namespace offset;
using doctest::Approx;

namespace {

// Victim whose penultimate features equal its (non-negative) input.
nn::MlpModel passthrough_victim(std::size_t d, std::size_t k) {
  auto model = nn::MlpModel::zeros({d, d, k});
  for (std::size_t i = 0; i < d; ++i) model.layer(0).weight(i, i) = 1.0;
  return model;
}

Matrix positive_noise(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (double& v : m.values()) v = 1.0 + 0.1 * rng.normal();
  return m;
}

const eval::ExperimentSpec& standard_spec() {
  static const eval::ExperimentSpec spec = [] {
    eval::ExperimentSpec s;
    s.validate();
    return s;
  }();
  return spec;
}

const eval::Scenario& standard_scenario() {
  static const eval::Scenario sc = eval::build_scenario(standard_spec(), 0);
  return sc;
}

}  // namespace

TEST_CASE("select_max_loss dispatch") {
  using detect::LossMode;
  CHECK(detect::select_max_loss(LossMode::unlabeled, std::vector<double>(5, 2.0)) == 0.0);
  CHECK(detect::select_max_loss(LossMode::labeled, std::vector<double>(10, 0.0), 3) ==
        Approx(std::log(10.0)).epsilon(1e-12));
  const std::vector<double> f{0.3, -1.0, 2.0};
  CHECK(detect::select_max_loss(LossMode::unlabeled, f) ==
        detect::select_max_loss(LossMode::unlabeled, f, 1));
  CHECK_THROWS_AS(detect::select_max_loss(LossMode::labeled, f), MissingLabelsError);
}

TEST_CASE("config validation") {
  detect::AssetConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.effective_outer_step() == detect::AssetConfig::kLabeledOuterStep);
  cfg.mode = detect::LossMode::unlabeled;
  CHECK(cfg.effective_outer_step() == detect::AssetConfig::kUnlabeledOuterStep);
  cfg.outer_step = 0.5;
  CHECK(cfg.effective_outer_step() == 0.5);
  cfg.outer_step = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  detect::AssetConfig beta;
  beta.gmm_beta = 1.0;
  CHECK_THROWS_AS(beta.validate(), ConfigError);
}

TEST_CASE("poison concentration") {
  const std::size_t d = 16;
  auto victim = passthrough_victim(d, 4);
  Rng rng(0);
  auto base = positive_noise(128, d, rng);

  SUBCASE("threshold above the AO cap selects nothing") {
    detect::AssetConfig cfg;
    cfg.ao_threshold = 1e7;
    auto poi = positive_noise(128, d, rng);
    CHECK(detect::poison_concentration(victim, poi, base, cfg).empty());
  }
  SUBCASE("separable poisons are concentrated with full precision") {
    auto poi = positive_noise(128, d, rng);
    std::vector<bool> truth(poi.rows(), false);
    for (std::size_t r = 0; r < poi.rows(); r += 16) {
      poi(r, 3) += 10.0;
      truth[r] = true;
    }
    detect::AssetConfig cfg;
    cfg.seed = 0;
    auto sel = detect::poison_concentration(victim, poi, base, cfg);
    REQUIRE_FALSE(sel.empty());
    for (auto i : sel) CHECK(truth[i]);
  }
  SUBCASE("same distribution as base selects few") {
    auto poi = positive_noise(128, d, rng);
    detect::AssetConfig cfg;
    cfg.seed = 0;
    auto sel = detect::poison_concentration(victim, poi, base, cfg);
    CHECK(double(sel.size()) / double(poi.rows()) <= 0.05);
  }
  SUBCASE("zero inner iterations still returns a valid subset") {
    auto poi = positive_noise(64, d, rng);
    detect::AssetConfig cfg;
    cfg.inner_iterations = 0;
    auto sel = detect::poison_concentration(victim, poi, base, cfg);
    CHECK(std::is_sorted(sel.begin(), sel.end()));
    for (auto i : sel) CHECK(i < poi.rows());
  }
}

TEST_CASE("asset_detect contracts") {
  const auto& sc = standard_scenario();
  const auto poisoned = sc.poisoned.without_mask();

  SUBCASE("zero outer iterations score the initial detector") {
    detect::AssetConfig cfg;
    cfg.outer_iterations = 0;
    auto report = detect::asset_detect(sc.victim, poisoned, sc.base, cfg);
    REQUIRE(report.losses.size() == poisoned.size());
    CHECK(report.concentrated_sizes.empty());
    auto expect = stats::adaptive_gmm(report.losses, cfg.gmm_beta);
    CHECK(report.flagged == expect.flagged);
  }
  SUBCASE("labeled mode needs labels") {
    detect::AssetConfig cfg;
    cfg.outer_iterations = 1;
    CHECK_THROWS_AS(detect::asset_detect(sc.victim, poisoned.without_labels(), sc.base, cfg),
                    MissingLabelsError);
  }
  SUBCASE("deterministic and consistent") {
    detect::AssetConfig cfg;
    cfg.outer_iterations = 40;
    cfg.seed = 9;
    auto a = detect::asset_detect(sc.victim, poisoned, sc.base, cfg);
    auto b = detect::asset_detect(sc.victim, poisoned, sc.base, cfg);
    CHECK(a.flagged == b.flagged);
    CHECK(a.losses == b.losses);
    CHECK(a.concentrated_sizes.size() == 40);
    std::vector<bool> in(a.losses.size(), false);
    for (auto i : a.flagged) in[i] = true;
    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t i = 0; i < a.losses.size(); ++i) {
      CHECK(std::isfinite(a.losses[i]));
      if (in[i]) lo = std::min(lo, a.losses[i]);
      else hi = std::max(hi, a.losses[i]);
    }
    if (!a.flagged.empty()) CHECK(lo > hi);
  }
}

TEST_CASE("separation of poisons after 500 outer iterations") {
  const auto& sc = standard_scenario();
  detect::AssetConfig cfg;
  cfg.outer_iterations = 500;
  cfg.seed = 0;
  auto report = detect::asset_detect(sc.victim, sc.poisoned.without_mask(), sc.base, cfg);
  const auto& mask = *sc.poisoned.poison_mask;
  double sp = 0, sc_ = 0;
  std::size_t np = 0, nc = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) { sp += report.losses[i]; ++np; }
    else { sc_ += report.losses[i]; ++nc; }
  }
  CHECK(sp / double(np) > sc_ / double(nc));
}
