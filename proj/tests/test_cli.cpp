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
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "doctest.h"
#include "json.hpp"
#include "offset/cli/commands.hpp"
#include "offset/cli/config.hpp"
#include "offset/cli/io.hpp"
#include "offset/cli/report.hpp"

namespace fs = std::filesystem;
using namespace offset;
using Json = nlohmann::json;

namespace {

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "offset_detect");
  std::ostringstream out, err;
  Outcome o;
  o.code = cli::run(args, out, err);
  o.out = out.str();
  o.err = err.str();
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

// One scratch tree per test binary; small datasets keep every command fast.
struct Workspace {
  fs::path root;
  Workspace() {
    root = fs::temp_directory_path() / ("offset_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(root);
    fs::create_directories(root);
    REQUIRE(invoke({"gen", "--k", "4", "--d", "64", "--per-class", "100", "--seed", "0", "--out", p("clean")}).code == 0);
    REQUIRE(invoke({"gen", "--k", "4", "--d", "64", "--per-class", "25", "--seed", "1", "--out", p("base")}).code == 0);
    REQUIRE(invoke({"poison", "--data", p("clean"), "--attack", "badnets", "--ratio", "0.05", "--seed", "0",
                 "--out", p("poisoned")}).code == 0);
    REQUIRE(invoke({"train", "--data", p("poisoned"), "--epochs", "10", "--seed", "0", "--out", p("model")}).code == 0);
  }
  ~Workspace() { fs::remove_all(root); }
  std::string p(const std::string& name) const { return (root / name).string(); }
  std::vector<std::string> detect(const std::string& data, const std::string& out) const {
    return {"detect", "--model", p("model"), "--data", data, "--base", p("base"),
            "--outer-iterations", "20", "--seed", "3", "--out", out};
  }
};

Workspace& ws() {
  static Workspace w;
  return w;
}

}  // namespace

TEST_CASE("gen writes a balanced dataset") {
  auto m = cli::read_manifest(ws().p("clean"));
  CHECK(m["n"] == 400);
  CHECK(m["k"] == 4);
  CHECK(m["has_mask"] == false);
  auto d = cli::read_dataset(ws().p("clean"));
  for (std::size_t y = 0; y < 4; ++y) CHECK(std::count(d.labels->begin(), d.labels->end(), y) == 100);
  CHECK(fs::file_size(ws().root / "clean" / cli::kFeatureFile) == 400 * 64 * 4);
  CHECK(fs::file_size(ws().root / "clean" / cli::kLabelFile) == 400);
}

TEST_CASE("manifest keys are sorted") {
  const auto text = slurp(ws().root / "poisoned" / cli::kManifestName);
  auto j = Json::parse(text);
  std::vector<std::string> keys;
  for (auto& [k, v] : j.items()) keys.push_back(k);
  std::size_t last = 0;
  for (const auto& k : keys) {
    const auto pos = text.find("\"" + k + "\"");
    CHECK(pos >= last);
    last = pos;
  }
}

TEST_CASE("gen is byte-identical for a fixed seed") {
  REQUIRE(invoke({"gen", "--k", "4", "--d", "64", "--per-class", "100", "--seed", "0", "--out", ws().p("clean2")}).code == 0);
  for (auto f : {cli::kManifestName, cli::kFeatureFile, cli::kLabelFile})
    CHECK(slurp(ws().root / "clean" / f) == slurp(ws().root / "clean2" / f));
}

TEST_CASE("poison reports the count only") {
  auto d = cli::read_dataset(ws().p("poisoned"));
  CHECK(d.poison_count() == 20);
  auto m = cli::read_manifest(ws().p("poisoned"));
  CHECK(m["has_mask"] == true);

  auto o = invoke({"poison", "--data", ws().p("clean"), "--ratio", "0.05", "--seed", "0", "--out", ws().p("p2")});
  REQUIRE(o.code == 0);
  CHECK(o.out.find("poisons: 20 of 400") != std::string::npos);
  CHECK(o.out.find("indices") == std::string::npos);
  const auto idx = d.poison_indices();

  auto r = invoke({"poison", "--data", ws().p("clean"), "--ratio", "0.05", "--seed", "0", "--reveal-mask",
                "--out", ws().p("p3")});
  REQUIRE(r.code == 0);
  std::string listed = "poison indices:";
  for (auto i : idx) listed += " " + std::to_string(i);
  CHECK(r.out.find(listed + "\n") != std::string::npos);
  CHECK(slurp(ws().root / "p2" / cli::kMaskFile) == slurp(ws().root / "poisoned" / cli::kMaskFile));
}

TEST_CASE("poison of 1000 samples at 5 percent") {
  REQUIRE(invoke({"gen", "--per-class", "250", "--out", ws().p("big")}).code == 0);
  REQUIRE(invoke({"poison", "--data", ws().p("big"), "--attack", "badnets", "--ratio", "0.05", "--out", ws().p("bigp")}).code == 0);
  CHECK(cli::read_dataset(ws().p("bigp")).poison_count() == 50);
}

TEST_CASE("dataset and model round trip bit-identically") {
  auto d = cli::read_dataset(ws().p("poisoned"));
  cli::write_dataset(ws().root / "rt", d, Json::object());
  auto e = cli::read_dataset(ws().root / "rt");
  CHECK(d.features == e.features);
  CHECK(d.labels == e.labels);
  CHECK(d.poison_mask == e.poison_mask);
  CHECK(d.target_class == e.target_class);
  CHECK(slurp(ws().root / "rt" / cli::kFeatureFile) == slurp(ws().root / "poisoned" / cli::kFeatureFile));

  Rng rng(5);
  auto model = nn::MlpModel::random({7, 5, 3}, rng);
  cli::write_model(ws().root / "m.bin", model);
  CHECK(cli::read_model(ws().root / "m.bin") == model);
}

TEST_CASE("detect writes the full report") {
  auto o = invoke(ws().detect(ws().p("poisoned"), ws().p("det")));
  REQUIRE(o.code == 0);
  const fs::path dir = ws().root / "det";
  auto summary = cli::read_json(dir / "summary.json");
  CHECK(summary.contains("tpr"));
  CHECK(summary.contains("fpr"));
  CHECK(summary.contains("gaussian_mu"));
  CHECK(summary.contains("gaussian_var"));
  CHECK(summary["config_echo"]["asset.seed"] == 3);
  CHECK(summary["config_echo"]["asset.outer_step"] == 1e-3);
  CHECK(summary["config_echo"]["asset.outer_iterations"] == 20);

  auto loss_lines = lines(slurp(dir / "losses.csv"));
  CHECK(loss_lines.front() == "index,loss,flagged");
  CHECK(loss_lines.size() == 401);
  auto hist = lines(slurp(dir / "histogram.csv"));
  CHECK(hist.front() == "bin_left,bin_right,count_clean,count_poison,count_total");

  auto flagged = cli::read_index_list(dir / "flagged.txt");
  CHECK(std::is_sorted(flagged.begin(), flagged.end()));
  std::size_t marked = 0;
  for (std::size_t i = 1; i < loss_lines.size(); ++i) marked += loss_lines[i].back() == '1';
  CHECK(marked == flagged.size());
}

TEST_CASE("detect on a maskless dataset omits detection rates") {
  REQUIRE(invoke(ws().detect(ws().p("clean"), ws().p("det_clean"))).code == 0);
  auto summary = cli::read_json(ws().root / "det_clean" / "summary.json");
  CHECK_FALSE(summary.contains("tpr"));
  CHECK_FALSE(summary.contains("fpr"));
  CHECK(fs::exists(ws().root / "det_clean" / "flagged.txt"));
  CHECK(fs::exists(ws().root / "det_clean" / "losses.csv"));
  auto hist = lines(slurp(ws().root / "det_clean" / "histogram.csv"));
  CHECK(hist.front() == "bin_left,bin_right,count_total");
}

TEST_CASE("detect is byte-identical across runs") {
  REQUIRE(invoke(ws().detect(ws().p("poisoned"), ws().p("det_a"))).code == 0);
  REQUIRE(invoke(ws().detect(ws().p("poisoned"), ws().p("det_b"))).code == 0);
  for (auto f : {"flagged.txt", "losses.csv", "histogram.csv", "summary.json"})
    CHECK(slurp(ws().root / "det_a" / f) == slurp(ws().root / "det_b" / f));
}

TEST_CASE("corrupting the mask does not change detection") {
  fs::copy(ws().root / "poisoned", ws().root / "corrupt", fs::copy_options::recursive);
  {
    auto mask = slurp(ws().root / "corrupt" / cli::kMaskFile);
    for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = (i % 3 == 0) ? 1 : 0;
    std::ofstream(ws().root / "corrupt" / cli::kMaskFile, std::ios::binary) << mask;
  }
  REQUIRE(invoke(ws().detect(ws().p("poisoned"), ws().p("det_true"))).code == 0);
  REQUIRE(invoke(ws().detect(ws().p("corrupt"), ws().p("det_corrupt"))).code == 0);
  CHECK(slurp(ws().root / "det_true" / "flagged.txt") == slurp(ws().root / "det_corrupt" / "flagged.txt"));
  CHECK(slurp(ws().root / "det_true" / "losses.csv") == slurp(ws().root / "det_corrupt" / "losses.csv"));
}

TEST_CASE("unlearn on flagged samples") {
  REQUIRE(invoke({"poison", "--data", ws().p("base"), "--triggered-test", "--out", ws().p("trig")}).code == 0);
  auto o = invoke({"unlearn", "--model", ws().p("model"), "--data", ws().p("poisoned"), "--flagged",
                ws().p("det") + "/flagged.txt", "--test", ws().p("base"), "--triggered", ws().p("trig"),
                "--out", ws().p("unl")});
  REQUIRE(o.code == 0);
  auto s = cli::read_json(ws().root / "unl" / "unlearn_summary.json");
  CHECK(s.contains("asr_before"));
  CHECK(s.contains("asr_after"));
  CHECK(fs::exists(ws().root / "unl" / "model.bin"));
}

TEST_CASE("eval sweep writes one row per value with remaining_poisons") {
  const std::vector<std::string> small = {
      "--set", "data.train_size=400", "--set", "data.base_size=40", "--set", "data.test_size=200",
      "--set", "victim.epochs=5", "--set", "asset.outer_iterations=5"};
  std::vector<std::string> args{"eval", "--sweep", "ratio=0.005,0.05,0.2,0.5", "--out", ws().p("eval")};
  args.insert(args.end(), small.begin(), small.end());
  auto o = invoke(args);
  REQUIRE(o.code == 0);
  auto rows = lines(slurp(ws().root / "eval" / "metrics.csv"));
  REQUIRE(rows.size() == 5);
  CHECK(rows[0].find("attack.ratio") == 0);
  CHECK(rows[0].find("remaining_poisons") != std::string::npos);
  CHECK(fs::exists(ws().root / "eval" / "eval_summary.json"));
}

TEST_CASE("exit codes") {
  CHECK(invoke({"gen", "--bogus"}).code == cli::kExitConfig);
  CHECK(invoke({"gen", "--d", "60", "--out", ws().p("bad")}).code == cli::kExitConfig);
  CHECK(invoke({"poison", "--data", ws().p("clean"), "--ratio", "0.9", "--out", ws().p("bad")}).code == cli::kExitConfig);
  CHECK(invoke({"gen", "--set", "no.such.key=1", "--out", ws().p("bad")}).code == cli::kExitConfig);
  CHECK(invoke({"detect", "--model", ws().p("model"), "--data", ws().p("base"), "--base", ws().p("base"),
             "--beta", "2", "--out", ws().p("bad")}).code == cli::kExitConfig);
  CHECK(invoke({"poison", "--data", ws().p("does_not_exist"), "--out", ws().p("bad")}).code == cli::kExitIo);
  {
    std::ofstream(ws().root / "broken.json") << "{ not json";
    CHECK(invoke({"gen", "--config", ws().p("broken.json"), "--out", ws().p("bad")}).code == cli::kExitConfig);
  }
  {
    fs::copy(ws().root / "clean", ws().root / "truncated", fs::copy_options::recursive);
    fs::resize_file(ws().root / "truncated" / cli::kFeatureFile, 100);
    CHECK(invoke({"poison", "--data", ws().p("truncated"), "--out", ws().p("bad")}).code == cli::kExitIo);
  }
  CHECK(invoke({"--help"}).code == cli::kExitOk);
}

TEST_CASE("config file and seed override") {
  std::ofstream(ws().root / "cfg.json") << R"({"data.k": 3, "data.d": 16, "seed": 9})";
  REQUIRE(invoke({"gen", "--config", ws().p("cfg.json"), "--per-class", "4", "--out", ws().p("cfgd")}).code == 0);
  auto m = cli::read_manifest(ws().p("cfgd"));
  CHECK(m["k"] == 3);
  CHECK(m["d"] == 16);
  CHECK(m["provenance"]["seed"] == 9);
}

#ifdef OFFSET_CLI_PATH
TEST_CASE("binary maps errors to process exit codes") {
  const std::string exe = OFFSET_CLI_PATH;
  auto status = [](const std::string& cmd) {
    const int raw = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WEXITSTATUS(raw);
  };
  CHECK(status(exe + " gen --out " + ws().p("bin_gen")) == 0);
  CHECK(status(exe + " gen --bogus") == 2);
  CHECK(status(exe + " poison --data " + ws().p("missing") + " --out " + ws().p("x")) == 3);
}
#endif
