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

#include "offset/cli/commands.hpp"

#include <chrono>
#include <deque>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"

#include "offset/attacks/attacks.hpp"
#include "offset/cli/config.hpp"
#include "offset/cli/io.hpp"
#include "offset/cli/report.hpp"
#include "offset/detect/asset.hpp"
#include "offset/errors.hpp"
#include "offset/eval/defenses.hpp"
#include "offset/eval/experiment.hpp"
#include "offset/eval/metrics.hpp"
#include "offset/nn/train.hpp"
#include "offset/rng.hpp"

namespace offset::cli {
namespace {

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string config_path;
  std::string out_dir;
  bool reveal_mask = false;
  std::vector<std::string> sets;
  std::vector<std::string> sweeps;
};

/// A subcommand flag that overrides one config key when given.
struct Binding {
  std::string key;
  std::optional<std::string> value;
  bool as_list = false;
};

class Context {
 public:
  Context(std::ostream& out, std::ostream& err) : out(out), err(err) {}

  std::ostream& out;
  std::ostream& err;
  Globals globals;

  void bind(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help,
            bool as_list = false) {
    auto& b = bindings_[app].emplace_back();
    b.key = key;
    b.as_list = as_list;
    app->add_option(flag, b.value, help + " [" + key + "]");
  }

  /// Defaults, then --config, then --set, then bound flags, then --seed.
  RunConfig config(CLI::App* app) const {
    RunConfig cfg;
    if (!globals.config_path.empty()) cfg = from_json(read_json(globals.config_path));
    for (const auto& s : globals.sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects KEY=VALUE, got '" + s + "'");
      apply_setting(cfg, s.substr(0, eq), parse_value(s.substr(eq + 1)));
    }
    const auto it = bindings_.find(app);
    if (it != bindings_.end()) {
      for (const auto& b : it->second) {
        if (!b.value) continue;
        apply_setting(cfg, b.key, b.as_list ? parse_list(*b.value) : parse_value(*b.value));
      }
    }
    if (globals.seed) cfg.spec.seed = *globals.seed;
    return cfg;
  }

  fs::path out_dir() const {
    if (globals.out_dir.empty()) throw ConfigError("--out DIR is required");
    return globals.out_dir;
  }

 private:
  static Json parse_list(const std::string& text) {
    Json parsed = parse_value(text);
    if (parsed.is_array()) return parsed;
    if (parsed.is_number()) return Json::array({parsed});
    Json out = Json::array();
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) out.push_back(parse_value(item));
    return out;
  }

  std::map<const CLI::App*, std::deque<Binding>> bindings_;
};

fs::path model_path(const std::string& arg) {
  fs::path p(arg);
  if (fs::is_directory(p)) p /= "model.bin";
  return p;
}

Json provenance(const std::string& command, const RunConfig& cfg) {
  Json p;
  p["command"] = command;
  p["seed"] = cfg.spec.seed;
  return p;
}

void print_mask_summary(Context& ctx, const LabeledDataset& data) {
  if (!data.has_mask()) return;
  ctx.out << "poisons: " << data.poison_count() << " of " << data.size() << "\n";
  if (ctx.globals.reveal_mask) {
    ctx.out << "poison indices:";
    for (std::size_t i : data.poison_indices()) ctx.out << ' ' << i;
    ctx.out << "\n";
  }
}

// ---------------------------------------------------------------- gen

struct GenArgs {
  std::size_t per_class = 250;
  std::uint64_t task_seed = 0;
};

void cmd_gen(Context& ctx, CLI::App* app, const GenArgs& args) {
  const RunConfig cfg = ctx.config(app);
  const auto& dc = cfg.spec.data;
  if (args.per_class == 0) throw ConfigError("--per-class must be positive");
  Rng task_rng(args.task_seed);
  const auto task = attacks::SyntheticTask::create(dc.k, dc.d, dc.noise_sigma, task_rng);
  Rng sample_rng(cfg.spec.seed);
  LabeledDataset data = task.sample(args.per_class, sample_rng);
  round_to_float32(data.features);

  Json prov = provenance("gen", cfg);
  prov["task_seed"] = args.task_seed;
  prov["per_class"] = args.per_class;
  prov["noise_sigma"] = dc.noise_sigma;
  const fs::path dir = ctx.out_dir();
  write_dataset(dir, data, prov);
  ctx.out << "wrote " << data.size() << " samples (k=" << dc.k << ", d=" << dc.d << ") to "
          << dir.string() << "\n";
}

// ---------------------------------------------------------------- poison

struct PoisonArgs {
  std::string data;
  bool triggered_test = false;
};

void cmd_poison(Context& ctx, CLI::App* app, const PoisonArgs& args) {
  const RunConfig cfg = ctx.config(app);
  const auto& ac = cfg.spec.attack;
  LabeledDataset clean = read_dataset(args.data);
  if (clean.has_mask()) throw ConfigError("input dataset is already poisoned");
  if (!clean.has_labels()) throw MissingLabelsError("poisoning needs a labeled dataset");
  if (ac.target_class >= clean.num_classes) throw IndexError("target class out of range");
  const auto trigger = ac.trigger(clean.dim());

  LabeledDataset out;
  if (args.triggered_test) {
    out = attacks::triggered_test_set(clean, trigger, ac.target_class);
    out.target_class = ac.target_class;
  } else {
    switch (ac.kind) {
      case eval::AttackKind::badnets:
      case eval::AttackKind::blend:
        out = attacks::poison_dirty_label(clean, trigger, ac.ratio, ac.target_class, cfg.spec.seed);
        break;
      case eval::AttackKind::clean_label:
        out = attacks::poison_clean_label(clean, trigger, ac.ratio, ac.target_class, cfg.spec.seed);
        break;
      case eval::AttackKind::none:
        throw ConfigError("attack.kind none has nothing to poison");
    }
  }
  round_to_float32(out.features);

  Json prov = provenance("poison", cfg);
  prov["source"] = read_manifest(args.data).value("provenance", Json(nullptr));
  prov["attack"] = Json::object();
  const Json all = to_json(cfg);
  for (const auto& [key, value] : all.items())
    if (key.rfind("attack.", 0) == 0) prov["attack"][key] = value;
  prov["triggered_test"] = args.triggered_test;
  const fs::path dir = ctx.out_dir();
  write_dataset(dir, out, prov);
  if (args.triggered_test) {
    ctx.out << "wrote " << out.size() << " triggered test samples to " << dir.string() << "\n";
  } else {
    print_mask_summary(ctx, out);
    ctx.out << "wrote " << out.size() << " samples to " << dir.string() << "\n";
  }
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string data;
  std::string init;
  std::string fine_tune = "all";
};

void cmd_train(Context& ctx, CLI::App* app, const TrainArgs& args) {
  const RunConfig cfg = ctx.config(app);
  const auto& vc = cfg.spec.victim;
  vc.train.validate();
  // The trainer reads labels and features only; a poison mask on disk is
  // never consulted.
  const LabeledDataset data = read_dataset(args.data).without_mask();
  if (!data.has_labels()) throw MissingLabelsError("training needs a labeled dataset");
  Rng rng(cfg.spec.seed);

  nn::MlpModel model;
  if (!args.init.empty()) {
    nn::MlpModel pretrained = read_model(model_path(args.init));
    if (pretrained.input_dim() != data.dim()) throw DimensionError("initial model width mismatch");
    if (pretrained.output_dim() < data.num_classes) throw DimensionError("initial model has too few logits");
    const auto mode = args.fine_tune == "last" ? nn::FineTuneMode::ft_last : nn::FineTuneMode::ft_all;
    if (args.fine_tune != "last" && args.fine_tune != "all")
      throw ConfigError("--fine-tune expects all or last");
    model = nn::fine_tune(std::move(pretrained), data, mode, vc.train, rng);
  } else {
    std::vector<std::size_t> dims{data.dim()};
    dims.insert(dims.end(), vc.hidden.begin(), vc.hidden.end());
    dims.push_back(data.num_classes);
    Rng init_rng = rng.fork();
    model = nn::train_supervised(nn::MlpModel::random(dims, init_rng), data, vc.train, rng);
  }

  const double acc = nn::accuracy(model, data.features, *data.labels);
  const fs::path dir = ctx.out_dir();
  write_model(dir / "model.bin", model);
  Json summary;
  summary["train_accuracy"] = acc;
  summary["dims"] = model.dims();
  summary["seed"] = cfg.spec.seed;
  Json echo = Json::object();
  const Json all = to_json(cfg);
  for (const auto& [key, value] : all.items())
    if (key.rfind("victim.", 0) == 0) echo[key] = value;
  summary["config_echo"] = echo;
  summary["init"] = args.init.empty() ? Json(nullptr) : Json(args.fine_tune);
  write_json(dir / "train_summary.json", summary);
  ctx.out << "train accuracy " << format_double(acc) << "; model written to "
          << (dir / "model.bin").string() << "\n";
}

// ---------------------------------------------------------------- detect

struct DetectArgs {
  std::string model;
  std::string data;
  std::string base;
};

void cmd_detect(Context& ctx, CLI::App* app, const DetectArgs& args) {
  const RunConfig cfg = ctx.config(app);
  detect::AssetConfig asset = cfg.spec.asset;
  asset.seed = cfg.spec.seed;
  asset.validate();

  const nn::MlpModel victim = read_model(model_path(args.model));
  const LabeledDataset data = read_dataset(args.data);
  // Ground truth stays here, on the scoring side. The detector receives a
  // copy without it (and without labels in unlabeled mode).
  const std::optional<std::vector<bool>> truth = data.poison_mask;
  LabeledDataset view = data.without_mask();
  if (asset.mode == detect::LossMode::unlabeled) view = view.without_labels();
  const LabeledDataset base = read_dataset(args.base).without_mask().without_labels();

  const auto report = detect::asset_detect(victim, view, base, asset);
  const fs::path dir = ctx.out_dir();
  write_detection_report(dir, report, truth, asset_to_json(asset));
  ctx.out << "flagged " << report.flagged.size() << " of " << report.losses.size() << " samples";
  if (truth) {
    const auto m = eval::detection_metrics(report.flagged, *truth);
    ctx.out << " (tpr " << format_double(m.tpr) << ", fpr " << format_double(m.fpr) << ")";
  }
  ctx.out << " in " << format_double(report.elapsed_seconds) << " s; report in " << dir.string() << "\n";
}

// ---------------------------------------------------------------- eval

struct SweepPoint {
  std::vector<std::pair<std::string, Json>> settings;
};

std::vector<SweepPoint> expand(const std::vector<Sweep>& sweeps) {
  std::vector<SweepPoint> points{SweepPoint{}};
  for (const auto& sweep : sweeps) {
    std::vector<SweepPoint> next;
    for (const auto& p : points) {
      for (const auto& v : sweep.values) {
        SweepPoint q = p;
        q.settings.emplace_back(sweep.key, v);
        next.push_back(std::move(q));
      }
    }
    points = std::move(next);
  }
  return points;
}

std::string cell(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  std::string s = v.dump();
  for (char& ch : s)
    if (ch == ',') ch = ';';
  return s;
}

struct Table {
  std::vector<std::string> header;
  std::string body;
  Json rows = Json::array();
};

/// Runs every point of the sweep and collects the mean metrics per point.
Table run_sweep(Context& ctx, const RunConfig& base_cfg, const std::vector<Sweep>& sweeps,
                const std::vector<std::pair<std::string, std::function<void(RunConfig&)>>>& variants) {
  Table t;
  if (!variants.empty()) t.header.push_back("variant");
  for (const auto& s : sweeps) t.header.push_back(s.key);
  t.header.push_back("trials");
  const auto mcols = metrics_columns();
  t.header.insert(t.header.end(), mcols.begin(), mcols.end());

  const auto points = expand(sweeps);
  // Validate every point before any compute.
  std::vector<std::pair<std::vector<std::string>, RunConfig>> jobs;
  const std::vector<std::pair<std::string, std::function<void(RunConfig&)>>> plain{{"", nullptr}};
  for (const auto& [name, tweak] : variants.empty() ? plain : variants) {
    for (const auto& p : points) {
      RunConfig cfg = base_cfg;
      if (tweak) tweak(cfg);
      std::vector<std::string> lead;
      if (!variants.empty()) lead.push_back(name);
      for (const auto& [key, value] : p.settings) {
        apply_setting(cfg, key, value);
        lead.push_back(cell(value));
      }
      (void)cfg.build();
      jobs.emplace_back(std::move(lead), std::move(cfg));
    }
  }

  for (const auto& [lead, cfg] : jobs) {
    const auto spec = cfg.build();
    const auto started = std::chrono::steady_clock::now();
    const auto results = eval::run_trials(spec);
    std::vector<eval::Metrics> ms;
    Json seeds = Json::array();
    for (const auto& r : results) {
      ms.push_back(r.metrics);
      seeds.push_back(r.seed);
    }
    const auto mean = eval::aggregate(ms);
    std::vector<std::string> row = lead;
    row.push_back(std::to_string(results.size()));
    const auto mf = metrics_fields(mean);
    row.insert(row.end(), mf.begin(), mf.end());
    t.body += csv_line(row);

    Json entry;
    entry["config"] = to_json(cfg);
    entry["metrics"] = metrics_json(mean);
    entry["seeds"] = seeds;
    Json per_trial = Json::array();
    for (const auto& m : ms) per_trial.push_back(metrics_json(m));
    entry["trials"] = per_trial;
    t.rows.push_back(entry);

    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    std::string label;
    for (std::size_t i = 0; i < lead.size(); ++i) label += (i ? " " : "") + lead[i];
    ctx.out << (label.empty() ? "run" : label) << ": tpr " << format_double(mean.tpr) << " fpr "
            << format_double(mean.fpr) << " asr " << format_double(mean.asr) << " acc "
            << format_double(mean.acc) << " remaining " << mean.remaining_poisons << " ("
            << format_double(secs) << " s)\n";
  }
  return t;
}

void cmd_eval(Context& ctx, CLI::App* app) {
  const RunConfig cfg = ctx.config(app);
  std::vector<Sweep> sweeps;
  for (const auto& s : ctx.globals.sweeps) sweeps.push_back(parse_sweep(s));
  const fs::path dir = ctx.out_dir();
  const Table t = run_sweep(ctx, cfg, sweeps, {});
  ensure_directory(dir);
  write_text(dir / "metrics.csv", csv_line(t.header) + t.body);
  Json summary;
  summary["base_config"] = to_json(cfg);
  Json keys = Json::array();
  for (const auto& s : sweeps) keys.push_back(s.key);
  summary["sweep_keys"] = keys;
  summary["rows"] = t.rows;
  write_json(dir / "eval_summary.json", summary);
}

// ---------------------------------------------------------------- adaptive

void cmd_adaptive(Context& ctx, CLI::App* app) {
  const RunConfig cfg = ctx.config(app);
  std::vector<Sweep> sweeps;
  for (const auto& s : ctx.globals.sweeps) sweeps.push_back(parse_sweep(s));
  const fs::path dir = ctx.out_dir();
  const Table t = run_sweep(
      ctx, cfg, sweeps,
      {{"baseline", [](RunConfig& c) { c.adaptive_enabled = false; c.unlearn_enabled = false; }},
       {"adaptive", [](RunConfig& c) { c.adaptive_enabled = true; c.unlearn_enabled = false; }},
       {"adaptive_unlearn", [](RunConfig& c) { c.adaptive_enabled = true; c.unlearn_enabled = true; }}});
  ensure_directory(dir);
  write_text(dir / "adaptive.csv", csv_line(t.header) + t.body);
  Json summary;
  summary["base_config"] = to_json(cfg);
  summary["rows"] = t.rows;
  write_json(dir / "adaptive_summary.json", summary);
}

// ---------------------------------------------------------------- unlearn

struct UnlearnArgs {
  std::string model;
  std::string data;
  std::string flagged;
  std::string test;
  std::string triggered;
};

void cmd_unlearn(Context& ctx, CLI::App* app, const UnlearnArgs& args) {
  const RunConfig cfg = ctx.config(app);
  const nn::MlpModel victim = read_model(model_path(args.model));
  const LabeledDataset data = read_dataset(args.data).without_mask();
  if (!data.has_labels()) throw MissingLabelsError("unlearning needs the labeled training set");
  const auto flagged = read_index_list(args.flagged);
  for (std::size_t i : flagged)
    if (i >= data.size()) throw IndexError("flagged index " + std::to_string(i) + " out of range");

  Rng rng(cfg.spec.seed);
  const nn::MlpModel model = eval::unlearn(victim, data, flagged, cfg.unlearn, rng);
  const fs::path dir = ctx.out_dir();
  write_model(dir / "model.bin", model);

  Json summary;
  summary["seed"] = cfg.spec.seed;
  summary["num_flagged"] = flagged.size();
  Json echo = Json::object();
  const Json all = to_json(cfg);
  for (const auto& [key, value] : all.items())
    if (key.rfind("unlearn.", 0) == 0 && key != "unlearn.enabled") echo[key] = value;
  summary["config_echo"] = echo;
  if (!args.test.empty()) {
    const auto test = read_dataset(args.test);
    if (!test.has_labels()) throw MissingLabelsError("test set needs labels");
    summary["acc_before"] = nn::accuracy(victim, test.features, *test.labels);
    summary["acc_after"] = nn::accuracy(model, test.features, *test.labels);
  }
  if (!args.triggered.empty()) {
    const auto trig = read_dataset(args.triggered);
    if (!trig.target_class) throw ConfigError("triggered set manifest has no target_class");
    summary["asr_before"] = eval::attack_success_rate(victim, trig, *trig.target_class);
    summary["asr_after"] = eval::attack_success_rate(model, trig, *trig.target_class);
  }
  write_json(dir / "unlearn_summary.json", summary);
  ctx.out << "unlearned " << flagged.size() << " samples; model written to "
          << (dir / "model.bin").string() << "\n";
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Context ctx(out, err);
  CLI::App app{"Backdoor-poison detection by nested offset optimization", "offset_detect"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--seed", ctx.globals.seed, "Seed for every random stream of the command");
  app.add_option("--config", ctx.globals.config_path, "JSON object of dotted config keys");
  app.add_option("--out", ctx.globals.out_dir, "Output directory");
  app.add_flag("--reveal-mask", ctx.globals.reveal_mask, "Print poison indices, not just the count");
  app.add_option("--set", ctx.globals.sets, "Override one config key: KEY=VALUE (repeatable)");
  app.add_option("--sweep", ctx.globals.sweeps, "KEY=V1,V2,... grid for eval/adaptive (repeatable)");

  auto* gen = app.add_subcommand("gen", "Generate a clean synthetic dataset");
  GenArgs gen_args;
  ctx.bind(gen, "--k", "data.k", "Number of classes");
  ctx.bind(gen, "--d", "data.d", "Feature count (a perfect square)");
  ctx.bind(gen, "--noise", "data.noise_sigma", "Gaussian noise around the class prototypes");
  gen->add_option("--per-class", gen_args.per_class, "Samples per class")->capture_default_str();
  gen->add_option("--task-seed", gen_args.task_seed, "Seed of the class prototypes")->capture_default_str();

  auto* poison = app.add_subcommand("poison", "Inject a backdoor trigger into a clean dataset");
  PoisonArgs poison_args;
  poison->add_option("--data", poison_args.data, "Clean dataset directory")->required();
  ctx.bind(poison, "--attack", "attack.kind", "badnets, blend or clean_label");
  ctx.bind(poison, "--ratio", "attack.ratio", "Poison ratio");
  ctx.bind(poison, "--target", "attack.target", "Target class");
  ctx.bind(poison, "--patch-size", "attack.patch_size", "Side of the corner patch");
  ctx.bind(poison, "--patch-value", "attack.patch_value", "Pixel value of the patch");
  ctx.bind(poison, "--alpha", "attack.blend_alpha", "Blend weight");
  ctx.bind(poison, "--pattern-seed", "attack.pattern_seed", "Seed of the blend pattern");
  poison->add_flag("--triggered-test", poison_args.triggered_test,
                   "Write triggered copies of every non-target sample instead");

  auto* train = app.add_subcommand("train", "Train a victim MLP on a labeled dataset");
  TrainArgs train_args;
  train->add_option("--data", train_args.data, "Training dataset directory")->required();
  ctx.bind(train, "--hidden", "victim.hidden", "Hidden widths, e.g. 64 or 64,32", true);
  ctx.bind(train, "--epochs", "victim.epochs", "Training epochs");
  ctx.bind(train, "--batch-size", "victim.batch_size", "Mini-batch size");
  ctx.bind(train, "--lr", "victim.learning_rate", "Learning rate");
  ctx.bind(train, "--optimizer", "victim.optimizer", "sgd or adam");
  train->add_option("--init", train_args.init, "Pretrained model to fine-tune");
  train->add_option("--fine-tune", train_args.fine_tune, "all or last (with --init)")->capture_default_str();

  auto* det = app.add_subcommand("detect", "Run detection and write a report");
  DetectArgs det_args;
  det->add_option("--model", det_args.model, "Victim model file or directory")->required();
  det->add_option("--data", det_args.data, "Dataset to screen")->required();
  det->add_option("--base", det_args.base, "Clean base set (labels are ignored)")->required();
  ctx.bind(det, "--mode", "asset.mode", "labeled or unlabeled");
  ctx.bind(det, "--outer-iterations", "asset.outer_iterations", "Outer offset iterations");
  ctx.bind(det, "--inner-iterations", "asset.inner_iterations", "Inner offset iterations");
  ctx.bind(det, "--outer-step", "asset.outer_step", "Outer step size");
  ctx.bind(det, "--inner-step", "asset.inner_step", "Inner step size");
  ctx.bind(det, "--logits", "asset.detector_logits", "Detector output width (0: as the victim)");
  ctx.bind(det, "--beta", "asset.gmm_beta", "Density cut-off of the adaptive GMM");

  auto* ev = app.add_subcommand("eval", "End-to-end experiments over a sweep; writes metrics.csv");
  ctx.bind(ev, "--trials", "trials", "Independent trials per sweep point");

  auto* adaptive = app.add_subcommand("adaptive", "Compare plain, adaptive and adaptive+unlearn runs");
  ctx.bind(adaptive, "--trials", "trials", "Independent trials per variant");
  ctx.bind(adaptive, "--steps", "adaptive.steps", "Perturbation steps");
  ctx.bind(adaptive, "--step-size", "adaptive.step_size", "Perturbation step size");

  auto* unl = app.add_subcommand("unlearn", "Unlearn flagged samples from a trained model");
  UnlearnArgs unl_args;
  unl->add_option("--model", unl_args.model, "Victim model file or directory")->required();
  unl->add_option("--data", unl_args.data, "Labeled training set")->required();
  unl->add_option("--flagged", unl_args.flagged, "flagged.txt from detect")->required();
  unl->add_option("--test", unl_args.test, "Clean test set for accuracy");
  unl->add_option("--triggered", unl_args.triggered, "Triggered test set for attack success");
  ctx.bind(unl, "--epochs", "unlearn.epochs", "Unlearning epochs");
  ctx.bind(unl, "--lr", "unlearn.learning_rate", "Unlearning learning rate");

  std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (gen->parsed()) cmd_gen(ctx, gen, gen_args);
  else if (poison->parsed()) cmd_poison(ctx, poison, poison_args);
  else if (train->parsed()) cmd_train(ctx, train, train_args);
  else if (det->parsed()) cmd_detect(ctx, det, det_args);
  else if (ev->parsed()) cmd_eval(ctx, ev);
  else if (adaptive->parsed()) cmd_adaptive(ctx, adaptive);
  else if (unl->parsed()) cmd_unlearn(ctx, unl, unl_args);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(args, out, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    err << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace offset::cli
