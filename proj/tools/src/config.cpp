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

#include "offset/cli/config.hpp"

#include <functional>
#include <map>
#include <utility>

#include "offset/errors.hpp"

namespace offset::cli {
namespace {

using Get = std::function<Json(const RunConfig&)>;
using Set = std::function<void(RunConfig&, const Json&)>;

struct Entry {
  Get get;
  Set set;
};

[[noreturn]] void bad_value(const std::string& key, const Json& value, const char* want) {
  throw ConfigError("config key '" + key + "' expects " + want + ", got " + value.dump());
}

std::size_t as_count(const std::string& key, const Json& v) {
  if (v.is_number_unsigned()) return v.get<std::size_t>();
  if (v.is_number_integer() && v.get<long long>() >= 0) return v.get<std::size_t>();
  bad_value(key, v, "a non-negative integer");
}

double as_real(const std::string& key, const Json& v) {
  if (v.is_number()) return v.get<double>();
  bad_value(key, v, "a number");
}

bool as_flag(const std::string& key, const Json& v) {
  if (v.is_boolean()) return v.get<bool>();
  bad_value(key, v, "true or false");
}

template <typename E>
using Names = std::vector<std::pair<E, const char*>>;

const Names<eval::AttackKind> kAttackNames{{eval::AttackKind::none, "none"},
                                           {eval::AttackKind::badnets, "badnets"},
                                           {eval::AttackKind::blend, "blend"},
                                           {eval::AttackKind::clean_label, "clean_label"}};
const Names<eval::CaseTag> kCaseNames{{eval::CaseTag::case0, "case0"},
                                      {eval::CaseTag::case1_unlabeled, "case1_unlabeled"},
                                      {eval::CaseTag::case2_ft_all, "case2_ft_all"},
                                      {eval::CaseTag::case2_ft_last, "case2_ft_last"}};
const Names<eval::DefenseKind> kDefenseNames{{eval::DefenseKind::asset, "asset"},
                                             {eval::DefenseKind::spectral, "spectral"},
                                             {eval::DefenseKind::none, "none"}};
const Names<detect::LossMode> kModeNames{{detect::LossMode::labeled, "labeled"},
                                         {detect::LossMode::unlabeled, "unlabeled"}};
const Names<nn::OptimizerKind> kOptimizerNames{{nn::OptimizerKind::sgd, "sgd"},
                                               {nn::OptimizerKind::adam, "adam"}};

template <typename E>
const char* name_of(const Names<E>& names, E value) {
  for (const auto& [e, n] : names)
    if (e == value) return n;
  return "?";
}

template <typename E>
E parse_enum(const std::string& key, const Json& v, const Names<E>& names) {
  if (v.is_string()) {
    for (const auto& [e, n] : names)
      if (v.get<std::string>() == n) return e;
  }
  std::string allowed;
  for (const auto& [e, n] : names) allowed += (allowed.empty() ? "" : "|") + std::string(n);
  throw ConfigError("config key '" + key + "' expects one of " + allowed + ", got " + v.dump());
}

using Registry = std::map<std::string, Entry>;

template <typename T, typename F>
void add(Registry& r, const std::string& key, F field) {
  Entry e;
  e.get = [field](const RunConfig& c) { return Json(field(const_cast<RunConfig&>(c))); };
  if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t>) {
    e.set = [field, key](RunConfig& c, const Json& v) { field(c) = as_count(key, v); };
  } else if constexpr (std::is_same_v<T, double>) {
    e.set = [field, key](RunConfig& c, const Json& v) { field(c) = as_real(key, v); };
  } else {
    static_assert(std::is_same_v<T, bool>);
    e.set = [field, key](RunConfig& c, const Json& v) { field(c) = as_flag(key, v); };
  }
  r.emplace(key, std::move(e));
}

template <typename E, typename F>
void add_enum(Registry& r, const std::string& key, const Names<E>& names, F field) {
  Entry e;
  e.get = [field, &names](const RunConfig& c) {
    return Json(name_of(names, field(const_cast<RunConfig&>(c))));
  };
  e.set = [field, key, &names](RunConfig& c, const Json& v) { field(c) = parse_enum(key, v, names); };
  r.emplace(key, std::move(e));
}

// Null clears the value.
template <typename F>
void add_optional_real(Registry& r, const std::string& key, F field) {
  Entry e;
  e.get = [field](const RunConfig& c) {
    const auto& v = field(const_cast<RunConfig&>(c));
    return v ? Json(*v) : Json(nullptr);
  };
  e.set = [field, key](RunConfig& c, const Json& v) {
    if (v.is_null()) {
      field(c).reset();
    } else {
      field(c) = as_real(key, v);
    }
  };
  r.emplace(key, std::move(e));
}

const Registry& registry() {
  static const Registry reg = [] {
    Registry r;
    using C = RunConfig;
    add<std::uint64_t>(r, "seed", [](C& c) -> auto& { return c.spec.seed; });
    add<std::size_t>(r, "trials", [](C& c) -> auto& { return c.spec.trials; });
    add_enum(r, "case", kCaseNames, [](C& c) -> auto& { return c.spec.case_tag; });
    add_enum(r, "defense", kDefenseNames, [](C& c) -> auto& { return c.spec.defense; });
    add<double>(r, "spectral_expected_ratio", [](C& c) -> auto& { return c.spec.spectral_expected_ratio; });
    add<bool>(r, "clean_reference", [](C& c) -> auto& { return c.spec.clean_reference; });

    add_enum(r, "attack.kind", kAttackNames, [](C& c) -> auto& { return c.spec.attack.kind; });
    add<double>(r, "attack.ratio", [](C& c) -> auto& { return c.spec.attack.ratio; });
    add<std::size_t>(r, "attack.target", [](C& c) -> auto& { return c.spec.attack.target_class; });
    add<std::size_t>(r, "attack.patch_size", [](C& c) -> auto& { return c.spec.attack.patch_size; });
    add<double>(r, "attack.patch_value", [](C& c) -> auto& { return c.spec.attack.patch_value; });
    add<double>(r, "attack.blend_alpha", [](C& c) -> auto& { return c.spec.attack.blend_alpha; });
    add<std::uint64_t>(r, "attack.pattern_seed", [](C& c) -> auto& { return c.spec.attack.pattern_seed; });

    add<std::size_t>(r, "data.k", [](C& c) -> auto& { return c.spec.data.k; });
    add<std::size_t>(r, "data.d", [](C& c) -> auto& { return c.spec.data.d; });
    add<std::size_t>(r, "data.train_size", [](C& c) -> auto& { return c.spec.data.train_size; });
    add<std::size_t>(r, "data.base_size", [](C& c) -> auto& { return c.spec.data.base_size; });
    add<std::size_t>(r, "data.test_size", [](C& c) -> auto& { return c.spec.data.test_size; });
    add<std::size_t>(r, "data.pretrain_size", [](C& c) -> auto& { return c.spec.data.pretrain_size; });
    add<double>(r, "data.noise_sigma", [](C& c) -> auto& { return c.spec.data.noise_sigma; });

    r.emplace("victim.hidden",
              Entry{[](const C& c) { return Json(c.spec.victim.hidden); },
                    [](C& c, const Json& v) {
                      if (!v.is_array()) bad_value("victim.hidden", v, "an array of widths");
                      std::vector<std::size_t> widths;
                      for (const auto& w : v) widths.push_back(as_count("victim.hidden", w));
                      c.spec.victim.hidden = std::move(widths);
                    }});
    add<std::size_t>(r, "victim.epochs", [](C& c) -> auto& { return c.spec.victim.train.epochs; });
    add<std::size_t>(r, "victim.batch_size", [](C& c) -> auto& { return c.spec.victim.train.batch_size; });
    add<double>(r, "victim.learning_rate", [](C& c) -> auto& { return c.spec.victim.train.learning_rate; });
    add_enum(r, "victim.optimizer", kOptimizerNames, [](C& c) -> auto& { return c.spec.victim.train.optimizer; });

    add<std::size_t>(r, "asset.outer_iterations", [](C& c) -> auto& { return c.spec.asset.outer_iterations; });
    add<std::size_t>(r, "asset.inner_iterations", [](C& c) -> auto& { return c.spec.asset.inner_iterations; });
    add_optional_real(r, "asset.outer_step", [](C& c) -> auto& { return c.spec.asset.outer_step; });
    add<double>(r, "asset.inner_step", [](C& c) -> auto& { return c.spec.asset.inner_step; });
    add<double>(r, "asset.ao_threshold", [](C& c) -> auto& { return c.spec.asset.ao_threshold; });
    add<double>(r, "asset.gmm_beta", [](C& c) -> auto& { return c.spec.asset.gmm_beta; });
    add<std::size_t>(r, "asset.poison_batch", [](C& c) -> auto& { return c.spec.asset.poison_batch; });
    add<std::size_t>(r, "asset.base_batch", [](C& c) -> auto& { return c.spec.asset.base_batch; });
    add_enum(r, "asset.mode", kModeNames, [](C& c) -> auto& { return c.spec.asset.mode; });
    add<std::size_t>(r, "asset.detector_logits", [](C& c) -> auto& { return c.spec.asset.detector_logits; });
    add_enum(r, "asset.optimizer", kOptimizerNames, [](C& c) -> auto& { return c.spec.asset.optimizer; });
    add<bool>(r, "asset.concentrate", [](C& c) -> auto& { return c.spec.asset.concentrate; });
    add<bool>(r, "asset.standardize_features", [](C& c) -> auto& { return c.spec.asset.standardize_features; });

    add<bool>(r, "unlearn.enabled", [](C& c) -> auto& { return c.unlearn_enabled; });
    add<std::size_t>(r, "unlearn.epochs", [](C& c) -> auto& { return c.unlearn.epochs; });
    add<double>(r, "unlearn.learning_rate", [](C& c) -> auto& { return c.unlearn.learning_rate; });
    add<std::size_t>(r, "unlearn.batch_size", [](C& c) -> auto& { return c.unlearn.batch_size; });
    add_enum(r, "unlearn.optimizer", kOptimizerNames, [](C& c) -> auto& { return c.unlearn.optimizer; });

    add<bool>(r, "adaptive.enabled", [](C& c) -> auto& { return c.adaptive_enabled; });
    add<std::size_t>(r, "adaptive.steps", [](C& c) -> auto& { return c.adaptive.steps; });
    add<double>(r, "adaptive.step_size", [](C& c) -> auto& { return c.adaptive.step_size; });
    add_optional_real(r, "adaptive.linf_budget", [](C& c) -> auto& { return c.adaptive.linf_budget; });
    return r;
  }();
  return reg;
}

}  // namespace

eval::ExperimentSpec RunConfig::build() const {
  eval::ExperimentSpec out = spec;
  out.unlearn = unlearn_enabled ? std::optional(unlearn) : std::nullopt;
  out.adaptive = adaptive_enabled ? std::optional(adaptive) : std::nullopt;
  out.validate();
  return out;
}

Json to_json(const RunConfig& config) {
  Json out = Json::object();
  for (const auto& [key, entry] : registry()) out[key] = entry.get(config);
  return out;
}

std::string resolve_key(const std::string& key) {
  if (registry().count(key)) return key;
  std::string found;
  for (const auto& [name, entry] : registry()) {
    const auto dot = name.rfind('.');
    if (dot == std::string::npos || name.compare(dot + 1, std::string::npos, key) != 0) continue;
    if (!found.empty()) throw ConfigError("ambiguous config key '" + key + "': " + found + " or " + name);
    found = name;
  }
  if (found.empty()) throw ConfigError("unknown config key '" + key + "'");
  return found;
}

void apply_setting(RunConfig& config, const std::string& key, const Json& value) {
  registry().at(resolve_key(key)).set(config, value);
}

RunConfig from_json(const Json& flat) {
  if (!flat.is_object()) throw ConfigError("config must be a JSON object of dotted keys");
  RunConfig config;
  for (const auto& [key, value] : flat.items()) apply_setting(config, key, value);
  return config;
}

std::vector<std::string> known_keys() {
  std::vector<std::string> keys;
  for (const auto& [key, entry] : registry()) keys.push_back(key);
  return keys;
}

Json asset_to_json(const detect::AssetConfig& asset) {
  RunConfig config;
  config.spec.asset = asset;
  const Json all = to_json(config);
  Json out = Json::object();
  for (const auto& [key, value] : all.items())
    if (key.rfind("asset.", 0) == 0) out[key] = value;
  out["asset.seed"] = asset.seed;
  out["asset.outer_step"] = asset.effective_outer_step();
  return out;
}

Json parse_value(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error&) {
    return Json(text);
  }
}

Sweep parse_sweep(const std::string& arg) {
  const auto eq = arg.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == arg.size())
    throw ConfigError("--sweep expects KEY=V1,V2,... got '" + arg + "'");
  Sweep sweep;
  sweep.key = resolve_key(arg.substr(0, eq));
  // Split on commas outside brackets so array values like [32,32] survive.
  int depth = 0;
  std::string current;
  for (char ch : arg.substr(eq + 1)) {
    if (ch == '[') ++depth;
    if (ch == ']') --depth;
    if (ch == ',' && depth == 0) {
      if (current.empty()) throw ConfigError("empty value in --sweep " + arg);
      sweep.values.push_back(parse_value(current));
      current.clear();
    } else {
      current.push_back(ch);
    }
  }
  if (current.empty() || depth != 0) throw ConfigError("malformed --sweep " + arg);
  sweep.values.push_back(parse_value(current));
  return sweep;
}

}  // namespace offset::cli
