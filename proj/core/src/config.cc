/*
 * Copyright 2026 The wdsguard Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "wdsguard/config.h"

#include <algorithm>
#include <cctype>
#include <fstream>

#include <fmt/format.h>

#include "wdsguard/errors.h"
#include "wdsguard/rng.h"

extern char** environ;

namespace wdsguard {

using nlohmann::json;

json default_config_json() {
  return json{
      {"data", {{"paths", json::array()}}},
      {"seed", 42},
      {"split", {{"ratio", 0.8}}},
      {"features",
       {{"base", json::array()},
        {"top_k", 10},
        {"lag1", true},
        {"lag3", true},
        {"diff1", true},
        {"rolling_mean", true},
        {"rolling_std", true},
        {"window", 5},
        {"ranking_trees", 300}}},
      {"smote", {{"k_neighbors", 5}, {"target_ratio", 1.0}}},
      {"forest",
       {{"n_trees", 300},
        {"max_depth", -1},
        {"min_samples_leaf", 1},
        {"max_features", 0},
        {"bootstrap", true},
        {"class_weight", json::array({1.0, 1.0})}}},
      {"gbt",
       {{"n_rounds", 500},
        {"max_depth", 6},
        {"learning_rate", 0.05},
        {"lambda_l2", 1.0},
        {"gamma_min_gain", 0.0},
        {"min_child_weight", 1.0},
        {"base_score", nullptr}}},
      {"lstm",
       {{"hidden_units", 64},
        {"dropout_rate", 0.2},
        {"seq_len", 10},
        {"epochs", 30},
        {"batch_size", 64},
        {"learning_rate", 0.001},
        {"class_weights", nullptr},
        {"clamp", json::array({-0.05, 1.05})},
        {"use_smote", false}}},
      {"models", json::array({"forest", "gbt", "lstm"})},
      {"ensemble",
       {{"runs",
         json::array({
             {{"members", {"forest", "lstm"}}, {"combiner", "stacked"}},
             {{"members", {"forest", "gbt"}}, {"combiner", "stacked"}},
             {{"members", {"gbt", "lstm"}}, {"combiner", "stacked"}},
             {{"members", {"forest", "gbt", "lstm"}}, {"combiner", "stacked"}},
             {{"members", {"forest", "lstm"}}, {"combiner", "average"}},
             {{"members", {"forest", "gbt"}}, {"combiner", "average"}},
             {{"members", {"gbt", "lstm"}}, {"combiner", "average"}},
             {{"members", {"forest", "gbt", "lstm"}}, {"combiner", "average"}},
         })},
        {"oof_folds", 5},
        {"meta", {{"l2", 1.0}, {"max_iterations", 100}, {"tolerance", 1e-8}}}}},
      {"explain",
       {{"model", "gbt"},
        {"background_rows", 100},
        {"eval_rows", 200},
        {"samples", 100},
        {"top", 20}}},
      {"threshold", 0.5},
      {"output_dir", "wdsguard_out"},
      {"threads", 0},
  };
}

void merge_config(json& base, const json& patch, const std::string& path) {
  if (!patch.is_object()) {
    throw ConfigError(fmt::format("config section '{}' must be an object",
                                  path.empty() ? "<root>" : path));
  }
  for (const auto& [key, value] : patch.items()) {
    const std::string here = path.empty() ? key : path + "." + key;
    if (!base.contains(key)) {
      throw ConfigError(fmt::format("unknown config key '{}'", here));
    }
    if (base[key].is_object()) {
      merge_config(base[key], value, here);
    } else {
      base[key] = value;
    }
  }
}

void set_config_path(json& doc, const std::string& dotted, const json& value) {
  json* node = &doc;
  std::size_t start = 0;
  for (;;) {
    const auto dot = dotted.find('.', start);
    const std::string key = dotted.substr(start, dot - start);
    if (!node->is_object() || !node->contains(key)) {
      throw ConfigError(fmt::format("unknown config key '{}'", dotted));
    }
    node = &(*node)[key];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  if (node->is_object()) {
    throw ConfigError(fmt::format("config key '{}' is a section", dotted));
  }
  *node = value;
}

std::map<std::string, std::string> environment_with_prefix(std::string_view prefix) {
  std::map<std::string, std::string> out;
  for (char** e = environ; e != nullptr && *e != nullptr; ++e) {
    std::string_view entry(*e);
    if (!entry.starts_with(prefix)) continue;
    const auto eq = entry.find('=');
    if (eq == std::string_view::npos) continue;
    out.emplace(std::string(entry.substr(0, eq)), std::string(entry.substr(eq + 1)));
  }
  return out;
}

void apply_env_overrides(json& doc, const std::map<std::string, std::string>& env) {
  for (const auto& [name, raw] : env) {
    if (!name.starts_with(kEnvPrefix)) continue;
    std::string path = name.substr(kEnvPrefix.size());
    std::transform(path.begin(), path.end(), path.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    std::string dotted;
    for (std::size_t k = 0; k < path.size(); ++k) {
      if (path.compare(k, 2, "__") == 0) {
        dotted += '.';
        ++k;
      } else {
        dotted += path[k];
      }
    }
    json value = json::parse(raw, nullptr, /*allow_exceptions=*/false);
    if (value.is_discarded()) value = raw;
    set_config_path(doc, dotted, value);
  }
}

json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open '{}'", path.string()));
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

namespace {

template <typename T>
T get(const json& doc, const char* section, const char* key) {
  const json& node = section ? doc.at(section).at(key) : doc.at(key);
  try {
    return node.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(fmt::format("config key '{}{}{}' has the wrong type",
                                  section ? section : "", section ? "." : "", key));
  }
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

std::vector<MemberKind> parse_members(const json& list, const std::string& where) {
  require(list.is_array(), fmt::format("'{}' must be a list", where));
  std::vector<MemberKind> out;
  for (const auto& item : list) {
    require(item.is_string(), fmt::format("'{}' entries must be strings", where));
    try {
      out.push_back(member_kind_from_string(item.get<std::string>()));
    } catch (const InvalidArgument& e) {
      throw ConfigError(fmt::format("{}: {}", where, e.what()));
    }
  }
  return out;
}

}  // namespace

PipelineConfig resolve_config(const json& input) {
  json doc = default_config_json();
  merge_config(doc, input);

  PipelineConfig c;
  c.resolved = doc;
  try {
    for (const auto& p : doc.at("data").at("paths")) {
      c.data_paths.emplace_back(p.get<std::string>());
    }
  } catch (const json::exception&) {
    throw ConfigError("data.paths must be a list of strings");
  }
  c.seed = get<std::uint64_t>(doc, nullptr, "seed");
  c.split_ratio = get<double>(doc, "split", "ratio");
  require(c.split_ratio > 0.0 && c.split_ratio < 1.0, "split.ratio must be in (0, 1)");

  auto& fs = c.feature_spec;
  fs.base_features = get<std::vector<std::string>>(doc, "features", "base");
  fs.lag1 = get<bool>(doc, "features", "lag1");
  fs.lag3 = get<bool>(doc, "features", "lag3");
  fs.diff1 = get<bool>(doc, "features", "diff1");
  fs.rolling_mean = get<bool>(doc, "features", "rolling_mean");
  fs.rolling_std = get<bool>(doc, "features", "rolling_std");
  fs.window = get<int>(doc, "features", "window");
  require(fs.window >= 2, "features.window must be >= 2");
  c.top_k = get<int>(doc, "features", "top_k");
  require(c.top_k >= 1, "features.top_k must be >= 1");

  c.threads = get<unsigned>(doc, nullptr, "threads");

  c.ranking_forest.n_trees = get<int>(doc, "features", "ranking_trees");
  require(c.ranking_forest.n_trees >= 1, "features.ranking_trees must be >= 1");
  c.ranking_forest.seed = derive_seed(c.seed, "ranking");
  c.ranking_forest.threads = c.threads;

  auto& smote = c.members.smote;
  smote.k_neighbors = get<int>(doc, "smote", "k_neighbors");
  smote.target_ratio = get<double>(doc, "smote", "target_ratio");
  require(smote.k_neighbors >= 1, "smote.k_neighbors must be >= 1");
  require(smote.target_ratio > 0.0 && smote.target_ratio <= 1.0,
          "smote.target_ratio must be in (0, 1]");
  smote.seed = derive_seed(c.seed, "smote");

  auto& forest = c.members.forest;
  forest.n_trees = get<int>(doc, "forest", "n_trees");
  forest.max_depth = get<int>(doc, "forest", "max_depth");
  forest.min_samples_leaf = get<int>(doc, "forest", "min_samples_leaf");
  forest.max_features = get<int>(doc, "forest", "max_features");
  forest.bootstrap = get<bool>(doc, "forest", "bootstrap");
  const auto cw = get<std::vector<double>>(doc, "forest", "class_weight");
  require(cw.size() == 2 && cw[0] > 0.0 && cw[1] > 0.0,
          "forest.class_weight must be two positive numbers");
  forest.class_weight0 = cw[0];
  forest.class_weight1 = cw[1];
  require(forest.n_trees >= 1, "forest.n_trees must be >= 1");
  require(forest.min_samples_leaf >= 1, "forest.min_samples_leaf must be >= 1");
  forest.seed = derive_seed(c.seed, "forest");
  forest.threads = c.threads;

  auto& gbt = c.members.gbt;
  gbt.n_rounds = get<int>(doc, "gbt", "n_rounds");
  gbt.max_depth = get<int>(doc, "gbt", "max_depth");
  gbt.learning_rate = get<double>(doc, "gbt", "learning_rate");
  gbt.lambda_l2 = get<double>(doc, "gbt", "lambda_l2");
  gbt.gamma_min_gain = get<double>(doc, "gbt", "gamma_min_gain");
  gbt.min_child_weight = get<double>(doc, "gbt", "min_child_weight");
  if (!doc["gbt"]["base_score"].is_null()) {
    gbt.base_score = get<double>(doc, "gbt", "base_score");
  }
  require(gbt.n_rounds >= 0 && gbt.max_depth >= 0,
          "gbt.n_rounds and gbt.max_depth must be >= 0");
  require(gbt.learning_rate > 0.0, "gbt.learning_rate must be > 0");
  require(gbt.lambda_l2 >= 0.0, "gbt.lambda_l2 must be >= 0");
  gbt.seed = derive_seed(c.seed, "gbt");
  gbt.threads = c.threads;

  auto& lstm = c.members.lstm;
  lstm.hidden_units = get<int>(doc, "lstm", "hidden_units");
  lstm.dropout_rate = get<double>(doc, "lstm", "dropout_rate");
  lstm.seq_len = get<int>(doc, "lstm", "seq_len");
  lstm.epochs = get<int>(doc, "lstm", "epochs");
  lstm.batch_size = get<int>(doc, "lstm", "batch_size");
  lstm.learning_rate = get<double>(doc, "lstm", "learning_rate");
  if (!doc["lstm"]["class_weights"].is_null()) {
    const auto w = get<std::vector<double>>(doc, "lstm", "class_weights");
    require(w.size() == 2 && w[0] > 0.0 && w[1] > 0.0,
            "lstm.class_weights must be null or two positive numbers");
    lstm.class_weights = std::pair{w[0], w[1]};
  }
  const auto clamp = get<std::vector<double>>(doc, "lstm", "clamp");
  require(clamp.size() == 2 && clamp[0] < clamp[1],
          "lstm.clamp must be [low, high] with low < high");
  lstm.clamp_low = clamp[0];
  lstm.clamp_high = clamp[1];
  c.members.lstm_use_smote = get<bool>(doc, "lstm", "use_smote");
  require(lstm.hidden_units >= 1, "lstm.hidden_units must be >= 1");
  require(lstm.dropout_rate >= 0.0 && lstm.dropout_rate < 1.0,
          "lstm.dropout_rate must be in [0, 1)");
  require(lstm.seq_len >= 1, "lstm.seq_len must be >= 1");
  require(lstm.epochs >= 0 && lstm.batch_size >= 1,
          "lstm.epochs must be >= 0 and lstm.batch_size >= 1");
  lstm.seed = derive_seed(c.seed, "lstm");

  c.models = parse_members(doc.at("models"), "models");
  const auto& ens = doc.at("ensemble");
  for (const auto& run : ens.at("runs")) {
    require(run.is_object() && run.contains("members") && run.contains("combiner"),
            "ensemble.runs entries need 'members' and 'combiner'");
    for (const auto& [key, value] : run.items()) {
      require(key == "members" || key == "combiner",
              fmt::format("unknown config key 'ensemble.runs.{}'", key));
    }
    EnsembleRun r;
    r.members = parse_members(run.at("members"), "ensemble.runs.members");
    require(r.members.size() >= 2, "ensemble runs need at least 2 members");
    try {
      r.combiner = combiner_from_string(run.at("combiner").get<std::string>());
    } catch (const std::exception& e) {
      throw ConfigError(fmt::format("ensemble.runs.combiner: {}", e.what()));
    }
    c.ensembles.push_back(std::move(r));
  }
  c.oof_folds = get<int>(ens, nullptr, "oof_folds");
  require(c.oof_folds >= 2, "ensemble.oof_folds must be >= 2");
  c.meta.l2 = get<double>(ens.at("meta"), nullptr, "l2");
  c.meta.max_iterations = get<int>(ens.at("meta"), nullptr, "max_iterations");
  c.meta.tolerance = get<double>(ens.at("meta"), nullptr, "tolerance");
  require(c.meta.l2 >= 0.0, "ensemble.meta.l2 must be >= 0");
  require(c.models.size() + c.ensembles.size() > 0,
          "config requests no models: set 'models' or 'ensemble.runs'");

  c.explain.model = get<std::string>(doc, "explain", "model");
  c.explain.background_rows = get<int>(doc, "explain", "background_rows");
  c.explain.eval_rows = get<int>(doc, "explain", "eval_rows");
  c.explain.samples = get<int>(doc, "explain", "samples");
  c.explain.top = get<int>(doc, "explain", "top");
  require(c.explain.background_rows >= 1 && c.explain.eval_rows >= 1 &&
              c.explain.samples >= 2 && c.explain.top >= 1,
          "explain settings must be positive (samples >= 2)");

  c.threshold = get<double>(doc, nullptr, "threshold");
  require(c.threshold >= 0.0 && c.threshold <= 1.0, "threshold must be in [0, 1]");
  c.output_dir = get<std::string>(doc, nullptr, "output_dir");
  return c;
}

}  // namespace wdsguard
