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

#ifndef WDSGUARD_CONFIG_H_
#define WDSGUARD_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wdsguard/ensemble.h"
#include "wdsguard/features.h"

namespace wdsguard {

inline constexpr std::string_view kEnvPrefix = "WDSGUARD_";

struct EnsembleRun {
  std::vector<MemberKind> members;
  Combiner combiner = Combiner::kStacked;
};

struct ExplainConfig {
  std::string model = "gbt";
  int background_rows = 100;
  int eval_rows = 200;
  int samples = 100;
  int top = 20;
};

struct PipelineConfig {
  std::vector<std::filesystem::path> data_paths;
  std::uint64_t seed = 42;
  double split_ratio = 0.8;
  // Base features for temporal engineering; empty means "rank and take top_k".
  FeatureSpec feature_spec;
  int top_k = 10;
  ForestConfig ranking_forest;
  MemberConfig members;
  std::vector<MemberKind> models;
  std::vector<EnsembleRun> ensembles;
  int oof_folds = 5;
  LogisticConfig meta;
  ExplainConfig explain;
  double threshold = 0.5;
  std::filesystem::path output_dir = "wdsguard_out";
  unsigned threads = 0;

  // Fully resolved document, defaults included.
  nlohmann::json resolved;
};

// The default document; every accepted key appears here.
nlohmann::json default_config_json();

// Overlays `patch` onto `base`, rejecting keys `base` lacks.
void merge_config(nlohmann::json& base, const nlohmann::json& patch,
                  const std::string& path = "");

// Applies WDSGUARD_A__B=value style variables (path segments joined by "__",
// case-insensitive). Values are parsed as JSON when possible.
void apply_env_overrides(nlohmann::json& doc,
                         const std::map<std::string, std::string>& env);
std::map<std::string, std::string> environment_with_prefix(std::string_view prefix);

// Sets a dotted path ("lstm.epochs") to a value; the path must exist.
void set_config_path(nlohmann::json& doc, const std::string& dotted,
                     const nlohmann::json& value);

// Validates the document and derives every component seed from the root
// seed. Throws ConfigError.
PipelineConfig resolve_config(const nlohmann::json& doc);

nlohmann::json load_json_file(const std::filesystem::path& path);

}  // namespace wdsguard

#endif  // WDSGUARD_CONFIG_H_
