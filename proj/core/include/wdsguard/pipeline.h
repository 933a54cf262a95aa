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


#ifndef WDSGUARD_PIPELINE_H_
#define WDSGUARD_PIPELINE_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wdsguard/config.h"
#include "wdsguard/dataset.h"
#include "wdsguard/explain.h"
#include "wdsguard/features.h"
#include "wdsguard/metrics.h"

namespace wdsguard {

// Receives one progress line at a time; reports never depend on it.
using Logger = std::function<void(const std::string&)>;

// Named random substreams derived from the root seed.
nlohmann::json seeds_json(const PipelineConfig& config);
std::uint64_t stage_seed(const PipelineConfig& config, std::string_view stage);

// Resolved config as embedded in reports (output location removed so that
// reruns into different directories compare equal).
nlohmann::json config_echo(const PipelineConfig& config);

struct PreparedData {
  TimeSeriesFrame raw;
  std::uint64_t fingerprint = 0;
  SplitIndices split;
  // Ranking of the raw channels on the training rows; empty when the
  // config names the base features explicitly.
  RankedFeatures ranking;
  FeatureSpec spec;
  TimeSeriesFrame engineered;
};

TimeSeriesFrame load_frame(const PipelineConfig& config);
PreparedData prepare_data(const PipelineConfig& config, const Logger& log = {});

// Class balance, correlation matrix, importance ranking and rolling-std
// series, written under <out>/explore/. Returns the report document.
nlohmann::json run_explore(const PipelineConfig& config, const Logger& log = {});

struct TrainResult {
  nlohmann::json manifest;
  // Names of the models requested by the config, base models first.
  std::vector<std::string> models;
};

// Fits every requested base model and ensemble and writes one model file per
// model under <out>/models/ plus <out>/manifest.json.
TrainResult run_training(const PipelineConfig& config, const Logger& log = {});

enum class EvalSubset { kValidation, kTraining, kAll };
EvalSubset eval_subset_from_string(std::string_view text);

struct EvaluateOptions {
  // Empty means every model listed in the training manifest.
  std::vector<std::string> models;
  EvalSubset subset = EvalSubset::kValidation;
  bool threshold_sweep = false;
};

struct EvaluateResult {
  std::vector<MetricsReport> reports;
  nlohmann::json document;
  std::string table;
};

nlohmann::json metrics_report_json(const MetricsReport& report);
std::string comparison_table(std::span<const MetricsReport> reports);

// Scores saved models on the config's data; writes <out>/reports/.
EvaluateResult run_evaluate(const PipelineConfig& config,
                            const EvaluateOptions& options, const Logger& log = {});

struct ExplainResult {
  nlohmann::json document;
  std::vector<GlobalRankEntry> ranking;
  // Share of the top entries that are engineered temporal features.
  double temporal_fraction = 0.0;
};

// Sampled Shapley attributions of the config's explain.model over validation
// rows; writes <out>/explain/.
ExplainResult run_explain(const PipelineConfig& config, const Logger& log = {});

}  // namespace wdsguard

#endif  // WDSGUARD_PIPELINE_H_
