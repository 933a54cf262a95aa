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


// wdsguard: attack detection for water-distribution SCADA telemetry.
//
//   wdsguard explore  --config run.json
//   wdsguard train    --config run.json --seed 7 --out runs/a
//   wdsguard evaluate --config run.json --out runs/a --sweep
//   wdsguard explain  --config run.json --out runs/a --model gbt
//   wdsguard synth    --rows 4000 --out synthetic.csv

#include <chrono>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "wdsguard/config.h"
#include "wdsguard/errors.h"
#include "wdsguard/model_io.h"
#include "wdsguard/pipeline.h"
#include "wdsguard/synthetic.h"

namespace {

using nlohmann::json;
using wdsguard::PipelineConfig;

struct CommonFlags {
  std::string config_path;
  std::vector<std::string> data;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<double> threshold;
  std::vector<std::string> models;
  std::vector<std::string> overrides;
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("--data", f.data, "BATADAL-format CSV files (data.paths)");
  cmd->add_option("--seed", f.seed, "root seed (seed)");
  cmd->add_option("--out", f.out, "output directory (output_dir)");
  cmd->add_option("--threshold", f.threshold, "decision threshold (threshold)");
  cmd->add_option("--models", f.models, "base models, e.g. forest,gbt,lstm (models)")
      ->delimiter(',');
  cmd->add_option("--set", f.overrides, "config override path=value, repeatable");
  cmd->add_flag("-q,--quiet", f.quiet, "no progress output");
}

// Defaults < config file < WDSGUARD_* environment < command-line flags.
PipelineConfig build_config(const CommonFlags& f) {
  json doc = wdsguard::default_config_json();
  if (!f.config_path.empty()) {
    wdsguard::merge_config(doc, wdsguard::load_json_file(f.config_path));
  }
  auto env = wdsguard::environment_with_prefix(wdsguard::kEnvPrefix);
  wdsguard::apply_env_overrides(doc, env);
  for (const auto& o : f.overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) {
      throw wdsguard::ConfigError(fmt::format("--set expects path=value, got '{}'", o));
    }
    json value = json::parse(o.substr(eq + 1), nullptr, false);
    if (value.is_discarded()) value = o.substr(eq + 1);
    wdsguard::set_config_path(doc, o.substr(0, eq), value);
  }
  if (!f.data.empty()) doc["data"]["paths"] = f.data;
  if (f.seed) doc["seed"] = *f.seed;
  if (!f.out.empty()) doc["output_dir"] = f.out;
  if (f.threshold) doc["threshold"] = *f.threshold;
  if (!f.models.empty()) doc["models"] = f.models;
  return wdsguard::resolve_config(doc);
}

wdsguard::Logger make_logger(bool quiet) {
  if (quiet) return {};
  const auto start = std::chrono::steady_clock::now();
  return [start](const std::string& line) {
    const double s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cerr << fmt::format("[{:7.1f}s] {}\n", s, line);
  };
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wdsguard: attack detection for water-distribution SCADA data"};
  app.require_subcommand(1);

  CommonFlags common;
  auto* explore = app.add_subcommand("explore", "class balance, correlation, ranking");
  auto* train = app.add_subcommand("train", "fit base models and ensembles");
  auto* evaluate = app.add_subcommand("evaluate", "score saved models");
  auto* explain = app.add_subcommand("explain", "Shapley attributions for a saved model");
  for (auto* cmd : {explore, train, evaluate, explain}) add_common(cmd, common);

  std::string subset = "valid";
  bool sweep = false;
  std::vector<std::string> eval_models;
  evaluate->add_option("--subset", subset, "valid, train or all")
      ->check(CLI::IsMember({"valid", "train", "all"}));
  evaluate->add_flag("--sweep", sweep, "confusion matrices at thresholds 0.1..0.9");
  evaluate->add_option("--only", eval_models, "model names to evaluate")->delimiter(',');

  std::string explain_model;
  explain->add_option("--model", explain_model, "model name (explain.model)");

  auto* synth = app.add_subcommand("synth", "write a synthetic BATADAL-format CSV");
  wdsguard::SyntheticConfig synth_cfg;
  std::string synth_out;
  synth->add_option("--out", synth_out, "output CSV path")->required();
  synth->add_option("--rows", synth_cfg.rows, "hourly rows");
  synth->add_option("--attacks", synth_cfg.attack_intervals, "attack intervals");
  synth->add_option("--noise", synth_cfg.noise, "noise multiplier");
  synth->add_option("--seed", synth_cfg.seed, "generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(wdsguard::ErrorKind::kInvalidArgument);
  }

  try {
    if (synth->parsed()) {
      const auto frame = wdsguard::make_synthetic_batadal(synth_cfg);
      wdsguard::write_file_atomic(synth_out, wdsguard::to_batadal_csv(frame));
      return 0;
    }
    if (explain->parsed() && !explain_model.empty()) {
      common.overrides.push_back("explain.model=\"" + explain_model + "\"");
    }
    const PipelineConfig config = build_config(common);
    const auto log = make_logger(common.quiet);
    if (explore->parsed()) {
      const json report = wdsguard::run_explore(config, log);
      const auto& cb = report.at("class_balance");
      std::cout << fmt::format("rows {}  attacks {} ({:.2f}%)\n",
                               report.at("data").at("rows").get<std::size_t>(),
                               cb.at("attack").get<std::size_t>(),
                               100.0 * cb.at("attack_fraction").get<double>());
    } else if (train->parsed()) {
      const auto result = wdsguard::run_training(config, log);
      const auto& split = result.manifest.at("split");
      std::cout << fmt::format("split {}/{}; models: {}\n",
                               split.at("train_rows").get<std::size_t>(),
                               split.at("valid_rows").get<std::size_t>(),
                               fmt::join(result.models, ", "));
    } else if (evaluate->parsed()) {
      wdsguard::EvaluateOptions options;
      options.models = eval_models;
      options.subset = wdsguard::eval_subset_from_string(subset);
      options.threshold_sweep = sweep;
      const auto result = wdsguard::run_evaluate(config, options, log);
      std::cout << result.table;
    } else if (explain->parsed()) {
      const auto result = wdsguard::run_explain(config, log);
      for (std::size_t k = 0; k < result.ranking.size() &&
                              k < static_cast<std::size_t>(config.explain.top);
           ++k) {
        const auto& e = result.ranking[k];
        std::cout << fmt::format("{:>3}  {:<24} {:.6f}\n", e.rank, e.name, e.mean_abs);
      }
    }
  } catch (const wdsguard::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
