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


#include "wdsguard/pipeline.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "wdsguard/ensemble.h"
#include "wdsguard/errors.h"
#include "wdsguard/model_io.h"
#include "wdsguard/rng.h"

namespace wdsguard {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::string_view kStages[] = {"split", "smote",   "forest",
                                        "gbt",   "lstm",    "stack",
                                        "explain", "ranking"};

void say(const Logger& log, const std::string& message) {
  if (log) log(message);
}

// Re-raises failures with the stage name prepended, keeping the error kind.
template <typename F>
auto run_stage(std::string_view name, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.kind(), fmt::format("stage '{}': {}", name, e.what()));
  } catch (const std::bad_alloc&) {
    throw;
  } catch (const std::exception& e) {
    throw TrainingError(fmt::format("stage '{}': {}", name, e.what()));
  }
}

std::string hex64(std::uint64_t v) { return fmt::format("{:016x}", v); }

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

json paths_json(const PipelineConfig& config) {
  json out = json::array();
  for (const auto& p : config.data_paths) out.push_back(p.generic_string());
  return out;
}

json ranking_json(const RankedFeatures& ranking) {
  json out = json::array();
  int rank = 1;
  for (const auto& f : ranking.features) {
    out.push_back({{"name", f.name},
                   {"score", f.score},
                   {"tier", std::string(to_string(f.tier))},
                   {"rank", rank++}});
  }
  return out;
}

json split_json(const SplitIndices& split, std::span<const int> labels) {
  const auto count = [&](const std::vector<std::size_t>& rows) {
    std::size_t n = 0;
    for (auto r : rows) n += labels[r] == 1 ? 1 : 0;
    return n;
  };
  return {{"ratio", split.ratio},
          {"seed", split.seed},
          {"train_rows", split.train.size()},
          {"valid_rows", split.valid.size()},
          {"train_attacks", count(split.train)},
          {"valid_attacks", count(split.valid)}};
}

std::string csv_number(double v) { return fmt::format("{:.10g}", v); }

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> rows(n);
  for (std::size_t i = 0; i < n; ++i) rows[i] = i;
  return rows;
}

json load_manifest(const PipelineConfig& config) {
  const fs::path path = config.output_dir / "manifest.json";
  if (!fs::exists(path)) {
    throw DataError(fmt::format("no training manifest at '{}'; run 'train' first",
                                path.string()));
  }
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw DataError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

// Builds the model's input matrix from a raw frame. Missing columns are
// reported by name as an evaluation mismatch.
Matrix model_inputs(const ModelFile& file, const TimeSeriesFrame& raw,
                    std::map<std::string, TimeSeriesFrame>& cache) {
  for (const auto& base : file.feature_spec.base_features) {
    if (!raw.find_channel(base)) {
      throw EvaluationError(fmt::format(
          "model '{}' expects base feature '{}', absent from the data", file.name, base));
    }
  }
  const std::string key = to_json(file.feature_spec).dump();
  auto it = cache.find(key);
  if (it == cache.end()) {
    it = cache.emplace(key, engineer_temporal(raw, file.feature_spec)).first;
  }
  for (const auto& name : file.features) {
    if (!it->second.find_channel(name)) {
      throw EvaluationError(fmt::format(
          "model '{}' expects column '{}', absent from the data", file.name, name));
    }
  }
  return it->second.select_columns(file.features);
}

struct EvalRows {
  std::vector<std::size_t> train;
  std::vector<std::size_t> valid;
  bool same_data = false;
};

// Recovers the training split when the data matches the training run.
EvalRows recover_split(const json& manifest, const TimeSeriesFrame& raw,
                       std::uint64_t fingerprint) {
  EvalRows rows;
  rows.same_data = manifest.at("data").at("fingerprint").get<std::string>() ==
                   hex64(fingerprint);
  if (rows.same_data) {
    const auto& s = manifest.at("split");
    const auto split = stratified_split(raw.labels(), s.at("ratio").get<double>(),
                                        s.at("seed").get<std::uint64_t>());
    rows.train = split.train;
    rows.valid = split.valid;
  } else {
    rows.valid = all_rows(raw.size());
  }
  return rows;
}

std::vector<std::size_t> sample_rows(std::span<const std::size_t> from,
                                     std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> rows(from.begin(), from.end());
  if (rows.size() > n) {
    Rng rng(seed);
    rng.shuffle(std::span<std::size_t>(rows));
    rows.resize(n);
    std::sort(rows.begin(), rows.end());
  }
  return rows;
}

}  // namespace

std::uint64_t stage_seed(const PipelineConfig& config, std::string_view stage) {
  return derive_seed(config.seed, stage);
}

json seeds_json(const PipelineConfig& config) {
  json out = {{"root", config.seed}};
  for (auto s : kStages) out[std::string(s)] = stage_seed(config, s);
  return out;
}

json config_echo(const PipelineConfig& config) {
  json doc = config.resolved;
  doc.erase("output_dir");
  return doc;
}

TimeSeriesFrame load_frame(const PipelineConfig& config) {
  if (config.data_paths.empty()) {
    throw ConfigError("data.paths is empty; pass BATADAL-format CSV files");
  }
  return load_batadal(config.data_paths);
}

PreparedData prepare_data(const PipelineConfig& config, const Logger& log) {
  PreparedData d;
  d.raw = run_stage("load", [&] { return load_frame(config); });
  d.fingerprint = fingerprint_files(config.data_paths);
  say(log, fmt::format("loaded {} rows x {} channels", d.raw.size(),
                       d.raw.channel_count()));
  d.split = run_stage("split", [&] {
    return stratified_split(d.raw.labels(), config.split_ratio,
                            stage_seed(config, "split"));
  });
  d.spec = config.feature_spec;
  if (d.spec.base_features.empty()) {
    d.ranking = run_stage("ranking", [&] {
      const Matrix x = d.raw.values().select_rows(d.split.train);
      const Labels y = select(std::span<const int>(d.raw.labels()),
                              std::span<const std::size_t>(d.split.train));
      return rank_features_by_importance(x, y, d.raw.channel_names(),
                                         config.ranking_forest, config.top_k);
    });
    d.spec.base_features = d.ranking.top_names();
    say(log, fmt::format("top-{} features: {}", config.top_k,
                         fmt::join(d.spec.base_features, ", ")));
  }
  d.engineered = run_stage("features", [&] { return engineer_temporal(d.raw, d.spec); });
  return d;
}

json run_explore(const PipelineConfig& config, const Logger& log) {
  const TimeSeriesFrame raw = run_stage("load", [&] { return load_frame(config); });
  const auto fingerprint = fingerprint_files(config.data_paths);
  const fs::path dir = config.output_dir / "explore";

  const auto balance = class_balance(raw.labels());
  const auto split = stratified_split(raw.labels(), config.split_ratio,
                                      stage_seed(config, "split"));
  const RankedFeatures ranking = run_stage("ranking", [&] {
    const Matrix x = raw.values().select_rows(split.train);
    const Labels y = select(std::span<const int>(raw.labels()),
                            std::span<const std::size_t>(split.train));
    return rank_features_by_importance(x, y, raw.channel_names(),
                                       config.ranking_forest, config.top_k);
  });
  say(log, "ranking done");

  const Matrix corr = pearson_correlation_matrix(raw);
  std::string csv = "channel";
  for (const auto& n : raw.channel_names()) csv += "," + n;
  csv += "\n";
  for (std::size_t i = 0; i < corr.rows(); ++i) {
    csv += raw.channel_names()[i];
    for (std::size_t j = 0; j < corr.cols(); ++j) csv += "," + csv_number(corr(i, j));
    csv += "\n";
  }
  write_file_atomic(dir / "correlation.csv", csv);

  const int window = config.feature_spec.window;
  const auto top = ranking.top_names();
  std::vector<std::vector<double>> series;
  for (const auto& name : top) series.push_back(rolling_std(raw.column(name), window));
  std::string rs = "DATETIME,ATT_FLAG";
  for (const auto& name : top) rs += "," + name + "_std_" + std::to_string(window);
  rs += "\n";
  for (std::size_t r = 0; r < raw.size(); ++r) {
    rs += format_batadal_datetime(raw.timestamps()[r]);
    rs += "," + std::to_string(raw.labels()[r]);
    for (const auto& s : series) rs += "," + csv_number(s[r]);
    rs += "\n";
  }
  write_file_atomic(dir / "rolling_std.csv", rs);

  json report = {
      {"config", config_echo(config)},
      {"seeds", seeds_json(config)},
      {"data", {{"paths", paths_json(config)},
                {"fingerprint", hex64(fingerprint)},
                {"rows", raw.size()},
                {"channels", raw.channel_count()}}},
      {"class_balance", {{"normal", balance.count0},
                         {"attack", balance.count1},
                         {"attack_fraction", balance.minority_fraction}}},
      {"split", split_json(split, raw.labels())},
      {"ranking", {{"k", ranking.k}, {"features", ranking_json(ranking)}}},
      {"rolling_std_window", window},
      {"files", {"correlation.csv", "rolling_std.csv"}},
  };
  write_file_atomic(dir / "explore.json", dump(report));
  say(log, fmt::format("wrote {}", (dir / "explore.json").string()));
  return report;
}

TrainResult run_training(const PipelineConfig& config, const Logger& log) {
  const PreparedData data = prepare_data(config, log);
  const Matrix x = data.engineered.values();
  const std::span<const int> y(data.engineered.labels());
  const auto& names = data.engineered.channel_names();
  const auto& train = data.split.train;
  const fs::path model_dir = config.output_dir / "models";

  std::vector<MemberKind> needed = config.models;
  bool any_stacked = false;
  std::set<MemberKind> stacked_kinds;
  for (const auto& run : config.ensembles) {
    for (auto k : run.members) {
      needed.push_back(k);
      if (run.combiner == Combiner::kStacked) stacked_kinds.insert(k);
    }
    any_stacked = any_stacked || run.combiner == Combiner::kStacked;
  }
  std::sort(needed.begin(), needed.end());
  needed.erase(std::unique(needed.begin(), needed.end()), needed.end());

  json manifest = {
      {"format_version", kModelFormatVersion},
      {"config", config_echo(config)},
      {"seeds", seeds_json(config)},
      {"data", {{"paths", paths_json(config)},
                {"fingerprint", hex64(data.fingerprint)},
                {"rows", data.raw.size()},
                {"attack_rows", class_balance(data.raw.labels()).count1}}},
      {"split", split_json(data.split, y)},
      {"features", {{"raw_channels", data.raw.channel_count()},
                    {"raw_columns_with_label", data.raw.channel_count() + 1},
                    {"base", data.spec.base_features},
                    {"added", data.spec.added_count()},
                    {"model_features", names.size()},
                    {"spec", to_json(data.spec)}}},
      {"ranking", data.ranking.features.empty() ? json(nullptr)
                                                 : ranking_json(data.ranking)},
  };

  const auto base_file = [&](MemberKind k) {
    return model_file_stem(to_string(k)) + ".json";
  };
  const auto make_file = [&](std::string name) {
    ModelFile f;
    f.name = std::move(name);
    f.features = names;
    f.feature_spec = data.spec;
    f.manifest = {{"config", manifest["config"]},
                  {"seeds", manifest["seeds"]},
                  {"data", manifest["data"]},
                  {"split", manifest["split"]}};
    return f;
  };

  std::map<MemberKind, MemberModel> members;
  json member_stats = json::object();
  for (auto kind : needed) {
    const std::string stage(to_string(kind));
    say(log, fmt::format("fitting {} on {} rows", stage, train.size()));
    const auto t0 = std::chrono::steady_clock::now();
    MemberModel m = run_stage(stage, [&] {
      return fit_member(kind, x, y, train, names, config.members);
    });
    const auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    say(log, fmt::format("{} fitted in {:.1f}s", stage, secs));
    member_stats[stage] = {{"file", base_file(kind)},
                           {"rows_before", m.rows_before},
                           {"minority_before", m.minority_before},
                           {"rows_after", m.rows_after},
                           {"minority_after", m.minority_after},
                           {"majority_after", m.rows_after - m.minority_after},
                           {"warnings", m.warnings}};
    ModelFile f = make_file(stage);
    f.member = m;
    save_model_file(model_dir / base_file(kind), f);
    members.emplace(kind, std::move(m));
  }
  manifest["members"] = member_stats;

  std::map<MemberKind, OofPredictions> oof;
  if (any_stacked) {
    const auto folds = run_stage("stack", [&] {
      return assign_folds(y, train, config.oof_folds, stage_seed(config, "stack"));
    });
    for (auto kind : stacked_kinds) {
      say(log, fmt::format("out-of-fold predictions for {} ({} folds)",
                           to_string(kind), config.oof_folds));
      oof.emplace(kind, run_stage("stack", [&] {
        return out_of_fold_predictions(kind, x, y, train, folds, names, config.members);
      }));
    }
  }

  json ensembles = json::array();
  std::vector<std::string> ensemble_names;
  for (const auto& run : config.ensembles) {
    StackConfig sc;
    sc.members = run.members;
    sc.combiner = run.combiner;
    sc.meta = config.meta;
    sc.oof_folds = config.oof_folds;
    sc.seed = stage_seed(config, "stack");
    std::vector<MemberModel> parts;
    std::vector<OofPredictions> parts_oof;
    std::vector<std::string> files;
    for (auto k : run.members) {
      parts.push_back(members.at(k));
      if (run.combiner == Combiner::kStacked) parts_oof.push_back(oof.at(k));
      files.push_back(base_file(k));
    }
    EnsembleModel e = run_stage("stack", [&] {
      return assemble_ensemble(sc, std::move(parts), parts_oof, y, train);
    });
    const std::string name = sc.name();
    ModelFile f = make_file(name);
    f.member_files = files;
    const std::string file = model_file_stem(name) + ".json";
    json entry = {{"name", name}, {"file", file}};
    if (run.combiner == Combiner::kStacked) {
      entry["meta"] = {{"weights", e.meta.weights},
                       {"intercept", e.meta.intercept},
                       {"iterations", e.meta.iterations}};
    }
    f.ensemble = std::move(e);
    save_model_file(model_dir / file, f);
    ensembles.push_back(entry);
    ensemble_names.push_back(name);
  }
  manifest["ensembles"] = ensembles;

  TrainResult result;
  for (auto k : config.models) result.models.emplace_back(to_string(k));
  result.models.insert(result.models.end(), ensemble_names.begin(), ensemble_names.end());
  json listing = json::array();
  for (const auto& n : result.models) {
    listing.push_back({{"name", n}, {"file", model_file_stem(n) + ".json"}});
  }
  manifest["models"] = listing;
  write_file_atomic(config.output_dir / "manifest.json", dump(manifest));
  say(log, fmt::format("wrote {} model(s) and manifest", result.models.size()));
  result.manifest = std::move(manifest);
  return result;
}

EvalSubset eval_subset_from_string(std::string_view text) {
  if (text == "valid" || text == "validation") return EvalSubset::kValidation;
  if (text == "train" || text == "training") return EvalSubset::kTraining;
  if (text == "all") return EvalSubset::kAll;
  throw InvalidArgument(fmt::format("unknown evaluation subset '{}'", text));
}

json metrics_report_json(const MetricsReport& r) {
  const auto& m = r.metrics;
  const auto cls = [](const ClassMetrics& c) {
    return json{{"precision", c.precision},
                {"recall", c.recall},
                {"f1", c.f1},
                {"support", c.support}};
  };
  return {{"model", r.model},
          {"in_sample", r.in_sample},
          {"sample", r.in_sample ? "in-sample" : "out-of-sample"},
          {"threshold", r.confusion.threshold},
          {"confusion", {{"tn", r.confusion.tn},
                         {"fp", r.confusion.fp},
                         {"fn", r.confusion.fn},
                         {"tp", r.confusion.tp}}},
          {"roc_auc", r.roc_auc},
          {"accuracy", m.accuracy},
          {"normal", cls(m.normal)},
          {"attack", cls(m.attack)},
          {"macro", {{"precision", m.macro_precision},
                     {"recall", m.macro_recall},
                     {"f1", m.macro_f1}}},
          {"weighted", {{"precision", m.weighted_precision},
                        {"recall", m.weighted_recall},
                        {"f1", m.weighted_f1}}},
          {"degenerate", m.degenerate},
          {"degeneracies", m.degeneracies}};
}

std::string comparison_table(std::span<const MetricsReport> reports) {
  std::size_t width = 5;
  for (const auto& r : reports) width = std::max(width, r.model.size());
  std::string out = fmt::format("{:<{}}  {:>7}  {:>8}  {:>9}  {:>7}  {:>7}  {}\n", "Model",
                                width, "AUC", "Accuracy", "Precision", "Recall", "F1",
                                "Notes");
  for (const auto& r : reports) {
    std::vector<std::string> notes;
    if (r.in_sample) notes.emplace_back("in-sample");
    if (r.metrics.degenerate) notes.emplace_back("degenerate");
    out += fmt::format("{:<{}}  {:>7.4f}  {:>8.4f}  {:>9.4f}  {:>7.4f}  {:>7.4f}  {}\n",
                       r.model, width, r.roc_auc, r.metrics.accuracy,
                       r.metrics.attack.precision, r.metrics.attack.recall,
                       r.metrics.attack.f1, fmt::join(notes, ","));
  }
  return out;
}

EvaluateResult run_evaluate(const PipelineConfig& config, const EvaluateOptions& options,
                            const Logger& log) {
  const json manifest = load_manifest(config);
  const TimeSeriesFrame raw = load_frame(config);
  const auto fingerprint = fingerprint_files(config.data_paths);
  const EvalRows split = recover_split(manifest, raw, fingerprint);

  std::vector<std::size_t> rows;
  bool in_sample = false;
  std::string subset = "validation";
  if (!split.same_data) {
    subset = "all (data differs from training run)";
  } else if (options.subset == EvalSubset::kTraining) {
    rows = split.train;
    in_sample = true;
    subset = "training";
  } else if (options.subset == EvalSubset::kAll) {
    rows = all_rows(raw.size());
    in_sample = true;
    subset = "all";
  }
  if (rows.empty()) rows = split.valid;
  const Labels labels = select(std::span<const int>(raw.labels()),
                               std::span<const std::size_t>(rows));

  std::vector<std::string> names = options.models;
  if (names.empty()) {
    for (const auto& m : manifest.at("models")) names.push_back(m.at("name"));
  }
  if (names.empty()) throw ConfigError("no models to evaluate");

  EvaluateResult result;
  std::map<std::string, TimeSeriesFrame> cache;
  json per_model = json::array();
  const fs::path report_dir = config.output_dir / "reports";
  for (const auto& name : names) {
    const ModelFile file =
        load_model_file(config.output_dir / "models" / (model_file_stem(name) + ".json"));
    const Matrix x = model_inputs(file, raw, cache);
    const auto probs = model_predict(file, x, rows);
    MetricsReport report = evaluate(name, labels, probs, config.threshold);
    report.in_sample = in_sample;
    say(log, fmt::format("{}: AUC {:.4f}  F1 {:.4f}", name, report.roc_auc,
                         report.metrics.attack.f1));
    json doc = metrics_report_json(report);
    doc["rows"] = rows.size();
    doc["subset"] = subset;
    doc["confusion_table"] = format_confusion(report.confusion);
    if (options.threshold_sweep) {
      json sweep = json::array();
      for (int k = 1; k <= 9; ++k) {
        const double t = k / 10.0;
        const auto cm = confusion(labels, probs, t);
        sweep.push_back({{"threshold", t},
                         {"tn", cm.tn},
                         {"fp", cm.fp},
                         {"fn", cm.fn},
                         {"tp", cm.tp}});
      }
      doc["threshold_sweep"] = sweep;
    }
    json full = {{"config", config_echo(config)},
                 {"seeds", seeds_json(config)},
                 {"training_seeds", file.manifest.at("seeds")},
                 {"data_fingerprint", hex64(fingerprint)},
                 {"report", doc}};
    write_file_atomic(report_dir / (model_file_stem(name) + ".json"), dump(full));
    per_model.push_back(doc);
    result.reports.push_back(std::move(report));
  }
  result.table = comparison_table(result.reports);
  result.document = {{"config", config_echo(config)},
                     {"seeds", seeds_json(config)},
                     {"data_fingerprint", hex64(fingerprint)},
                     {"subset", subset},
                     {"threshold", config.threshold},
                     {"models", per_model}};
  write_file_atomic(report_dir / "evaluation.json", dump(result.document));
  write_file_atomic(report_dir / "comparison.txt", result.table);
  return result;
}

ExplainResult run_explain(const PipelineConfig& config, const Logger& log) {
  const json manifest = load_manifest(config);
  const TimeSeriesFrame raw = load_frame(config);
  const auto fingerprint = fingerprint_files(config.data_paths);
  const EvalRows split = recover_split(manifest, raw, fingerprint);
  const std::string name = config.explain.model;
  const ModelFile file =
      load_model_file(config.output_dir / "models" / (model_file_stem(name) + ".json"));
  std::map<std::string, TimeSeriesFrame> cache;
  const Matrix x = model_inputs(file, raw, cache);

  const std::uint64_t seed = stage_seed(config, "explain");
  const auto& bg_pool = split.same_data ? split.train : split.valid;
  const auto bg_rows = sample_rows(bg_pool,
                                   static_cast<std::size_t>(config.explain.background_rows),
                                   derive_seed(seed, "background"));
  const auto eval_rows = sample_rows(split.valid,
                                     static_cast<std::size_t>(config.explain.eval_rows),
                                     derive_seed(seed, "rows"));
  const Matrix background = x.select_rows(bg_rows);
  say(log, fmt::format("explaining {} on {} rows, {} background rows, {} samples",
                       name, eval_rows.size(), bg_rows.size(), config.explain.samples));

  std::vector<Attribution> attributions;
  json flagged = json::array();
  for (std::size_t i = 0; i < eval_rows.size(); ++i) {
    const std::size_t r = eval_rows[i];
    const RowPredictor predictor = model_row_predictor(file, x, r);
    Attribution a = shapley_sampling(predictor, x.row(r), background,
                                     config.explain.samples, derive_seed(seed, r));
    a.feature_names = file.features;
    if (a.output >= config.threshold) {
      flagged.push_back({{"row", r},
                         {"timestamp", format_batadal_datetime(raw.timestamps()[r])},
                         {"label", raw.labels()[r]},
                         {"output", a.output},
                         {"baseline", a.baseline},
                         {"values", a.values},
                         {"std_errors", a.std_errors}});
    }
    attributions.push_back(std::move(a));
  }

  ExplainResult result;
  result.ranking = global_ranking(attributions);
  const auto top = std::min<std::size_t>(static_cast<std::size_t>(config.explain.top),
                                         result.ranking.size());
  std::size_t temporal = 0;
  json table = json::array();
  std::string csv = "rank,name,value,temporal\n";
  for (std::size_t k = 0; k < top; ++k) {
    const auto& e = result.ranking[k];
    const bool is_temporal = parse_derived_name(e.name).has_value();
    temporal += is_temporal ? 1 : 0;
    table.push_back({{"rank", e.rank},
                     {"name", e.name},
                     {"value", e.mean_abs},
                     {"temporal", is_temporal}});
    csv += fmt::format("{},{},{},{}\n", e.rank, e.name, csv_number(e.mean_abs),
                       is_temporal ? 1 : 0);
  }
  result.temporal_fraction =
      top == 0 ? 0.0 : static_cast<double>(temporal) / static_cast<double>(top);

  json all = json::array();
  for (const auto& e : result.ranking) {
    all.push_back({{"rank", e.rank}, {"name", e.name}, {"value", e.mean_abs}});
  }
  result.document = {{"config", config_echo(config)},
                     {"seeds", seeds_json(config)},
                     {"data_fingerprint", hex64(fingerprint)},
                     {"model", name},
                     {"estimator", "sampled interventional Shapley"},
                     {"rows", eval_rows},
                     {"background_rows", bg_rows.size()},
                     {"samples", config.explain.samples},
                     {"top", table},
                     {"temporal_fraction", result.temporal_fraction},
                     {"ranking", all},
                     {"flagged", flagged}};
  const fs::path dir = config.output_dir / "explain";
  write_file_atomic(dir / "attribution.json", dump(result.document));
  write_file_atomic(dir / "top_features.csv", csv);
  say(log, fmt::format("temporal share of top {}: {:.2f}", top, result.temporal_fraction));
  return result;
}

}  // namespace wdsguard
