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


#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "wdsguard/config.h"
#include "wdsguard/errors.h"
#include "wdsguard/model_io.h"
#include "wdsguard/pipeline.h"
#include "wdsguard/synthetic.h"

namespace wdsguard {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Trains small models on a synthetic frame once for the whole suite.
class PipelineTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    root_ = fs::temp_directory_path() / "wdsguard_pipeline_test";
    fs::remove_all(root_);
    fs::create_directories(root_);
    SyntheticConfig sc;
    sc.rows = 900;
    sc.attack_intervals = 5;
    frame_ = new TimeSeriesFrame(make_synthetic_batadal(sc));
    write_file_atomic(root_ / "data.csv", to_batadal_csv(*frame_));
    run_training(config(root_ / "run_a"));
  }

  static void TearDownTestSuite() {
    delete frame_;
    frame_ = nullptr;
    fs::remove_all(root_);
  }

  static PipelineConfig config(const fs::path& out, const fs::path& data = {}) {
    auto doc = default_config_json();
    merge_config(doc, json::parse(R"({
      "features": {"base": ["L_T1", "L_T7", "P_J317", "F_PU7"], "window": 3},
      "forest": {"n_trees": 8},
      "gbt": {"n_rounds": 10, "max_depth": 3},
      "lstm": {"hidden_units": 4, "epochs": 1, "seq_len": 4},
      "ensemble": {"oof_folds": 3},
      "explain": {"background_rows": 4, "eval_rows": 6, "samples": 8, "top": 5}
    })"));
    doc["data"]["paths"] = json::array({(data.empty() ? root_ / "data.csv" : data).string()});
    doc["output_dir"] = out.string();
    return resolve_config(doc);
  }

  static std::string slurp(const fs::path& p) { return read_file(p); }

  static fs::path root_;
  static TimeSeriesFrame* frame_;
};

fs::path PipelineTest::root_;
TimeSeriesFrame* PipelineTest::frame_ = nullptr;

TEST_F(PipelineTest, ExploreCorrelationDiagonalIsOne) {
  const auto out = root_ / "explore";
  const auto doc = run_explore(config(out));
  EXPECT_EQ(doc.at("data").at("rows"), frame_->size());
  std::ifstream in(out / "explore" / "correlation.csv");
  std::string line;
  std::getline(in, line);
  std::size_t i = 0;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    ASSERT_EQ(cells.size(), frame_->channel_count() + 1);
    const auto col = frame_->values().column(i);
    const bool constant = std::all_of(col.begin(), col.end(),
                                      [&](double v) { return v == col[0]; });
    if (!constant) EXPECT_NEAR(std::stod(cells[i + 1]), 1.0, 1e-12) << cells[0];
    ++i;
  }
  EXPECT_EQ(i, frame_->channel_count());
}

TEST_F(PipelineTest, ManifestListsEveryModel) {
  const auto manifest = json::parse(slurp(root_ / "run_a" / "manifest.json"));
  EXPECT_EQ(manifest.at("models").size(), 11u);
  // Raw channels plus five derived columns per base feature.
  EXPECT_EQ(manifest.at("features").at("model_features"), frame_->channel_count() + 4u * 5u);
  EXPECT_EQ(manifest.at("split").at("train_rows").get<std::size_t>() +
                manifest.at("split").at("valid_rows").get<std::size_t>(),
            frame_->size());
  for (const auto& m : manifest.at("models")) {
    EXPECT_TRUE(fs::exists(root_ / "run_a" / "models" / m.at("file").get<std::string>()));
  }
}

TEST_F(PipelineTest, RerunIsByteIdentical) {
  const auto b = root_ / "run_b";
  run_training(config(b));
  const auto a = root_ / "run_a";
  EXPECT_EQ(slurp(a / "manifest.json"), slurp(b / "manifest.json"));
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(a / "models")) {
    EXPECT_EQ(slurp(e.path()), slurp(b / "models" / e.path().filename()))
        << e.path().filename();
    ++files;
  }
  EXPECT_EQ(files, 11u);
}

TEST_F(PipelineTest, EvaluateMarksInSampleReportsAndSweeps) {
  const auto cfg = config(root_ / "run_a");
  EvaluateOptions valid;
  valid.models = {"forest", "stacked:forest+gbt+lstm"};
  valid.threshold_sweep = true;
  const auto v = run_evaluate(cfg, valid);
  ASSERT_EQ(v.reports.size(), 2u);
  for (const auto& r : v.reports) EXPECT_FALSE(r.in_sample);
  const auto report = json::parse(slurp(root_ / "run_a" / "reports" / "forest.json"));
  ASSERT_EQ(report.at("report").at("threshold_sweep").size(), 9u);
  EXPECT_DOUBLE_EQ(report.at("report").at("threshold_sweep")[0].at("threshold"), 0.1);
  const auto manifest = json::parse(slurp(root_ / "run_a" / "manifest.json"));
  EXPECT_EQ(report.at("report").at("rows"), manifest.at("split").at("valid_rows"));

  EvaluateOptions train;
  train.models = {"gbt"};
  train.subset = EvalSubset::kTraining;
  const auto t = run_evaluate(cfg, train);
  EXPECT_TRUE(t.reports[0].in_sample);
  EXPECT_NE(t.table.find("in-sample"), std::string::npos);
}

TEST_F(PipelineTest, SchemaMismatchNamesTheMissingColumn) {
  std::vector<std::string> names;
  for (const auto& n : frame_->channel_names()) {
    if (n != "P_J317") names.push_back(n);
  }
  const TimeSeriesFrame cut(frame_->timestamps(), names, frame_->select_columns(names),
                            frame_->labels());
  const auto path = root_ / "cut.csv";
  write_file_atomic(path, to_batadal_csv(cut));
  EvaluateOptions opts;
  opts.models = {"gbt"};
  try {
    run_evaluate(config(root_ / "run_a", path), opts);
    FAIL() << "expected a schema error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("P_J317"), std::string::npos) << e.what();
  }
}

TEST_F(PipelineTest, ExplainAttributionsAreEfficient) {
  const auto result = run_explain(config(root_ / "run_a"));
  EXPECT_LE(result.document.at("top").size(), 5u);
  EXPECT_EQ(result.ranking.size(), frame_->channel_count() + 4u * 5u);
  EXPECT_GE(result.temporal_fraction, 0.0);
  EXPECT_LE(result.temporal_fraction, 1.0);
  for (const auto& row : result.document.at("flagged")) {
    double sum = 0.0;
    for (double v : row.at("values")) sum += v;
    EXPECT_NEAR(sum, row.at("output").get<double>() - row.at("baseline").get<double>(),
                1e-9);
  }
  EXPECT_TRUE(fs::exists(root_ / "run_a" / "explain" / "attribution.json"));
}

TEST_F(PipelineTest, MissingModelIsAnError) {
  EvaluateOptions opts;
  opts.models = {"nothing"};
  EXPECT_ANY_THROW(run_evaluate(config(root_ / "run_a"), opts));
  EXPECT_THROW(run_evaluate(config(root_ / "empty"), {}), Error);
}

}  // namespace
}  // namespace wdsguard
