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


#include <filesystem>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "wdsguard/config.h"
#include "wdsguard/errors.h"
#include "wdsguard/model_io.h"
#include "wdsguard/synthetic.h"

namespace wdsguard {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path scratch_dir() {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  const fs::path dir = fs::temp_directory_path() /
                       (std::string("wdsguard_") + info->test_suite_name() + "_" + info->name());
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

TEST(Config, DefaultsResolve) {
  const auto c = resolve_config(default_config_json());
  EXPECT_EQ(c.seed, 42u);
  EXPECT_DOUBLE_EQ(c.split_ratio, 0.8);
  EXPECT_EQ(c.top_k, 10);
  EXPECT_EQ(c.members.forest.n_trees, 300);
  EXPECT_EQ(c.members.gbt.n_rounds, 500);
  EXPECT_EQ(c.members.lstm.hidden_units, 64);
  EXPECT_EQ(c.models.size(), 3u);
  EXPECT_EQ(c.ensembles.size(), 8u);
}

TEST(Config, UnknownKeyIsRejected) {
  auto doc = default_config_json();
  EXPECT_THROW(merge_config(doc, json{{"forest", {{"n_tree", 5}}}}), ConfigError);
  EXPECT_THROW(merge_config(doc, json{{"bogus", 1}}), ConfigError);
  merge_config(doc, json{{"forest", {{"n_trees", 5}}}});
  EXPECT_EQ(resolve_config(doc).members.forest.n_trees, 5);
}

TEST(Config, EnvironmentOverridesFile) {
  auto doc = default_config_json();
  merge_config(doc, json{{"gbt", {{"learning_rate", 0.2}}}});
  apply_env_overrides(doc, {{"WDSGUARD_GBT__LEARNING_RATE", "0.3"},
                            {"WDSGUARD_OUTPUT_DIR", "elsewhere"}});
  const auto c = resolve_config(doc);
  EXPECT_DOUBLE_EQ(c.members.gbt.learning_rate, 0.3);
  EXPECT_EQ(c.output_dir, fs::path("elsewhere"));
  EXPECT_THROW(apply_env_overrides(doc, {{"WDSGUARD_NOPE", "1"}}), ConfigError);
}

TEST(Config, SetPathAndValidation) {
  auto doc = default_config_json();
  set_config_path(doc, "lstm.epochs", 3);
  EXPECT_EQ(resolve_config(doc).members.lstm.epochs, 3);
  EXPECT_THROW(set_config_path(doc, "lstm.epoch", 3), ConfigError);
  set_config_path(doc, "split.ratio", 1.5);
  EXPECT_THROW(resolve_config(doc), ConfigError);
}

TEST(Config, NoModelsIsAConfigError) {
  auto doc = default_config_json();
  doc["models"] = json::array();
  doc["ensemble"]["runs"] = json::array();
  try {
    resolve_config(doc);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("no models"), std::string::npos);
    EXPECT_EQ(static_cast<int>(e.kind()), 2);
  }
}

class ModelRoundTrip : public ::testing::Test {
 protected:
  void SetUp() override {
    SyntheticConfig sc;
    sc.rows = 600;
    sc.attack_intervals = 4;
    const auto frame = make_synthetic_batadal(sc);
    names_ = {"L_T1", "L_T7", "P_J317", "P_J415", "F_PU7", "S_PU7"};
    x_ = frame.select_columns(names_);
    y_ = frame.labels();
    train_.resize(500);
    std::iota(train_.begin(), train_.end(), 0);
    rows_.resize(100);
    std::iota(rows_.begin(), rows_.end(), 500);
    cfg_.forest.n_trees = 10;
    cfg_.gbt.n_rounds = 15;
    cfg_.lstm.hidden_units = 6;
    cfg_.lstm.epochs = 2;
    cfg_.lstm.seq_len = 4;
  }

  ModelFile member_file(MemberKind kind) const {
    ModelFile f;
    f.name = std::string(to_string(kind));
    f.features = names_;
    f.member = fit_member(kind, x_, y_, train_, names_, cfg_);
    return f;
  }

  std::vector<std::string> names_;
  Matrix x_;
  Labels y_;
  std::vector<std::size_t> train_;
  std::vector<std::size_t> rows_;
  MemberConfig cfg_;
};

TEST_F(ModelRoundTrip, MembersPredictBitwiseIdentically) {
  const auto dir = scratch_dir();
  for (auto kind : {MemberKind::kForest, MemberKind::kGbt, MemberKind::kLstm}) {
    const auto f = member_file(kind);
    const auto path = dir / (f.name + ".json");
    save_model_file(path, f);
    const auto back = load_model_file(path);
    EXPECT_EQ(back.kind(), f.name);
    const auto a = model_predict(f, x_, rows_);
    const auto b = model_predict(back, x_, rows_);
    ASSERT_EQ(a.size(), 100u);
    EXPECT_EQ(a, b) << f.name;
  }
}

TEST_F(ModelRoundTrip, EnsembleReloadsMembersFromDisk) {
  const auto dir = scratch_dir();
  std::vector<MemberModel> members;
  std::vector<std::string> files;
  for (auto kind : {MemberKind::kForest, MemberKind::kGbt}) {
    auto f = member_file(kind);
    files.push_back(f.name + ".json");
    save_model_file(dir / files.back(), f);
    members.push_back(*f.member);
  }
  StackConfig sc;
  sc.members = {MemberKind::kForest, MemberKind::kGbt};
  sc.oof_folds = 3;
  sc.seed = 5;
  const auto folds = assign_folds(y_, train_, 3, 5);
  std::vector<OofPredictions> oof;
  for (auto k : sc.members) {
    oof.push_back(out_of_fold_predictions(k, x_, y_, train_, folds, names_, cfg_));
  }
  ModelFile e;
  e.name = sc.name();
  e.features = names_;
  e.member_files = files;
  e.ensemble = assemble_ensemble(sc, members, oof, y_, train_);
  save_model_file(dir / "stack.json", e);
  const auto back = load_model_file(dir / "stack.json");
  EXPECT_EQ(back.kind(), "ensemble");
  EXPECT_EQ(model_predict(e, x_, rows_), model_predict(back, x_, rows_));
}

TEST_F(ModelRoundTrip, NewerFormatIsRejected) {
  const auto dir = scratch_dir();
  auto doc = model_file_json(member_file(MemberKind::kGbt));
  doc["format_version"] = kModelFormatVersion + 1;
  std::ofstream(dir / "future.json") << doc.dump();
  EXPECT_THROW(load_model_file(dir / "future.json"), DataError);
  std::ofstream(dir / "broken.json") << "{not json";
  EXPECT_THROW(load_model_file(dir / "broken.json"), DataError);
}

TEST(ModelFileStem, ReplacesColons) {
  EXPECT_EQ(model_file_stem("stack:forest+gbt"), "stack_forest+gbt");
}

}  // namespace
}  // namespace wdsguard
