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


#include <cmath>
#include <string>
#include <vector>

#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include "wdsguard/dataset.h"
#include "wdsguard/errors.h"
#include "wdsguard/rng.h"
#include "wdsguard/synthetic.h"

namespace wdsguard {
namespace {

std::string header(std::string_view flag = "ATT_FLAG") {
  std::string h = "DATETIME";
  for (auto s : kBatadalSensors) h += "," + std::string(s);
  return h + "," + std::string(flag) + "\n";
}

std::string data_row(std::string_view when, double v, std::string_view flag) {
  std::string r(when);
  for (std::size_t i = 0; i < kBatadalSensors.size(); ++i) r += "," + std::to_string(v + i);
  return r + "," + std::string(flag) + "\n";
}

TEST(LoadBatadal, SingleRowFile) {
  const auto frame = parse_batadal(header() + data_row("06/01/14 00", 1.0, "0"), "one.csv");
  EXPECT_EQ(frame.size(), 1u);
  EXPECT_EQ(frame.labels().size(), 1u);
  EXPECT_EQ(frame.channel_count(), 43u);
  EXPECT_DOUBLE_EQ(frame.values()(0, 2), 3.0);
}

TEST(LoadBatadal, FlagSpellingsAndUnlabeledHours) {
  const std::string text = header(" Attack Flag ") + data_row("06/01/14 00", 0, "-999") +
                           data_row("06/01/14 01", 0, " 1") + data_row("06/01/14 02", 0, "0");
  const auto frame = parse_batadal(text, "f.csv");
  EXPECT_THAT(frame.labels(), ::testing::ElementsAre(0, 1, 0));
}

TEST(LoadBatadal, MissingFlagColumnNamesIt) {
  std::string h = "DATETIME";
  for (auto s : kBatadalSensors) h += "," + std::string(s);
  std::string row = "06/01/14 00";
  for (std::size_t i = 0; i < kBatadalSensors.size(); ++i) row += ",1";
  try {
    parse_batadal(h + "\n" + row + "\n", "noflag.csv");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_THAT(e.what(), ::testing::HasSubstr("ATT_FLAG"));
  }
}

TEST(LoadBatadal, MissingSensorNamesIt) {
  const std::string text = "DATETIME,L_T1,ATT_FLAG\n06/01/14 00,1,0\n";
  try {
    parse_batadal(text, "short.csv");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_THAT(e.what(), ::testing::HasSubstr("L_T2"));
  }
}

TEST(LoadBatadal, BadCellCarriesLineContext) {
  std::string text = header() + data_row("06/01/14 00", 0, "0");
  std::string bad = data_row("06/01/14 01", 0, "0");
  bad.replace(bad.find(",0.000000"), 9, ",oops");
  text += bad;
  try {
    parse_batadal(text, "bad.csv");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_THAT(e.what(), ::testing::HasSubstr("bad.csv:3"));
  }
}

TEST(LoadBatadal, RejectsNonIncreasingTimestamps) {
  const std::string text =
      header() + data_row("06/01/14 01", 0, "0") + data_row("06/01/14 00", 0, "0");
  EXPECT_THROW(parse_batadal(text, "order.csv"), DataError);
}

TEST(LoadBatadal, CsvRoundTrip) {
  SyntheticConfig cfg;
  cfg.rows = 300;
  cfg.attack_intervals = 2;
  const auto frame = make_synthetic_batadal(cfg);
  const auto back = parse_batadal(to_batadal_csv(frame), "rt.csv");
  EXPECT_EQ(back.timestamps(), frame.timestamps());
  EXPECT_EQ(back.labels(), frame.labels());
  EXPECT_TRUE(back.values() == frame.values());
}

TEST(Datetime, BothFormats) {
  const auto a = parse_batadal_datetime("06/01/14 05");
  const auto b = parse_batadal_datetime("06/01/2014 05:00");
  ASSERT_TRUE(a && b);
  EXPECT_EQ(*a, *b);
  EXPECT_EQ(format_batadal_datetime(*a), "06/01/14 05");
  EXPECT_FALSE(parse_batadal_datetime("2014-01-06"));
  EXPECT_FALSE(parse_batadal_datetime("32/01/14 00"));
}

TEST(ClassBalance, Examples) {
  const auto zeros = class_balance(std::vector<int>(10, 0));
  EXPECT_EQ(zeros.count0, 10u);
  EXPECT_EQ(zeros.count1, 0u);
  EXPECT_DOUBLE_EQ(zeros.minority_fraction, 0.0);
  const auto alt = class_balance(std::vector<int>{0, 1, 0, 1});
  EXPECT_EQ(alt.count0, 2u);
  EXPECT_EQ(alt.count1, 2u);
  EXPECT_DOUBLE_EQ(alt.minority_fraction, 0.5);
}

TEST(StratifiedSplit, TenRowsFivePerClass) {
  const std::vector<int> y{0, 1, 0, 1, 0, 1, 0, 1, 0, 1};
  const auto s = stratified_split(y, 0.8, 3);
  ASSERT_EQ(s.train.size(), 8u);
  ASSERT_EQ(s.valid.size(), 2u);
  int valid_pos = 0;
  for (auto r : s.valid) valid_pos += y[r];
  EXPECT_EQ(valid_pos, 1);
}

TEST(StratifiedSplit, PerClassRoundingAndDeterminism) {
  // Class counts of the public training files.
  std::vector<int> y(12938, 0);
  for (int i = 0; i < 488; ++i) y[static_cast<std::size_t>(i) * 26] = 1;
  const auto a = stratified_split(y, 0.8, 11);
  const auto b = stratified_split(y, 0.8, 11);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.valid, b.valid);
  EXPECT_EQ(a.train.size(), 10350u);
  EXPECT_EQ(a.valid.size(), 2588u);
  std::size_t valid_pos = 0;
  for (auto r : a.valid) valid_pos += static_cast<std::size_t>(y[r]);
  EXPECT_EQ(valid_pos, 488u - static_cast<std::size_t>(std::llround(0.8 * 488)));

  std::vector<bool> seen(y.size(), false);
  for (auto r : a.train) seen[r] = true;
  for (auto r : a.valid) {
    EXPECT_FALSE(seen[r]);
    seen[r] = true;
  }
  EXPECT_EQ(std::count(seen.begin(), seen.end(), true), 12938);

  const auto c = stratified_split(y, 0.8, 12);
  EXPECT_NE(a.valid, c.valid);
}

TEST(Scaler, ConstantColumnZScoresToZero) {
  Matrix x(4, 1, {3, 3, 3, 3});
  const std::vector<std::string> cols{"c"};
  const auto p = fit_scaler(x, cols, ScalerKind::kZScore);
  const auto z = apply_scaler(p, x, cols);
  for (std::size_t r = 0; r < 4; ++r) EXPECT_EQ(z(r, 0), 0.0);
}

TEST(Scaler, MinMaxMapsToUnitInterval) {
  Matrix x(2, 1, {0, 10});
  const std::vector<std::string> cols{"c"};
  const auto p = fit_scaler(x, cols, ScalerKind::kMinMax);
  const auto m = apply_scaler(p, x, cols);
  EXPECT_DOUBLE_EQ(m(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(m(1, 0), 1.0);
}

TEST(Scaler, ZScoreMoments) {
  Rng rng(5);
  Matrix x(50, 2);
  for (std::size_t r = 0; r < 50; ++r) {
    x(r, 0) = 10 + 3 * rng.normal();
    x(r, 1) = -2 + 0.1 * rng.normal();
  }
  const std::vector<std::string> cols{"a", "b"};
  const auto z = apply_scaler(fit_scaler(x, cols, ScalerKind::kZScore), x, cols);
  for (std::size_t c = 0; c < 2; ++c) {
    double mean = 0, sq = 0;
    for (std::size_t r = 0; r < 50; ++r) mean += z(r, c) / 50;
    for (std::size_t r = 0; r < 50; ++r) sq += (z(r, c) - mean) * (z(r, c) - mean) / 50;
    EXPECT_NEAR(mean, 0.0, 1e-12);
    EXPECT_NEAR(sq, 1.0, 1e-12);
  }
}

TEST(Scaler, InvertRoundTrip) {
  Rng rng(9);
  Matrix x(5, 3);
  for (auto& v : x.data()) v = rng.normal() * 4 + 1;
  const std::vector<std::string> cols{"a", "b", "c"};
  for (auto kind : {ScalerKind::kZScore, ScalerKind::kMinMax}) {
    const auto p = fit_scaler(x, cols, kind);
    const auto back = invert_scaler(p, apply_scaler(p, x, cols), cols);
    for (std::size_t i = 0; i < x.data().size(); ++i) {
      EXPECT_NEAR(back.data()[i], x.data()[i], 1e-10);
    }
  }
}

TEST(Scaler, ColumnMismatchIsAnError) {
  Matrix x(2, 1, {0, 1});
  const std::vector<std::string> cols{"a"};
  const std::vector<std::string> other{"b"};
  const auto p = fit_scaler(x, cols, ScalerKind::kZScore);
  EXPECT_ANY_THROW(apply_scaler(p, x, other));
}

TEST(Fingerprint, KnownFnvVectors) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
}

}  // namespace
}  // namespace wdsguard
