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

#ifndef WDSGUARD_FEATURES_H_
#define WDSGUARD_FEATURES_H_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wdsguard/dataset.h"
#include "wdsguard/forest.h"
#include "wdsguard/matrix.h"

namespace wdsguard {

// Pearson correlation between every pair of channels. Constant columns get 0
// off the diagonal and 1 on it.
Matrix pearson_correlation_matrix(const Matrix& columns);
Matrix pearson_correlation_matrix(const TimeSeriesFrame& frame);
double pearson_correlation(std::span<const double> a, std::span<const double> b);

// Trailing-window statistics. Position t covers [t - window + 1, t]; the
// first window - 1 positions are back-filled from the first defined value.
std::vector<double> rolling_mean(std::span<const double> series, int window);
// Sample standard deviation (ddof = 1); requires window >= 2.
std::vector<double> rolling_std(std::span<const double> series, int window);

enum class ImportanceTier { kHigh, kMedium, kLow };
std::string_view to_string(ImportanceTier tier);

struct RankedFeature {
  std::string name;
  double score = 0.0;
  ImportanceTier tier = ImportanceTier::kLow;
};

struct RankedFeatures {
  // Non-increasing score order.
  std::vector<RankedFeature> features;
  int k = 0;

  std::vector<std::string> top_names() const;
};

// Fits a forest on (x, y) and ranks every column by impurity importance.
// Top k are High; anything scoring at least half the k-th score is Medium.
RankedFeatures rank_features_by_importance(
    const Matrix& x, std::span<const int> y,
    std::span<const std::string> names, const ForestConfig& config, int k);

enum class Recipe { kLag1, kLag3, kDiff1, kRollingMean, kRollingStd };

struct FeatureSpec {
  std::vector<std::string> base_features;
  bool lag1 = true;
  bool lag3 = true;
  bool diff1 = true;
  bool rolling_mean = true;
  bool rolling_std = true;
  int window = 5;

  std::vector<Recipe> recipes() const;
  std::size_t added_count() const {
    return base_features.size() * recipes().size();
  }

  friend bool operator==(const FeatureSpec&, const FeatureSpec&) = default;
};

std::string derived_name(std::string_view base, Recipe recipe, int window);

struct DerivedFeature {
  std::string base;
  Recipe recipe;
  int window = 0;
};
// Inverse of derived_name; nullopt for raw channel names.
std::optional<DerivedFeature> parse_derived_name(std::string_view name);

// Names of the columns engineer_temporal appends, in order.
std::vector<std::string> engineered_names(const FeatureSpec& spec);

// Appends the spec's lag/difference/rolling columns for every base feature.
// Leading undefined cells are forward- then back-filled.
TimeSeriesFrame engineer_temporal(const TimeSeriesFrame& frame,
                                  const FeatureSpec& spec);

}  // namespace wdsguard

#endif  // WDSGUARD_FEATURES_H_
