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

#ifndef WDSGUARD_EXPLAIN_H_
#define WDSGUARD_EXPLAIN_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "wdsguard/matrix.h"

namespace wdsguard {

// Maps a batch of feature rows to one model output per row.
using BatchModel = std::function<std::vector<double>(const Matrix&)>;

// Scores a prediction vector against labels, higher is better.
using MetricFn =
    std::function<double(std::span<const int>, std::span<const double>)>;

struct PermutationImportance {
  std::vector<double> mean;
  std::vector<double> stddev;
  double baseline = 0.0;
};

PermutationImportance permutation_importance(const BatchModel& model,
                                             const Matrix& x,
                                             std::span<const int> y,
                                             const MetricFn& metric,
                                             int n_repeats, std::uint64_t seed);

struct Attribution {
  std::vector<std::string> feature_names;
  std::vector<double> values;
  // Monte-Carlo standard errors; zeros for exact attributions.
  std::vector<double> std_errors;
  // Expected model output with the explained features drawn from the
  // background set.
  double baseline = 0.0;
  double output = 0.0;
  int samples = 0;
};

// Permutation-sampling estimate of interventional Shapley values. Each sample
// draws a feature ordering and a background row, then walks from the
// background row to x one feature at a time.
Attribution shapley_sampling(const BatchModel& model, std::span<const double> x,
                             const Matrix& background, int n_samples,
                             std::uint64_t seed);

inline constexpr std::size_t kMaxExactFeatures = 12;

// Exact interventional Shapley values over `subset` (at most
// kMaxExactFeatures columns) by full subset enumeration. Columns outside the
// subset stay at x.
Attribution exact_shapley(const BatchModel& model, std::span<const double> x,
                          const Matrix& background,
                          std::span<const std::size_t> subset);

struct GlobalRankEntry {
  std::string name;
  std::size_t feature = 0;
  double mean_abs = 0.0;
  int rank = 0;
};

// Features ordered by mean |attribution| across the given attributions.
std::vector<GlobalRankEntry> global_ranking(std::span<const Attribution> rows);

}  // namespace wdsguard

#endif  // WDSGUARD_EXPLAIN_H_
