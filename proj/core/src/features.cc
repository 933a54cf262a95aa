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

#include "wdsguard/features.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "wdsguard/errors.h"

namespace wdsguard {

namespace {

constexpr double kUndefined = std::numeric_limits<double>::quiet_NaN();

void forward_back_fill(std::vector<double>& v) {
  double last = kUndefined;
  for (double& x : v) {
    if (std::isnan(x)) {
      x = last;
    } else {
      last = x;
    }
  }
  last = kUndefined;
  for (auto it = v.rbegin(); it != v.rend(); ++it) {
    if (std::isnan(*it)) {
      *it = last;
    } else {
      last = *it;
    }
  }
}

void check_window(std::size_t length, int window) {
  if (window < 1) throw InvalidArgument("rolling window must be >= 1");
  if (static_cast<std::size_t>(window) > length) {
    throw InvalidArgument(fmt::format(
        "rolling window {} is longer than the series ({})", window, length));
  }
}

}  // namespace

double pearson_correlation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidArgument("series lengths differ");
  if (a.size() < 2) throw InvalidArgument("correlation needs at least 2 rows");
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

Matrix pearson_correlation_matrix(const Matrix& columns) {
  if (columns.rows() < 2) {
    throw InvalidArgument("correlation needs at least 2 rows");
  }
  const std::size_t d = columns.cols();
  std::vector<std::vector<double>> cols(d);
  for (std::size_t j = 0; j < d; ++j) cols[j] = columns.column(j);
  Matrix out(d, d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    out(i, i) = 1.0;
    for (std::size_t j = i + 1; j < d; ++j) {
      const double r = pearson_correlation(cols[i], cols[j]);
      out(i, j) = r;
      out(j, i) = r;
    }
  }
  return out;
}

Matrix pearson_correlation_matrix(const TimeSeriesFrame& frame) {
  return pearson_correlation_matrix(frame.values());
}

std::vector<double> rolling_mean(std::span<const double> series, int window) {
  check_window(series.size(), window);
  const auto w = static_cast<std::size_t>(window);
  std::vector<double> out(series.size(), kUndefined);
  for (std::size_t t = w - 1; t < series.size(); ++t) {
    double s = 0.0;
    for (std::size_t k = t + 1 - w; k <= t; ++k) s += series[k];
    out[t] = s / static_cast<double>(w);
  }
  forward_back_fill(out);
  return out;
}

std::vector<double> rolling_std(std::span<const double> series, int window) {
  if (window < 2) throw InvalidArgument("rolling_std needs window >= 2");
  check_window(series.size(), window);
  const auto w = static_cast<std::size_t>(window);
  std::vector<double> out(series.size(), kUndefined);
  for (std::size_t t = w - 1; t < series.size(); ++t) {
    double mean = 0.0;
    for (std::size_t k = t + 1 - w; k <= t; ++k) mean += series[k];
    mean /= static_cast<double>(w);
    double ss = 0.0;
    for (std::size_t k = t + 1 - w; k <= t; ++k) {
      const double dev = series[k] - mean;
      ss += dev * dev;
    }
    out[t] = std::sqrt(ss / static_cast<double>(w - 1));
  }
  forward_back_fill(out);
  return out;
}

std::string_view to_string(ImportanceTier tier) {
  switch (tier) {
    case ImportanceTier::kHigh:
      return "High";
    case ImportanceTier::kMedium:
      return "Medium";
    case ImportanceTier::kLow:
      return "Low";
  }
  return "Low";
}

std::vector<std::string> RankedFeatures::top_names() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < features.size() && i < static_cast<std::size_t>(k); ++i) {
    out.push_back(features[i].name);
  }
  return out;
}

RankedFeatures rank_features_by_importance(
    const Matrix& x, std::span<const int> y,
    std::span<const std::string> names, const ForestConfig& config, int k) {
  if (names.size() != x.cols()) {
    throw InvalidArgument("feature name count does not match matrix width");
  }
  if (k < 1 || static_cast<std::size_t>(k) > names.size()) {
    throw InvalidArgument(fmt::format(
        "k = {} outside [1, {}] for feature ranking", k, names.size()));
  }
  const auto model = fit_forest(
      x, y, config, std::vector<std::string>(names.begin(), names.end()));
  const auto scores = impurity_importance(model);

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });

  RankedFeatures out;
  out.k = k;
  const double kth = scores[order[static_cast<std::size_t>(k) - 1]];
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    const std::size_t j = order[rank];
    ImportanceTier tier = ImportanceTier::kLow;
    if (rank < static_cast<std::size_t>(k)) {
      tier = ImportanceTier::kHigh;
    } else if (scores[j] >= 0.5 * kth) {
      tier = ImportanceTier::kMedium;
    }
    out.features.push_back({names[j], scores[j], tier});
  }
  return out;
}

std::vector<Recipe> FeatureSpec::recipes() const {
  std::vector<Recipe> out;
  if (lag1) out.push_back(Recipe::kLag1);
  if (lag3) out.push_back(Recipe::kLag3);
  if (diff1) out.push_back(Recipe::kDiff1);
  if (rolling_mean) out.push_back(Recipe::kRollingMean);
  if (rolling_std) out.push_back(Recipe::kRollingStd);
  return out;
}

std::string derived_name(std::string_view base, Recipe recipe, int window) {
  switch (recipe) {
    case Recipe::kLag1:
      return fmt::format("{}_lag1", base);
    case Recipe::kLag3:
      return fmt::format("{}_lag3", base);
    case Recipe::kDiff1:
      return fmt::format("{}_d1", base);
    case Recipe::kRollingMean:
      return fmt::format("{}_mean_{}", base, window);
    case Recipe::kRollingStd:
      return fmt::format("{}_std_{}", base, window);
  }
  throw InvalidArgument("unknown recipe");
}

std::optional<DerivedFeature> parse_derived_name(std::string_view name) {
  auto strip = [&](std::string_view suffix) -> std::optional<std::string> {
    if (name.size() > suffix.size() && name.ends_with(suffix)) {
      return std::string(name.substr(0, name.size() - suffix.size()));
    }
    return std::nullopt;
  };
  if (auto base = strip("_lag1")) return DerivedFeature{*base, Recipe::kLag1, 0};
  if (auto base = strip("_lag3")) return DerivedFeature{*base, Recipe::kLag3, 0};
  if (auto base = strip("_d1")) return DerivedFeature{*base, Recipe::kDiff1, 0};
  for (auto [tag, recipe] : {std::pair{std::string_view("_mean_"), Recipe::kRollingMean},
                             std::pair{std::string_view("_std_"), Recipe::kRollingStd}}) {
    const auto pos = name.rfind(tag);
    if (pos == std::string_view::npos || pos == 0) continue;
    const auto digits = name.substr(pos + tag.size());
    if (digits.empty() ||
        !std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      continue;
    }
    return DerivedFeature{std::string(name.substr(0, pos)), recipe,
                          std::stoi(std::string(digits))};
  }
  return std::nullopt;
}

std::vector<std::string> engineered_names(const FeatureSpec& spec) {
  std::vector<std::string> out;
  const auto recipes = spec.recipes();
  for (const auto& base : spec.base_features) {
    for (Recipe r : recipes) out.push_back(derived_name(base, r, spec.window));
  }
  return out;
}

TimeSeriesFrame engineer_temporal(const TimeSeriesFrame& frame,
                                  const FeatureSpec& spec) {
  const bool rolling = spec.rolling_mean || spec.rolling_std;
  if (rolling) {
    if (spec.window < 2) throw InvalidArgument("rolling window must be >= 2");
    if (static_cast<std::size_t>(spec.window) > frame.size()) {
      throw InvalidArgument(fmt::format(
          "rolling window {} is longer than the frame ({} rows)", spec.window,
          frame.size()));
    }
  }
  for (const auto& base : spec.base_features) {
    if (!frame.find_channel(base)) {
      throw InvalidArgument(fmt::format("unknown base feature '{}'", base));
    }
  }
  const auto names = engineered_names(spec);
  for (const auto& n : names) {
    if (frame.find_channel(n)) {
      throw InvalidArgument(fmt::format("derived feature '{}' already exists", n));
    }
  }

  const std::size_t n = frame.size();
  auto lag = [&](const std::vector<double>& f, std::size_t k) {
    std::vector<double> out(n, kUndefined);
    for (std::size_t t = k; t < n; ++t) out[t] = f[t - k];
    forward_back_fill(out);
    return out;
  };

  std::vector<std::vector<double>> columns;
  columns.reserve(names.size());
  for (const auto& base : spec.base_features) {
    const auto f = frame.column(base);
    for (Recipe r : spec.recipes()) {
      switch (r) {
        case Recipe::kLag1:
          columns.push_back(lag(f, 1));
          break;
        case Recipe::kLag3:
          columns.push_back(lag(f, 3));
          break;
        case Recipe::kDiff1: {
          std::vector<double> d(n, kUndefined);
          for (std::size_t t = 1; t < n; ++t) d[t] = f[t] - f[t - 1];
          forward_back_fill(d);
          columns.push_back(std::move(d));
          break;
        }
        case Recipe::kRollingMean:
          columns.push_back(rolling_mean(f, spec.window));
          break;
        case Recipe::kRollingStd:
          columns.push_back(rolling_std(f, spec.window));
          break;
      }
    }
  }
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (std::any_of(columns[c].begin(), columns[c].end(),
                    [](double v) { return std::isnan(v); })) {
      throw InvalidArgument(fmt::format(
          "frame of {} rows is too short to define '{}'", n, names[c]));
    }
  }
  return frame.with_channels(names, columns);
}

}  // namespace wdsguard
