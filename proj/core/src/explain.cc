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

#include "wdsguard/explain.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "wdsguard/errors.h"
#include "wdsguard/rng.h"

namespace wdsguard {

namespace {

std::vector<std::string> default_names(std::size_t d) {
  std::vector<std::string> out;
  for (std::size_t j = 0; j < d; ++j) out.push_back(fmt::format("f{}", j));
  return out;
}

void check_model(const BatchModel& model) {
  if (!model) throw InvalidArgument("model is not fitted");
}

}  // namespace

PermutationImportance permutation_importance(const BatchModel& model,
                                             const Matrix& x,
                                             std::span<const int> y,
                                             const MetricFn& metric,
                                             int n_repeats, std::uint64_t seed) {
  check_model(model);
  if (n_repeats < 1) throw InvalidArgument("n_repeats must be >= 1");
  if (y.size() != x.rows()) {
    throw InvalidArgument("label count does not match row count");
  }
  PermutationImportance out;
  out.baseline = metric(y, model(x));
  out.mean.assign(x.cols(), 0.0);
  out.stddev.assign(x.cols(), 0.0);
  Rng rng(seed);
  std::vector<std::size_t> perm(x.rows());
  for (std::size_t j = 0; j < x.cols(); ++j) {
    std::vector<double> drops;
    for (int r = 0; r < n_repeats; ++r) {
      std::iota(perm.begin(), perm.end(), std::size_t{0});
      rng.shuffle(std::span<std::size_t>(perm));
      Matrix shuffled = x;
      for (std::size_t i = 0; i < x.rows(); ++i) shuffled(i, j) = x(perm[i], j);
      drops.push_back(out.baseline - metric(y, model(shuffled)));
    }
    const double mean =
        std::accumulate(drops.begin(), drops.end(), 0.0) / static_cast<double>(n_repeats);
    double ss = 0.0;
    for (double v : drops) ss += (v - mean) * (v - mean);
    out.mean[j] = mean;
    out.stddev[j] = std::sqrt(ss / static_cast<double>(n_repeats));
  }
  return out;
}

Attribution shapley_sampling(const BatchModel& model, std::span<const double> x,
                             const Matrix& background, int n_samples,
                             std::uint64_t seed) {
  check_model(model);
  if (background.rows() == 0) throw InvalidArgument("background set is empty");
  if (background.cols() != x.size()) {
    throw InvalidArgument("background width does not match the explained row");
  }
  if (n_samples < 2) throw InvalidArgument("need at least 2 samples");
  const std::size_t d = x.size();
  const auto ns = static_cast<std::size_t>(n_samples);

  // Sample s occupies rows [s (d + 1), (s + 1)(d + 1)): the background row,
  // then one more feature switched to x per row.
  // Background rows are drawn in shuffled passes over the whole set, so when
  // n_samples is a multiple of the background size the estimate is exactly
  // efficient.
  Rng rng(seed);
  std::vector<std::vector<std::size_t>> orders(ns);
  Matrix walk(ns * (d + 1), d);
  std::vector<std::size_t> order(d);
  std::vector<std::size_t> pass(background.rows());
  for (std::size_t s = 0; s < ns; ++s) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(order));
    if (s % pass.size() == 0) {
      std::iota(pass.begin(), pass.end(), std::size_t{0});
      rng.shuffle(std::span<std::size_t>(pass));
    }
    const auto b = background.row(pass[s % pass.size()]);
    std::vector<double> z(b.begin(), b.end());
    std::copy(z.begin(), z.end(), walk.row(s * (d + 1)).begin());
    for (std::size_t k = 0; k < d; ++k) {
      z[order[k]] = x[order[k]];
      std::copy(z.begin(), z.end(), walk.row(s * (d + 1) + k + 1).begin());
    }
    orders[s] = order;
  }
  const auto f = model(walk);

  std::vector<double> sum(d, 0.0), sum_sq(d, 0.0);
  for (std::size_t s = 0; s < ns; ++s) {
    for (std::size_t k = 0; k < d; ++k) {
      const double delta = f[s * (d + 1) + k + 1] - f[s * (d + 1) + k];
      sum[orders[s][k]] += delta;
      sum_sq[orders[s][k]] += delta * delta;
    }
  }
  Attribution out;
  out.feature_names = default_names(d);
  out.samples = n_samples;
  out.values.resize(d);
  out.std_errors.resize(d);
  const double n = static_cast<double>(ns);
  for (std::size_t j = 0; j < d; ++j) {
    const double mean = sum[j] / n;
    const double var = std::max(0.0, (sum_sq[j] - n * mean * mean) / (n - 1.0));
    out.values[j] = mean;
    out.std_errors[j] = std::sqrt(var / n);
  }
  Matrix xm(1, d, std::vector<double>(x.begin(), x.end()));
  out.output = model(xm)[0];
  const auto fb = model(background);
  out.baseline = std::accumulate(fb.begin(), fb.end(), 0.0) /
                 static_cast<double>(background.rows());
  return out;
}

Attribution exact_shapley(const BatchModel& model, std::span<const double> x,
                          const Matrix& background,
                          std::span<const std::size_t> subset) {
  check_model(model);
  if (background.rows() == 0) throw InvalidArgument("background set is empty");
  if (background.cols() != x.size()) {
    throw InvalidArgument("background width does not match the explained row");
  }
  if (subset.size() > kMaxExactFeatures) {
    throw InvalidArgument(fmt::format(
        "exact Shapley supports at most {} features, got {}", kMaxExactFeatures,
        subset.size()));
  }
  for (std::size_t j : subset) {
    if (j >= x.size()) throw InvalidArgument("subset feature out of range");
  }
  const std::size_t m = subset.size();
  const std::size_t n_bg = background.rows();
  const std::size_t n_coalitions = std::size_t{1} << m;

  // value[mask] = mean over background rows of f with subset features in
  // mask taken from x and the remaining subset features from the background.
  Matrix rows(n_coalitions * n_bg, x.size());
  for (std::size_t mask = 0; mask < n_coalitions; ++mask) {
    for (std::size_t b = 0; b < n_bg; ++b) {
      auto row = rows.row(mask * n_bg + b);
      std::copy(x.begin(), x.end(), row.begin());
      for (std::size_t k = 0; k < m; ++k) {
        if (!(mask & (std::size_t{1} << k))) row[subset[k]] = background(b, subset[k]);
      }
    }
  }
  const auto f = model(rows);
  std::vector<double> value(n_coalitions, 0.0);
  for (std::size_t mask = 0; mask < n_coalitions; ++mask) {
    double s = 0.0;
    for (std::size_t b = 0; b < n_bg; ++b) s += f[mask * n_bg + b];
    value[mask] = s / static_cast<double>(n_bg);
  }

  // weight[s] = s! (m - s - 1)! / m!
  std::vector<double> weight(m, 0.0);
  for (std::size_t s = 0; s < m; ++s) {
    weight[s] = std::exp(std::lgamma(static_cast<double>(s) + 1.0) +
                         std::lgamma(static_cast<double>(m - s)) -
                         std::lgamma(static_cast<double>(m) + 1.0));
  }
  Attribution out;
  out.feature_names = default_names(m);
  out.values.assign(m, 0.0);
  out.std_errors.assign(m, 0.0);
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t bit = std::size_t{1} << k;
    double phi = 0.0;
    for (std::size_t mask = 0; mask < n_coalitions; ++mask) {
      if (mask & bit) continue;
      const auto size = static_cast<std::size_t>(std::popcount(mask));
      phi += weight[size] * (value[mask | bit] - value[mask]);
    }
    out.values[k] = phi;
  }
  out.baseline = value[0];
  out.output = value[n_coalitions - 1];
  return out;
}

std::vector<GlobalRankEntry> global_ranking(std::span<const Attribution> rows) {
  if (rows.empty()) return {};
  const std::size_t d = rows.front().values.size();
  std::vector<double> mean_abs(d, 0.0);
  for (const auto& a : rows) {
    if (a.values.size() != d) throw InvalidArgument("attribution widths differ");
    for (std::size_t j = 0; j < d; ++j) mean_abs[j] += std::abs(a.values[j]);
  }
  for (double& v : mean_abs) v /= static_cast<double>(rows.size());
  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return mean_abs[a] > mean_abs[b]; });
  std::vector<GlobalRankEntry> out;
  for (std::size_t r = 0; r < d; ++r) {
    const std::size_t j = order[r];
    const auto& names = rows.front().feature_names;
    out.push_back({j < names.size() ? names[j] : fmt::format("f{}", j), j,
                   mean_abs[j], static_cast<int>(r) + 1});
  }
  return out;
}

}  // namespace wdsguard
