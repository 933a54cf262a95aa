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

#include "wdsguard/resampling.h"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "wdsguard/errors.h"
#include "wdsguard/rng.h"

namespace wdsguard {

std::vector<std::vector<std::size_t>> nearest_neighbors(const Matrix& points,
                                                        std::size_t k) {
  const std::size_t m = points.rows();
  std::vector<std::vector<std::size_t>> out(m);
  std::vector<std::pair<double, std::size_t>> dist;
  for (std::size_t a = 0; a < m; ++a) {
    dist.clear();
    const auto pa = points.row(a);
    for (std::size_t b = 0; b < m; ++b) {
      if (b == a) continue;
      const auto pb = points.row(b);
      double s = 0.0;
      for (std::size_t j = 0; j < pa.size(); ++j) {
        const double diff = pa[j] - pb[j];
        s += diff * diff;
      }
      dist.emplace_back(s, b);
    }
    const std::size_t take = std::min(k, dist.size());
    std::partial_sort(dist.begin(), dist.begin() + take, dist.end());
    out[a].reserve(take);
    for (std::size_t t = 0; t < take; ++t) out[a].push_back(dist[t].second);
  }
  return out;
}

SmoteResult smote_oversample(const Matrix& x, std::span<const int> y,
                             const SmoteConfig& config) {
  if (y.size() != x.rows()) {
    throw InvalidArgument("label count does not match sample count");
  }
  if (config.k_neighbors < 1) throw InvalidArgument("k_neighbors must be >= 1");
  if (!(config.target_ratio > 0.0 && config.target_ratio <= 1.0)) {
    throw InvalidArgument("target_ratio must be in (0, 1]");
  }
  std::size_t counts[2] = {0, 0};
  for (int v : y) {
    if (v != 0 && v != 1) throw InvalidArgument("labels must be 0 or 1");
    ++counts[v];
  }
  if (counts[0] == 0 || counts[1] == 0) {
    throw InvalidArgument("SMOTE needs two classes; input has one");
  }

  SmoteResult out;
  out.minority_label = counts[1] <= counts[0] ? 1 : 0;
  const std::size_t minority = counts[out.minority_label];
  const std::size_t majority = counts[1 - out.minority_label];
  if (minority < 2) {
    throw InvalidArgument(
        fmt::format("SMOTE needs at least 2 minority rows, found {}", minority));
  }

  out.x = x;
  out.y.assign(y.begin(), y.end());
  const auto target = static_cast<std::size_t>(
      std::llround(config.target_ratio * static_cast<double>(majority)));
  if (target <= minority) {
    out.k_used = 0;
    return out;
  }

  std::size_t k = static_cast<std::size_t>(config.k_neighbors);
  if (minority <= k) {
    k = minority - 1;
    out.warnings.push_back(fmt::format(
        "k_neighbors reduced from {} to {}: only {} minority rows",
        config.k_neighbors, k, minority));
  }
  out.k_used = static_cast<int>(k);

  std::vector<std::size_t> minority_rows;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] == out.minority_label) minority_rows.push_back(i);
  }
  const Matrix points = x.select_rows(minority_rows);
  const auto neighbors = nearest_neighbors(points, k);

  Rng rng(config.seed);
  const std::size_t n_new = target - minority;
  std::vector<double> row(x.cols());
  for (std::size_t s = 0; s < n_new; ++s) {
    const std::size_t a = rng.below(minority);
    const std::size_t b = neighbors[a][rng.below(k)];
    const double lambda = rng.uniform();
    const auto pa = points.row(a);
    const auto pb = points.row(b);
    for (std::size_t j = 0; j < row.size(); ++j) {
      row[j] = pa[j] + lambda * (pb[j] - pa[j]);
    }
    out.x.append_row(row);
    out.y.push_back(out.minority_label);
    out.origins.push_back({minority_rows[a], minority_rows[b], lambda});
  }
  return out;
}

}  // namespace wdsguard
