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
#include <vector>

#include <gtest/gtest.h>

#include "wdsguard/errors.h"
#include "wdsguard/resampling.h"
#include "wdsguard/rng.h"

namespace wdsguard {
namespace {

struct Imbalanced {
  Matrix x;
  Labels y;
};

Imbalanced make_imbalanced(std::size_t majority, std::size_t minority, std::size_t d,
                           std::uint64_t seed) {
  Rng rng(seed);
  Imbalanced out{Matrix(majority + minority, d), Labels(majority + minority, 0)};
  for (std::size_t i = 0; i < majority + minority; ++i) {
    const bool pos = i % ((majority + minority) / minority) == 0 &&
                     std::count(out.y.begin(), out.y.end(), 1) <
                         static_cast<long>(minority);
    out.y[i] = pos;
    for (std::size_t c = 0; c < d; ++c) out.x(i, c) = rng.normal() + (pos ? 3.0 : 0.0);
  }
  return out;
}

TEST(Smote, BalancesClassesExactly) {
  const auto data = make_imbalanced(390, 39, 4, 1);
  const auto n1 = std::count(data.y.begin(), data.y.end(), 1);
  const auto n0 = std::count(data.y.begin(), data.y.end(), 0);
  SmoteConfig cfg;
  cfg.seed = 3;
  const auto res = smote_oversample(data.x, data.y, cfg);
  EXPECT_EQ(std::count(res.y.begin(), res.y.end(), 1), n0);
  EXPECT_EQ(std::count(res.y.begin(), res.y.end(), 0), n0);
  EXPECT_EQ(res.origins.size(), static_cast<std::size_t>(n0 - n1));
  // Originals are kept verbatim and in order.
  for (std::size_t r = 0; r < data.x.rows(); ++r) {
    EXPECT_EQ(res.y[r], data.y[r]);
    for (std::size_t c = 0; c < data.x.cols(); ++c) EXPECT_EQ(res.x(r, c), data.x(r, c));
  }
}

TEST(Smote, PartialTargetRatio) {
  const auto data = make_imbalanced(400, 40, 3, 2);
  SmoteConfig cfg;
  cfg.target_ratio = 0.5;
  const auto res = smote_oversample(data.x, data.y, cfg);
  EXPECT_EQ(std::count(res.y.begin(), res.y.end(), 1), 200);
}

TEST(Smote, SyntheticRowsAreCollinearAndInsideTheBox) {
  const auto data = make_imbalanced(600, 30, 5, 4);
  SmoteConfig cfg;
  cfg.seed = 9;
  const auto res = smote_oversample(data.x, data.y, cfg);
  const std::size_t d = data.x.cols();
  std::vector<double> lo(d, INFINITY), hi(d, -INFINITY);
  for (std::size_t r = 0; r < data.x.rows(); ++r) {
    if (data.y[r] != 1) continue;
    for (std::size_t c = 0; c < d; ++c) {
      lo[c] = std::min(lo[c], data.x(r, c));
      hi[c] = std::max(hi[c], data.x(r, c));
    }
  }
  for (std::size_t k = 0; k < res.origins.size(); ++k) {
    const auto& o = res.origins[k];
    const std::size_t row = data.x.rows() + k;
    ASSERT_EQ(data.y[o.seed_row], 1);
    ASSERT_EQ(data.y[o.neighbor_row], 1);
    ASSERT_GE(o.lambda, 0.0);
    ASSERT_LE(o.lambda, 1.0);
    // Residual of s against the seed-neighbor segment, using the best lambda.
    double num = 0, den = 0;
    for (std::size_t c = 0; c < d; ++c) {
      const double seg = data.x(o.neighbor_row, c) - data.x(o.seed_row, c);
      num += (res.x(row, c) - data.x(o.seed_row, c)) * seg;
      den += seg * seg;
    }
    const double lam = den > 0 ? num / den : 0.0;
    double residual = 0;
    for (std::size_t c = 0; c < d; ++c) {
      const double seg = data.x(o.neighbor_row, c) - data.x(o.seed_row, c);
      const double e = res.x(row, c) - data.x(o.seed_row, c) - lam * seg;
      residual = std::max(residual, std::abs(e));
      EXPECT_GE(res.x(row, c), lo[c]);
      EXPECT_LE(res.x(row, c), hi[c]);
    }
    EXPECT_LT(residual, 1e-9);
  }
}

TEST(Smote, IdenticalMinorityPoints) {
  Matrix x(6, 2, {0, 0, 1, 1, 2, 2, 3, 3, 5, 5, 5, 5});
  const Labels y{0, 0, 0, 0, 1, 1};
  const auto res = smote_oversample(x, y, {});
  ASSERT_EQ(res.y.size(), 8u);
  for (std::size_t r = 6; r < 8; ++r) {
    EXPECT_EQ(res.x(r, 0), 5.0);
    EXPECT_EQ(res.x(r, 1), 5.0);
  }
  EXPECT_EQ(res.k_used, 1);
  EXPECT_FALSE(res.warnings.empty());
}

TEST(Smote, DeterministicForASeed) {
  const auto data = make_imbalanced(200, 20, 3, 5);
  SmoteConfig cfg;
  cfg.seed = 17;
  const auto a = smote_oversample(data.x, data.y, cfg);
  const auto b = smote_oversample(data.x, data.y, cfg);
  EXPECT_TRUE(a.x == b.x);
  cfg.seed = 18;
  const auto c = smote_oversample(data.x, data.y, cfg);
  EXPECT_FALSE(a.x == c.x);
}

TEST(Smote, RejectsDegenerateInput) {
  Matrix x(3, 1, {1, 2, 3});
  EXPECT_ANY_THROW(smote_oversample(x, Labels{0, 0, 0}, {}));
  EXPECT_ANY_THROW(smote_oversample(x, Labels{0, 0, 1}, {}));
}

TEST(NearestNeighbors, MatchesBruteForceWithIndexTieBreak) {
  Matrix pts(5, 1, {0, 1, -1, 2, 1});
  const auto nn = nearest_neighbors(pts, 2);
  ASSERT_EQ(nn.size(), 5u);
  // Row 0 has three rows at distance 1; ties go to the lower index.
  EXPECT_EQ(nn[0], (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(nn[1], (std::vector<std::size_t>{4, 0}));
  EXPECT_EQ(nn[3], (std::vector<std::size_t>{1, 4}));
}

}  // namespace
}  // namespace wdsguard
