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

#ifndef WDSGUARD_RESAMPLING_H_
#define WDSGUARD_RESAMPLING_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wdsguard/matrix.h"

namespace wdsguard {

struct SmoteConfig {
  int k_neighbors = 5;
  // Desired minority/majority ratio after resampling.
  double target_ratio = 1.0;
  std::uint64_t seed = 0;

  friend bool operator==(const SmoteConfig&, const SmoteConfig&) = default;
};

// Where a synthetic row came from: row = x[seed] + lambda (x[neighbor] - x[seed]).
struct SyntheticOrigin {
  std::size_t seed_row = 0;
  std::size_t neighbor_row = 0;
  double lambda = 0.0;
};

struct SmoteResult {
  // Original rows first, in input order, then synthetic minority rows.
  Matrix x;
  Labels y;
  std::vector<SyntheticOrigin> origins;
  int minority_label = 1;
  int k_used = 0;
  std::vector<std::string> warnings;
};

SmoteResult smote_oversample(const Matrix& x, std::span<const int> y,
                             const SmoteConfig& config);

// For each row of `points`, the indices (into `points`) of its k nearest
// other rows by Euclidean distance; ties go to the lower index.
std::vector<std::vector<std::size_t>> nearest_neighbors(const Matrix& points,
                                                        std::size_t k);

}  // namespace wdsguard

#endif  // WDSGUARD_RESAMPLING_H_
