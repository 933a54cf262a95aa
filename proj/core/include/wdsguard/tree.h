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

#ifndef WDSGUARD_TREE_H_
#define WDSGUARD_TREE_H_

#include <cstdint>
#include <span>
#include <vector>

namespace wdsguard {

// One node of a binary decision tree stored in a flat array. Internal nodes
// route `value <= threshold` to `left`. For classification trees a leaf's
// value is P(class 1); for boosted trees it is the real-valued leaf weight.
struct TreeNode {
  std::int32_t feature = -1;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;

  bool is_leaf() const { return feature < 0; }

  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct Tree {
  // nodes[0] is the root.
  std::vector<TreeNode> nodes;

  std::size_t leaf_index(std::span<const double> row) const {
    std::size_t i = 0;
    while (!nodes[i].is_leaf()) {
      const auto& n = nodes[i];
      i = static_cast<std::size_t>(row[n.feature] <= n.threshold ? n.left
                                                                 : n.right);
    }
    return i;
  }

  double predict(std::span<const double> row) const {
    return nodes[leaf_index(row)].value;
  }

  // Depth of the deepest leaf; a lone root leaf has depth 0.
  int depth() const;
  std::size_t leaf_count() const;

  friend bool operator==(const Tree&, const Tree&) = default;
};

// Midpoint between two consecutive distinct sorted values, nudged so that
// `lo <= t < hi` holds even when the midpoint rounds up to `hi`.
inline double split_threshold(double lo, double hi) {
  const double mid = lo + (hi - lo) / 2.0;
  return mid < hi ? mid : lo;
}

}  // namespace wdsguard

#endif  // WDSGUARD_TREE_H_
