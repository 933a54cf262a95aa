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

#ifndef WDSGUARD_FOREST_H_
#define WDSGUARD_FOREST_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wdsguard/matrix.h"
#include "wdsguard/rng.h"
#include "wdsguard/tree.h"

namespace wdsguard {

struct ForestConfig {
  int n_trees = 300;
  // Negative means unlimited.
  int max_depth = -1;
  int min_samples_leaf = 1;
  // Features tried per node; 0 means ceil(sqrt(d)).
  int max_features = 0;
  bool bootstrap = true;
  // Per-class sample weights for the Gini criterion. {1, 1} disables
  // weighting.
  double class_weight0 = 1.0;
  double class_weight1 = 1.0;
  std::uint64_t seed = 0;
  // 0 = hardware concurrency.
  unsigned threads = 0;

  friend bool operator==(const ForestConfig&, const ForestConfig&) = default;
};

// A fitted classification tree together with the weighted Gini decrease it
// attributes to each feature (unnormalized).
struct FittedTree {
  Tree tree;
  std::vector<double> impurity_decrease;
};

// Grows one CART tree. `sample_weight` (optional, same length as y) carries
// bootstrap multiplicities; rows with weight 0 are ignored.
FittedTree fit_tree(const Matrix& x, std::span<const int> y,
                    const ForestConfig& config, Rng& rng,
                    std::span<const double> sample_weight = {});

struct ForestModel {
  std::vector<Tree> trees;
  std::vector<std::string> feature_names;
  std::vector<double> importance;
  ForestConfig config;

  bool fitted() const { return !trees.empty(); }
};

// Trees are seeded from derive_seed(config.seed, tree_index).
ForestModel fit_forest(const Matrix& x, std::span<const int> y,
                       const ForestConfig& config,
                       std::vector<std::string> feature_names = {});

std::vector<double> forest_predict_proba(const ForestModel& model,
                                         const Matrix& x);

// Mean over trees of each tree's normalized Gini decrease, renormalized to
// sum to 1. Uniform when no tree ever split.
std::vector<double> impurity_importance(const ForestModel& model);

}  // namespace wdsguard

#endif  // WDSGUARD_FOREST_H_
