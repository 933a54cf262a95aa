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

#include "wdsguard/forest.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "wdsguard/errors.h"
#include "wdsguard/parallel.h"

namespace wdsguard {

int Tree::depth() const {
  if (nodes.empty()) return 0;
  int deepest = 0;
  std::vector<std::pair<std::size_t, int>> stack{{0, 0}};
  while (!stack.empty()) {
    const auto [i, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    if (!nodes[i].is_leaf()) {
      stack.emplace_back(nodes[i].left, d + 1);
      stack.emplace_back(nodes[i].right, d + 1);
    }
  }
  return deepest;
}

std::size_t Tree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(
      nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

namespace {

void check_binary(std::span<const int> y) {
  for (int v : y) {
    if (v != 0 && v != 1) throw InvalidArgument("labels must be 0 or 1");
  }
}

double gini_mass(double w0, double w1) {
  // W * gini = W - (w0^2 + w1^2) / W.
  const double w = w0 + w1;
  if (w <= 0.0) return 0.0;
  return w - (w0 * w0 + w1 * w1) / w;
}

struct SplitCandidate {
  int feature = -1;
  double threshold = 0.0;
  double decrease = -1.0;

  bool better_than(const SplitCandidate& other) const {
    if (other.feature < 0) return true;
    if (decrease != other.decrease) return decrease > other.decrease;
    if (feature != other.feature) return feature < other.feature;
    return threshold < other.threshold;
  }
};

struct PendingNode {
  std::size_t node;
  std::size_t begin;
  std::size_t end;
  int depth;
};

}  // namespace

FittedTree fit_tree(const Matrix& x, std::span<const int> y,
                    const ForestConfig& config, Rng& rng,
                    std::span<const double> sample_weight) {
  if (x.rows() == 0) throw InvalidArgument("cannot fit a tree on no samples");
  if (y.size() != x.rows()) {
    throw InvalidArgument("label count does not match sample count");
  }
  if (!sample_weight.empty() && sample_weight.size() != y.size()) {
    throw InvalidArgument("sample weight count does not match sample count");
  }
  check_binary(y);

  const std::size_t d = x.cols();
  const std::size_t max_features =
      config.max_features > 0
          ? std::min<std::size_t>(config.max_features, d)
          : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d))));
  const double min_leaf = std::max(1, config.min_samples_leaf);

  std::vector<std::uint32_t> index;
  std::vector<double> count(x.rows());
  std::vector<double> weight(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double c = sample_weight.empty() ? 1.0 : sample_weight[i];
    if (c <= 0.0) continue;
    index.push_back(static_cast<std::uint32_t>(i));
    count[i] = c;
    weight[i] = c * (y[i] == 1 ? config.class_weight1 : config.class_weight0);
  }
  if (index.empty()) throw InvalidArgument("all sample weights are zero");

  FittedTree out;
  out.impurity_decrease.assign(d, 0.0);
  auto& nodes = out.tree.nodes;
  nodes.emplace_back();

  std::vector<std::size_t> feature_order(d);
  std::vector<std::pair<double, std::uint32_t>> buf;
  buf.reserve(index.size());

  std::vector<PendingNode> stack{{0, 0, index.size(), 0}};
  while (!stack.empty()) {
    const PendingNode p = stack.back();
    stack.pop_back();

    double w0 = 0.0, w1 = 0.0, n_node = 0.0;
    for (std::size_t k = p.begin; k < p.end; ++k) {
      const auto i = index[k];
      (y[i] == 1 ? w1 : w0) += weight[i];
      n_node += count[i];
    }
    nodes[p.node].value = w0 + w1 > 0.0 ? w1 / (w0 + w1) : 0.0;

    const bool depth_capped = config.max_depth >= 0 && p.depth >= config.max_depth;
    if (w0 <= 0.0 || w1 <= 0.0 || depth_capped || n_node < 2.0 * min_leaf) {
      continue;
    }

    const double parent_mass = gini_mass(w0, w1);
    SplitCandidate best;
    std::iota(feature_order.begin(), feature_order.end(), std::size_t{0});
    std::size_t visited = 0;
    for (std::size_t remaining = d; remaining > 0 && visited < max_features;
         --remaining) {
      // Draw the next feature without replacement.
      const std::size_t pick = rng.below(remaining);
      const std::size_t f = feature_order[pick];
      std::swap(feature_order[pick], feature_order[remaining - 1]);

      buf.clear();
      for (std::size_t k = p.begin; k < p.end; ++k) {
        buf.emplace_back(x(index[k], f), index[k]);
      }
      std::sort(buf.begin(), buf.end());
      if (buf.front().first == buf.back().first) continue;
      ++visited;

      double l0 = 0.0, l1 = 0.0, ln = 0.0;
      for (std::size_t k = 0; k + 1 < buf.size(); ++k) {
        const auto i = buf[k].second;
        (y[i] == 1 ? l1 : l0) += weight[i];
        ln += count[i];
        if (buf[k].first == buf[k + 1].first) continue;
        if (ln < min_leaf || n_node - ln < min_leaf) continue;
        const double decrease =
            parent_mass - gini_mass(l0, l1) - gini_mass(w0 - l0, w1 - l1);
        SplitCandidate cand{static_cast<int>(f),
                            split_threshold(buf[k].first, buf[k + 1].first),
                            decrease};
        if (cand.better_than(best)) best = cand;
      }
    }
    if (best.feature < 0) continue;

    out.impurity_decrease[best.feature] += std::max(0.0, best.decrease);
    const auto mid = std::partition(
        index.begin() + p.begin, index.begin() + p.end, [&](std::uint32_t i) {
          return x(i, best.feature) <= best.threshold;
        });
    const std::size_t split_at = static_cast<std::size_t>(mid - index.begin());
    const auto left = static_cast<std::int32_t>(nodes.size());
    nodes.emplace_back();
    nodes.emplace_back();
    auto& node = nodes[p.node];
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left = left;
    node.right = left + 1;
    stack.push_back({static_cast<std::size_t>(left + 1), split_at, p.end,
                     p.depth + 1});
    stack.push_back({static_cast<std::size_t>(left), p.begin, split_at,
                     p.depth + 1});
  }
  return out;
}

ForestModel fit_forest(const Matrix& x, std::span<const int> y,
                       const ForestConfig& config,
                       std::vector<std::string> feature_names) {
  if (config.n_trees < 1) throw InvalidArgument("n_trees must be >= 1");
  if (x.rows() == 0) throw InvalidArgument("cannot fit a forest on no samples");
  if (feature_names.empty()) {
    for (std::size_t j = 0; j < x.cols(); ++j) {
      feature_names.push_back(fmt::format("f{}", j));
    }
  }
  if (feature_names.size() != x.cols()) {
    throw InvalidArgument("feature name count does not match matrix width");
  }

  const auto n_trees = static_cast<std::size_t>(config.n_trees);
  std::vector<FittedTree> fitted(n_trees);
  parallel_for(
      n_trees,
      [&](std::size_t t) {
        Rng rng(derive_seed(config.seed, t));
        if (!config.bootstrap) {
          fitted[t] = fit_tree(x, y, config, rng);
          return;
        }
        std::vector<double> counts(x.rows(), 0.0);
        for (std::size_t k = 0; k < x.rows(); ++k) {
          counts[rng.below(x.rows())] += 1.0;
        }
        fitted[t] = fit_tree(x, y, config, rng, counts);
      },
      config.threads);

  ForestModel model;
  model.config = config;
  model.feature_names = std::move(feature_names);
  model.importance.assign(x.cols(), 0.0);
  for (auto& f : fitted) {
    const double total = std::accumulate(f.impurity_decrease.begin(),
                                         f.impurity_decrease.end(), 0.0);
    if (total > 0.0) {
      for (std::size_t j = 0; j < x.cols(); ++j) {
        model.importance[j] += f.impurity_decrease[j] / total;
      }
    }
    model.trees.push_back(std::move(f.tree));
  }
  const double sum =
      std::accumulate(model.importance.begin(), model.importance.end(), 0.0);
  for (double& v : model.importance) {
    v = sum > 0.0 ? v / sum : 1.0 / static_cast<double>(x.cols());
  }
  return model;
}

std::vector<double> forest_predict_proba(const ForestModel& model,
                                         const Matrix& x) {
  if (!model.fitted()) throw InvalidArgument("forest model is not fitted");
  if (x.cols() != model.feature_names.size()) {
    throw InvalidArgument(fmt::format(
        "forest expects {} features, got {}", model.feature_names.size(),
        x.cols()));
  }
  std::vector<double> out(x.rows(), 0.0);
  const double scale = 1.0 / static_cast<double>(model.trees.size());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto row = x.row(r);
    double sum = 0.0;
    for (const auto& tree : model.trees) sum += tree.predict(row);
    out[r] = sum * scale;
  }
  return out;
}

std::vector<double> impurity_importance(const ForestModel& model) {
  if (!model.fitted()) throw InvalidArgument("forest model is not fitted");
  return model.importance;
}

}  // namespace wdsguard
