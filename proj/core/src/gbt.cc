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

#include "wdsguard/gbt.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "wdsguard/errors.h"
#include "wdsguard/parallel.h"

namespace wdsguard {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double logistic_loss(std::span<const int> y, std::span<const double> margin) {
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    // log(1 + exp(m)) - y m, evaluated stably.
    const double m = margin[i];
    const double softplus =
        m > 0.0 ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m));
    total += softplus - (y[i] == 1 ? m : 0.0);
  }
  return y.empty() ? 0.0 : total / static_cast<double>(y.size());
}

namespace {

struct NodeStats {
  double g = 0.0;
  double h = 0.0;
};

struct BestSplit {
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
};

double leaf_weight(const NodeStats& s, double lambda) {
  return -s.g / (std::max(s.h, kHessianFloor) + lambda);
}

double score(double g, double h, double lambda) {
  return g * g / (std::max(h, kHessianFloor) + lambda);
}

}  // namespace

GbtModel fit_gbt(const Matrix& x, std::span<const int> y,
                 const GbtConfig& config,
                 std::vector<std::string> feature_names) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  if (n == 0) throw InvalidArgument("cannot fit boosted trees on no samples");
  if (y.size() != n) {
    throw InvalidArgument("label count does not match sample count");
  }
  if (!(config.learning_rate > 0.0)) {
    throw InvalidArgument("learning_rate must be positive");
  }
  if (config.lambda_l2 < 0.0) throw InvalidArgument("lambda_l2 must be >= 0");
  if (config.n_rounds < 0 || config.max_depth < 0) {
    throw InvalidArgument("n_rounds and max_depth must be >= 0");
  }
  for (int v : y) {
    if (v != 0 && v != 1) throw InvalidArgument("labels must be 0 or 1");
  }
  if (feature_names.empty()) {
    for (std::size_t j = 0; j < d; ++j) feature_names.push_back(fmt::format("f{}", j));
  }
  if (feature_names.size() != d) {
    throw InvalidArgument("feature name count does not match matrix width");
  }

  GbtModel model;
  model.config = config;
  model.feature_names = std::move(feature_names);
  if (config.base_score) {
    model.base_score = *config.base_score;
  } else {
    const double positives = static_cast<double>(std::count(y.begin(), y.end(), 1));
    const double prior =
        std::clamp(positives / static_cast<double>(n), 1e-6, 1.0 - 1e-6);
    model.base_score = std::log(prior / (1.0 - prior));
  }

  // Column orders are computed once; ties keep row order.
  std::vector<std::vector<std::uint32_t>> order(d);
  parallel_for(
      d,
      [&](std::size_t j) {
        auto& o = order[j];
        o.resize(n);
        std::iota(o.begin(), o.end(), std::uint32_t{0});
        std::stable_sort(o.begin(), o.end(), [&](std::uint32_t a, std::uint32_t b) {
          return x(a, j) < x(b, j);
        });
      },
      config.threads);

  const double lambda = config.lambda_l2;
  std::vector<double> margin(n, model.base_score);
  std::vector<double> grad(n), hess(n);
  std::vector<std::int32_t> node_of(n);

  for (int round = 0; round < config.n_rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p = sigmoid(margin[i]);
      grad[i] = p - y[i];
      hess[i] = p * (1.0 - p);
    }

    Tree tree;
    tree.nodes.emplace_back();
    std::fill(node_of.begin(), node_of.end(), 0);
    std::vector<std::int32_t> frontier{0};
    std::vector<NodeStats> stats(1);
    for (std::size_t i = 0; i < n; ++i) {
      stats[0].g += grad[i];
      stats[0].h += hess[i];
    }

    for (int depth = 0; depth < config.max_depth && !frontier.empty(); ++depth) {
      // slot_of[node] is the node's position in the frontier, -1 otherwise.
      std::vector<std::int32_t> slot_of(tree.nodes.size(), -1);
      for (std::size_t s = 0; s < frontier.size(); ++s) {
        slot_of[frontier[s]] = static_cast<std::int32_t>(s);
      }
      const std::size_t slots = frontier.size();

      std::vector<std::vector<BestSplit>> per_feature(d);
      parallel_for(
          d,
          [&](std::size_t j) {
            std::vector<BestSplit> best(slots);
            std::vector<NodeStats> left(slots);
            std::vector<double> last(slots, 0.0);
            std::vector<char> seen(slots, 0);
            for (std::uint32_t i : order[j]) {
              const auto slot = slot_of[node_of[i]];
              if (slot < 0) continue;
              const double v = x(i, j);
              if (seen[slot] && v != last[slot]) {
                const NodeStats& total = stats[frontier[slot]];
                const NodeStats& l = left[slot];
                const double gr = total.g - l.g;
                const double hr = total.h - l.h;
                if (l.h >= config.min_child_weight && hr >= config.min_child_weight) {
                  const double gain =
                      0.5 * (score(l.g, l.h, lambda) + score(gr, hr, lambda) -
                             score(total.g, total.h, lambda)) -
                      config.gamma_min_gain;
                  if (gain > best[slot].gain) {
                    best[slot] = {gain, static_cast<int>(j),
                                  split_threshold(last[slot], v)};
                  }
                }
              }
              left[slot].g += grad[i];
              left[slot].h += hess[i];
              last[slot] = v;
              seen[slot] = 1;
            }
            per_feature[j] = std::move(best);
          },
          config.threads);

      std::vector<std::int32_t> next_frontier;
      std::vector<std::int32_t> split_feature(slots, -1);
      std::vector<double> split_threshold_at(slots, 0.0);
      for (std::size_t s = 0; s < slots; ++s) {
        BestSplit best;
        // Strict '>' over ascending feature index keeps the lowest index on
        // ties.
        for (std::size_t j = 0; j < d; ++j) {
          if (per_feature[j][s].feature >= 0 && per_feature[j][s].gain > best.gain) {
            best = per_feature[j][s];
          }
        }
        if (best.feature < 0 || !(best.gain > 0.0)) continue;
        const auto node = frontier[s];
        const auto left_id = static_cast<std::int32_t>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes.emplace_back();
        tree.nodes[node].feature = best.feature;
        tree.nodes[node].threshold = best.threshold;
        tree.nodes[node].left = left_id;
        tree.nodes[node].right = left_id + 1;
        stats.resize(tree.nodes.size());
        next_frontier.push_back(left_id);
        next_frontier.push_back(left_id + 1);
        split_feature[s] = best.feature;
        split_threshold_at[s] = best.threshold;
      }
      if (next_frontier.empty()) break;
      for (std::size_t i = 0; i < n; ++i) {
        const auto slot = slot_of[node_of[i]];
        if (slot < 0 || split_feature[slot] < 0) continue;
        const auto& parent = tree.nodes[frontier[slot]];
        node_of[i] = x(i, split_feature[slot]) <= split_threshold_at[slot]
                         ? parent.left
                         : parent.right;
        stats[node_of[i]].g += grad[i];
        stats[node_of[i]].h += hess[i];
      }
      frontier = std::move(next_frontier);
    }

    for (std::size_t k = 0; k < tree.nodes.size(); ++k) {
      if (tree.nodes[k].is_leaf()) {
        tree.nodes[k].value = leaf_weight(stats[k], lambda);
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      margin[i] += config.learning_rate * tree.nodes[node_of[i]].value;
    }
    model.trees.push_back(std::move(tree));
    model.training_loss.push_back(logistic_loss(y, margin));
  }
  return model;
}

std::vector<double> gbt_predict_margin(const GbtModel& model, const Matrix& x) {
  if (x.cols() != model.feature_names.size()) {
    throw InvalidArgument(fmt::format("boosted model expects {} features, got {}",
                                      model.feature_names.size(), x.cols()));
  }
  const double lr = model.config.learning_rate;
  std::vector<double> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto row = x.row(r);
    double sum = 0.0;
    for (const auto& tree : model.trees) sum += tree.predict(row);
    out[r] = model.base_score + lr * sum;
  }
  return out;
}

std::vector<double> gbt_predict_proba(const GbtModel& model, const Matrix& x) {
  auto out = gbt_predict_margin(model, x);
  for (double& v : out) v = sigmoid(v);
  return out;
}

}  // namespace wdsguard
