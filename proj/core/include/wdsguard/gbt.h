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

#ifndef WDSGUARD_GBT_H_
#define WDSGUARD_GBT_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wdsguard/matrix.h"
#include "wdsguard/tree.h"

namespace wdsguard {

struct GbtConfig {
  int n_rounds = 500;
  int max_depth = 6;
  double learning_rate = 0.05;
  double lambda_l2 = 1.0;
  double gamma_min_gain = 0.0;
  // Minimum Hessian sum per child.
  double min_child_weight = 1.0;
  // Initial margin (log-odds). Unset means logit of the training prior.
  std::optional<double> base_score;
  std::uint64_t seed = 0;
  unsigned threads = 0;

  friend bool operator==(const GbtConfig&, const GbtConfig&) = default;
};

inline constexpr double kHessianFloor = 1e-16;

struct GbtModel {
  std::vector<Tree> trees;
  double base_score = 0.0;
  std::vector<std::string> feature_names;
  GbtConfig config;
  // Mean logistic loss on the training set after each round.
  std::vector<double> training_loss;
};

// Newton boosting on logistic loss with exact greedy split enumeration.
GbtModel fit_gbt(const Matrix& x, std::span<const int> y,
                 const GbtConfig& config,
                 std::vector<std::string> feature_names = {});

std::vector<double> gbt_predict_margin(const GbtModel& model, const Matrix& x);
std::vector<double> gbt_predict_proba(const GbtModel& model, const Matrix& x);

double sigmoid(double z);
double logistic_loss(std::span<const int> y, std::span<const double> margin);

}  // namespace wdsguard

#endif  // WDSGUARD_GBT_H_
