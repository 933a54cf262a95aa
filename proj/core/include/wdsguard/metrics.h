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

#ifndef WDSGUARD_METRICS_H_
#define WDSGUARD_METRICS_H_

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace wdsguard {

struct ConfusionMatrix {
  std::size_t tn = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tp = 0;
  double threshold = 0.5;

  std::size_t total() const { return tn + fp + fn + tp; }

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

// Predicted positive iff probability >= threshold.
ConfusionMatrix confusion(std::span<const int> labels,
                          std::span<const double> probabilities,
                          double threshold = 0.5);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct ClassificationMetrics {
  double accuracy = 0.0;
  ClassMetrics normal;  // class 0
  ClassMetrics attack;  // class 1
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  double weighted_precision = 0.0;
  double weighted_recall = 0.0;
  double weighted_f1 = 0.0;
  // Set when any ratio had a zero denominator and was reported as 0.
  bool degenerate = false;
  std::vector<std::string> degeneracies;
};

ClassificationMetrics prf1(const ConfusionMatrix& cm);

// Mann-Whitney rank statistic with average ranks for ties.
double roc_auc(std::span<const int> labels, std::span<const double> scores);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

// Points at each distinct score threshold, from (0,0) to (1,1).
std::vector<RocPoint> roc_curve(std::span<const int> labels,
                                std::span<const double> scores);
double trapezoid_area(std::span<const RocPoint> curve);

struct MetricsReport {
  std::string model;
  ConfusionMatrix confusion;
  ClassificationMetrics metrics;
  double roc_auc = 0.0;
  bool in_sample = false;
};

// Single-class labels give a NaN AUC and a degeneracy entry instead of an
// error.
MetricsReport evaluate(std::string model, std::span<const int> labels,
                       std::span<const double> probabilities,
                       double threshold = 0.5);

// Plain-text 2x2 table.
std::string format_confusion(const ConfusionMatrix& cm);

}  // namespace wdsguard

#endif  // WDSGUARD_METRICS_H_
