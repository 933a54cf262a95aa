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

#include "wdsguard/metrics.h"

#include <algorithm>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "wdsguard/errors.h"

namespace wdsguard {

namespace {

void check_lengths(std::span<const int> labels, std::size_t n) {
  if (labels.size() != n) {
    throw InvalidArgument(fmt::format("{} labels but {} predictions",
                                      labels.size(), n));
  }
}

void check_two_classes(std::span<const int> labels) {
  const auto pos = std::count(labels.begin(), labels.end(), 1);
  if (pos == 0 || static_cast<std::size_t>(pos) == labels.size()) {
    throw InvalidArgument("ROC analysis needs both classes present");
  }
}

double safe_ratio(double num, double den, const char* what, int cls,
                  ClassificationMetrics& m) {
  if (den == 0.0) {
    m.degenerate = true;
    m.degeneracies.push_back(fmt::format("{} of class {} has a zero denominator", what, cls));
    return 0.0;
  }
  return num / den;
}

ClassMetrics class_metrics(double tp, double fp, double fn, int cls,
                           ClassificationMetrics& m) {
  ClassMetrics out;
  out.precision = safe_ratio(tp, tp + fp, "precision", cls, m);
  out.recall = safe_ratio(tp, tp + fn, "recall", cls, m);
  out.f1 = safe_ratio(2.0 * out.precision * out.recall,
                      out.precision + out.recall, "F1", cls, m);
  out.support = static_cast<std::size_t>(tp + fn);
  return out;
}

}  // namespace

ConfusionMatrix confusion(std::span<const int> labels,
                          std::span<const double> probabilities,
                          double threshold) {
  check_lengths(labels, probabilities.size());
  ConfusionMatrix cm;
  cm.threshold = threshold;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool predicted = probabilities[i] >= threshold;
    if (labels[i] == 1) {
      (predicted ? cm.tp : cm.fn)++;
    } else {
      (predicted ? cm.fp : cm.tn)++;
    }
  }
  return cm;
}

ClassificationMetrics prf1(const ConfusionMatrix& cm) {
  ClassificationMetrics m;
  const auto tn = static_cast<double>(cm.tn);
  const auto fp = static_cast<double>(cm.fp);
  const auto fn = static_cast<double>(cm.fn);
  const auto tp = static_cast<double>(cm.tp);
  const double n = tn + fp + fn + tp;
  m.accuracy = safe_ratio(tn + tp, n, "accuracy", -1, m);
  m.attack = class_metrics(tp, fp, fn, 1, m);
  m.normal = class_metrics(tn, fn, fp, 0, m);
  m.macro_precision = (m.normal.precision + m.attack.precision) / 2.0;
  m.macro_recall = (m.normal.recall + m.attack.recall) / 2.0;
  m.macro_f1 = (m.normal.f1 + m.attack.f1) / 2.0;
  if (n > 0.0) {
    const double w0 = (tn + fp) / n;
    const double w1 = (tp + fn) / n;
    m.weighted_precision = w0 * m.normal.precision + w1 * m.attack.precision;
    m.weighted_recall = w0 * m.normal.recall + w1 * m.attack.recall;
    m.weighted_f1 = w0 * m.normal.f1 + w1 * m.attack.f1;
  }
  return m;
}

double roc_auc(std::span<const int> labels, std::span<const double> scores) {
  check_lengths(labels, scores.size());
  check_two_classes(labels);
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum_pos = 0.0;
  double n_pos = 0.0;
  for (std::size_t start = 0; start < n;) {
    std::size_t end = start + 1;
    while (end < n && scores[order[end]] == scores[order[start]]) ++end;
    // Ranks start+1 .. end share their average.
    const double avg_rank = (static_cast<double>(start + 1) + static_cast<double>(end)) / 2.0;
    for (std::size_t k = start; k < end; ++k) {
      if (labels[order[k]] == 1) {
        rank_sum_pos += avg_rank;
        n_pos += 1.0;
      }
    }
    start = end;
  }
  const double n_neg = static_cast<double>(n) - n_pos;
  return (rank_sum_pos - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

std::vector<RocPoint> roc_curve(std::span<const int> labels,
                                std::span<const double> scores) {
  check_lengths(labels, scores.size());
  check_two_classes(labels);
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  const double n_pos = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
  const double n_neg = static_cast<double>(n) - n_pos;
  std::vector<RocPoint> out{{0.0, 0.0}};
  double tp = 0.0, fp = 0.0;
  for (std::size_t start = 0; start < n;) {
    std::size_t end = start;
    while (end < n && scores[order[end]] == scores[order[start]]) {
      (labels[order[end]] == 1 ? tp : fp) += 1.0;
      ++end;
    }
    out.push_back({fp / n_neg, tp / n_pos});
    start = end;
  }
  return out;
}

double trapezoid_area(std::span<const RocPoint> curve) {
  double area = 0.0;
  for (std::size_t k = 1; k < curve.size(); ++k) {
    area += (curve[k].fpr - curve[k - 1].fpr) * (curve[k].tpr + curve[k - 1].tpr) / 2.0;
  }
  return area;
}

MetricsReport evaluate(std::string model, std::span<const int> labels,
                       std::span<const double> probabilities,
                       double threshold) {
  MetricsReport r;
  r.model = std::move(model);
  r.confusion = confusion(labels, probabilities, threshold);
  r.metrics = prf1(r.confusion);
  const bool one_class =
      r.confusion.tn + r.confusion.fp == 0 || r.confusion.fn + r.confusion.tp == 0;
  if (one_class) {
    r.roc_auc = std::numeric_limits<double>::quiet_NaN();
    r.metrics.degenerate = true;
    r.metrics.degeneracies.emplace_back("roc_auc is undefined: labels hold one class");
  } else {
    r.roc_auc = roc_auc(labels, probabilities);
  }
  return r;
}

std::string format_confusion(const ConfusionMatrix& cm) {
  return fmt::format(
      "threshold {:.2f}\n"
      "                predicted 0  predicted 1\n"
      "actual 0     {:>12}  {:>11}\n"
      "actual 1     {:>12}  {:>11}\n",
      cm.threshold, cm.tn, cm.fp, cm.fn, cm.tp);
}

}  // namespace wdsguard
