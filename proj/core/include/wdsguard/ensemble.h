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

#ifndef WDSGUARD_ENSEMBLE_H_
#define WDSGUARD_ENSEMBLE_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wdsguard/dataset.h"
#include "wdsguard/forest.h"
#include "wdsguard/gbt.h"
#include "wdsguard/lstm.h"
#include "wdsguard/matrix.h"
#include "wdsguard/resampling.h"

namespace wdsguard {

// ---------------------------------------------------------------------------
// Logistic-regression meta-learner.

struct LogisticConfig {
  // Penalty (l2 / 2) * ||w||^2 added to the summed log-loss; the intercept
  // is not penalized.
  double l2 = 1.0;
  int max_iterations = 100;
  double tolerance = 1e-8;

  friend bool operator==(const LogisticConfig&, const LogisticConfig&) = default;
};

struct MetaLearner {
  std::vector<double> weights;
  double intercept = 0.0;
  bool fitted = false;
  int iterations = 0;
  double gradient_norm = 0.0;

  double predict(std::span<const double> features) const;
};

// Minimizes the summed log-loss plus 0.5 * l2 * |w|^2 (intercept not
// penalized) by damped Newton iterations until the gradient norm falls below
// tolerance.
MetaLearner fit_logistic_regression(const Matrix& features,
                                    std::span<const int> labels,
                                    const LogisticConfig& config);

// ---------------------------------------------------------------------------
// Base members. A member owns its preprocessing: tree members z-score and
// SMOTE their training rows; the recurrent member min-max scales and windows
// the time-ordered frame.

enum class MemberKind { kForest, kGbt, kLstm };

std::string_view to_string(MemberKind kind);
MemberKind member_kind_from_string(std::string_view text);

struct MemberConfig {
  ForestConfig forest;
  GbtConfig gbt;
  LstmConfig lstm;
  SmoteConfig smote;
  // Synthesize minority windows for the recurrent member instead of relying
  // on class weights alone.
  bool lstm_use_smote = false;
};

struct MemberModel {
  MemberKind kind = MemberKind::kForest;
  std::vector<std::string> features;
  ScalerParams scaler;
  std::optional<ForestModel> forest;
  std::optional<GbtModel> gbt;
  std::optional<LstmModel> lstm;
  // Training-set class counts before and after resampling.
  std::size_t rows_before = 0;
  std::size_t minority_before = 0;
  std::size_t rows_after = 0;
  std::size_t minority_after = 0;
  std::vector<std::string> warnings;
};

// `x` is the full time-ordered feature matrix; only `train_rows` labels are
// used. `fold` varies the member's random streams for out-of-fold refits.
MemberModel fit_member(MemberKind kind, const Matrix& x, std::span<const int> y,
                       std::span<const std::size_t> train_rows,
                       std::span<const std::string> feature_names,
                       const MemberConfig& config, std::uint64_t fold = 0);

// Class-1 probability for each listed row of the full frame.
std::vector<double> predict_member(const MemberModel& member, const Matrix& x,
                                   std::span<const std::size_t> rows);

// A batch predictor over candidate feature rows. For the recurrent member the
// candidate replaces the last step of the window ending at `context_row`.
using RowPredictor = std::function<std::vector<double>(const Matrix&)>;
RowPredictor member_row_predictor(const MemberModel& member, const Matrix& x,
                                  std::size_t context_row);

// ---------------------------------------------------------------------------
// Ensembles.

enum class Combiner { kAverage, kStacked };

std::string_view to_string(Combiner combiner);
Combiner combiner_from_string(std::string_view text);

std::vector<double> average_ensemble(
    std::span<const std::vector<double>> member_probabilities);

struct StackConfig {
  std::vector<MemberKind> members;
  Combiner combiner = Combiner::kStacked;
  LogisticConfig meta;
  int oof_folds = 5;
  std::uint64_t seed = 0;

  std::string name() const;
};

// Out-of-fold predictions of one member over the training rows.
struct OofPredictions {
  MemberKind kind = MemberKind::kForest;
  // Aligned with train_rows.
  std::vector<double> probabilities;
  // fold_of[i] is the held-out fold of train_rows[i].
  std::vector<int> fold_of;
  // Rows each fold's model was fitted on.
  std::vector<std::vector<std::size_t>> fit_rows;
};

// Stratified fold assignment for the training rows.
std::vector<int> assign_folds(std::span<const int> y,
                              std::span<const std::size_t> train_rows,
                              int folds, std::uint64_t seed);

OofPredictions out_of_fold_predictions(
    MemberKind kind, const Matrix& x, std::span<const int> y,
    std::span<const std::size_t> train_rows, std::span<const int> fold_of,
    std::span<const std::string> feature_names, const MemberConfig& config);

struct EnsembleModel {
  StackConfig config;
  // Same order as config.members; defines the meta-feature order.
  std::vector<MemberModel> members;
  MetaLearner meta;
};

// Fits members on all training rows and, for the stacked combiner, the
// meta-learner on out-of-fold member predictions.
EnsembleModel fit_stack(const Matrix& x, std::span<const int> y,
                        std::span<const std::size_t> train_rows,
                        std::span<const std::string> feature_names,
                        const StackConfig& config,
                        const MemberConfig& member_config);

// Assembles an ensemble from already fitted members and precomputed
// out-of-fold predictions (same member order as config.members).
EnsembleModel assemble_ensemble(const StackConfig& config,
                                std::vector<MemberModel> members,
                                std::span<const OofPredictions> oof,
                                std::span<const int> y,
                                std::span<const std::size_t> train_rows);

// Combines per-member probability vectors (member order).
std::vector<double> combine(const EnsembleModel& model,
                            std::span<const std::vector<double>> member_probs);

std::vector<double> stack_predict_proba(const EnsembleModel& model,
                                        const Matrix& x,
                                        std::span<const std::size_t> rows);

RowPredictor ensemble_row_predictor(const EnsembleModel& model, const Matrix& x,
                                    std::size_t context_row);

}  // namespace wdsguard

#endif  // WDSGUARD_ENSEMBLE_H_
