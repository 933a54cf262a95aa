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

#include "wdsguard/ensemble.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "wdsguard/errors.h"
#include "wdsguard/rng.h"

namespace wdsguard {

// ---------------------------------------------------------------------------
// Logistic regression.

double MetaLearner::predict(std::span<const double> features) const {
  if (!fitted) throw InvalidArgument("meta-learner is not fitted");
  if (features.size() != weights.size()) {
    throw InvalidArgument("meta-feature count does not match the learner");
  }
  double z = intercept;
  for (std::size_t j = 0; j < weights.size(); ++j) z += weights[j] * features[j];
  return sigmoid(z);
}

namespace {

double penalized_loss(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                      const Eigen::VectorXd& beta, double l2) {
  const Eigen::VectorXd z = design * beta;
  double loss = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double m = z(i);
    const double softplus =
        m > 0.0 ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m));
    loss += softplus - y(i) * m;
  }
  return loss + 0.5 * l2 * beta.tail(beta.size() - 1).squaredNorm();
}

}  // namespace

MetaLearner fit_logistic_regression(const Matrix& features,
                                    std::span<const int> labels,
                                    const LogisticConfig& config) {
  if (features.cols() == 0) throw InvalidArgument("no meta-features");
  if (labels.size() != features.rows()) {
    throw InvalidArgument("label count does not match row count");
  }
  const auto positives = std::count(labels.begin(), labels.end(), 1);
  if (positives == 0 || static_cast<std::size_t>(positives) == labels.size()) {
    throw InvalidArgument("logistic regression needs both classes present");
  }
  if (config.l2 < 0.0) throw InvalidArgument("l2 must be >= 0");

  const auto n = static_cast<Eigen::Index>(features.rows());
  const auto m = static_cast<Eigen::Index>(features.cols());
  Eigen::MatrixXd design(n, m + 1);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    design(i, 0) = 1.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      design(i, j + 1) = features(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    }
    y(i) = labels[static_cast<std::size_t>(i)];
  }
  Eigen::VectorXd penalty = Eigen::VectorXd::Constant(m + 1, config.l2);
  penalty(0) = 0.0;

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(m + 1);
  MetaLearner out;
  double loss = penalized_loss(design, y, beta, config.l2);
  int it = 0;
  for (; it < config.max_iterations; ++it) {
    const Eigen::VectorXd z = design * beta;
    Eigen::VectorXd p(n);
    Eigen::VectorXd w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      p(i) = sigmoid(z(i));
      w(i) = p(i) * (1.0 - p(i));
    }
    const Eigen::VectorXd grad =
        design.transpose() * (p - y) + penalty.cwiseProduct(beta);
    out.gradient_norm = grad.norm();
    if (out.gradient_norm <= config.tolerance) break;
    Eigen::MatrixXd hess = design.transpose() * w.asDiagonal() * design;
    hess.diagonal() += penalty + Eigen::VectorXd::Constant(m + 1, 1e-12);
    const Eigen::VectorXd step = hess.ldlt().solve(grad);
    double t = 1.0;
    Eigen::VectorXd candidate = beta - step;
    double cand_loss = penalized_loss(design, y, candidate, config.l2);
    while (cand_loss > loss && t > 1e-10) {
      t *= 0.5;
      candidate = beta - t * step;
      cand_loss = penalized_loss(design, y, candidate, config.l2);
    }
    if (cand_loss > loss) break;
    beta = candidate;
    loss = cand_loss;
  }
  out.iterations = it;
  out.intercept = beta(0);
  out.weights.assign(beta.data() + 1, beta.data() + 1 + m);
  out.fitted = true;
  for (double v : out.weights) {
    if (!std::isfinite(v)) throw TrainingError("meta-learner weights diverged");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Members.

std::string_view to_string(MemberKind kind) {
  switch (kind) {
    case MemberKind::kForest:
      return "forest";
    case MemberKind::kGbt:
      return "gbt";
    case MemberKind::kLstm:
      return "lstm";
  }
  return "forest";
}

MemberKind member_kind_from_string(std::string_view text) {
  if (text == "forest" || text == "rf") return MemberKind::kForest;
  if (text == "gbt" || text == "xgb") return MemberKind::kGbt;
  if (text == "lstm") return MemberKind::kLstm;
  throw InvalidArgument(fmt::format("unknown model kind '{}'", text));
}

namespace {

std::uint64_t fold_seed(std::uint64_t base, std::uint64_t fold) {
  return fold == 0 ? base : derive_seed(base, fold);
}

void scale_windows(const ScalerParams& scaler, SequenceBatch& batch) {
  const std::size_t d = batch.n_features;
  for (std::size_t k = 0; k < batch.values.size(); ++k) {
    const std::size_t j = k % d;
    batch.values[k] = (batch.values[k] - scaler.offset[j]) / scaler.scale[j];
  }
}

void check_width(const MemberModel& member, const Matrix& x) {
  if (x.cols() != member.features.size()) {
    throw InvalidArgument(fmt::format("{} member expects {} features, got {}",
                                      to_string(member.kind),
                                      member.features.size(), x.cols()));
  }
}

}  // namespace

MemberModel fit_member(MemberKind kind, const Matrix& x, std::span<const int> y,
                       std::span<const std::size_t> train_rows,
                       std::span<const std::string> feature_names,
                       const MemberConfig& config, std::uint64_t fold) {
  if (train_rows.empty()) throw InvalidArgument("no training rows");
  if (feature_names.size() != x.cols()) {
    throw InvalidArgument("feature name count does not match matrix width");
  }
  MemberModel member;
  member.kind = kind;
  member.features.assign(feature_names.begin(), feature_names.end());
  const Matrix train_x = x.select_rows(train_rows);
  const Labels train_y = select(y, train_rows);
  const auto train_pos = static_cast<std::size_t>(
      std::count(train_y.begin(), train_y.end(), 1));
  member.rows_before = train_y.size();
  member.minority_before = std::min(train_pos, train_y.size() - train_pos);

  SmoteConfig smote = config.smote;
  smote.seed = fold_seed(config.smote.seed, fold);
  const bool can_smote = member.minority_before >= 2;

  if (kind == MemberKind::kLstm) {
    member.scaler = fit_scaler(train_x, feature_names, ScalerKind::kMinMax);
    LstmConfig cfg = config.lstm;
    cfg.seed = fold_seed(config.lstm.seed, fold);
    std::vector<std::size_t> rows;
    for (std::size_t r : train_rows) {
      if (r + 1 >= static_cast<std::size_t>(cfg.seq_len)) rows.push_back(r);
    }
    if (rows.empty()) throw InvalidArgument("no complete training windows");
    SequenceBatch batch = make_windows_at(x, y, rows, cfg.seq_len);
    scale_windows(member.scaler, batch);
    if (config.lstm_use_smote && can_smote) {
      const std::size_t width = batch.seq_len * batch.n_features;
      Matrix flat(batch.size(), width, batch.values);
      auto res = smote_oversample(flat, batch.labels, smote);
      for (auto& w : res.warnings) member.warnings.push_back(w);
      for (std::size_t k = batch.size(); k < res.y.size(); ++k) {
        batch.end_rows.push_back(res.origins[k - batch.size()].seed_row);
      }
      batch.values = std::move(res.x.data());
      batch.labels = std::move(res.y);
    }
    member.lstm = train_lstm(batch, cfg, member.features);
    member.lstm->scaler = member.scaler;
    for (const auto& w : member.lstm->warnings) member.warnings.push_back(w);
    const auto pos = static_cast<std::size_t>(
        std::count(batch.labels.begin(), batch.labels.end(), 1));
    member.rows_after = batch.size();
    member.minority_after = std::min(pos, batch.size() - pos);
    return member;
  }

  member.scaler = fit_scaler(train_x, feature_names, ScalerKind::kZScore);
  Matrix fit_x = apply_scaler(member.scaler, train_x, feature_names);
  Labels fit_y = train_y;
  if (can_smote) {
    auto res = smote_oversample(fit_x, fit_y, smote);
    for (auto& w : res.warnings) member.warnings.push_back(w);
    fit_x = std::move(res.x);
    fit_y = std::move(res.y);
  } else {
    member.warnings.push_back("SMOTE skipped: fewer than 2 minority rows");
  }
  const auto pos = static_cast<std::size_t>(std::count(fit_y.begin(), fit_y.end(), 1));
  member.rows_after = fit_y.size();
  member.minority_after = std::min(pos, fit_y.size() - pos);

  if (kind == MemberKind::kForest) {
    ForestConfig cfg = config.forest;
    cfg.seed = fold_seed(config.forest.seed, fold);
    member.forest = fit_forest(fit_x, fit_y, cfg, member.features);
  } else {
    GbtConfig cfg = config.gbt;
    cfg.seed = fold_seed(config.gbt.seed, fold);
    member.gbt = fit_gbt(fit_x, fit_y, cfg, member.features);
  }
  return member;
}

std::vector<double> predict_member(const MemberModel& member, const Matrix& x,
                                   std::span<const std::size_t> rows) {
  check_width(member, x);
  if (member.kind == MemberKind::kLstm) {
    if (!member.lstm) throw InvalidArgument("LSTM member is not fitted");
    const Labels dummy(x.rows(), 0);
    SequenceBatch batch =
        make_windows_at(x, dummy, rows, member.lstm->config.seq_len);
    scale_windows(member.scaler, batch);
    return lstm_predict_windows(*member.lstm, batch);
  }
  const Matrix scaled =
      apply_scaler(member.scaler, x.select_rows(rows), member.features);
  if (member.kind == MemberKind::kForest) {
    if (!member.forest) throw InvalidArgument("forest member is not fitted");
    return forest_predict_proba(*member.forest, scaled);
  }
  if (!member.gbt) throw InvalidArgument("boosted member is not fitted");
  return gbt_predict_proba(*member.gbt, scaled);
}

RowPredictor member_row_predictor(const MemberModel& member, const Matrix& x,
                                  std::size_t context_row) {
  check_width(member, x);
  if (member.kind != MemberKind::kLstm) {
    return [&member](const Matrix& candidates) {
      std::vector<std::size_t> rows(candidates.rows());
      std::iota(rows.begin(), rows.end(), std::size_t{0});
      return predict_member(member, candidates, rows);
    };
  }
  if (!member.lstm) throw InvalidArgument("LSTM member is not fitted");
  if (context_row >= x.rows()) throw InvalidArgument("context row out of range");
  const auto len = static_cast<std::size_t>(member.lstm->config.seq_len);
  const std::size_t end = std::max(context_row, len - 1);
  const std::size_t first = end + 1 - len;
  const std::size_t step = context_row - first;
  const std::size_t d = x.cols();
  std::vector<double> context(x.data().begin() + static_cast<std::ptrdiff_t>(first * d),
                              x.data().begin() + static_cast<std::ptrdiff_t>((end + 1) * d));
  return [&member, context = std::move(context), step, len, d](const Matrix& candidates) {
    SequenceBatch batch;
    batch.seq_len = len;
    batch.n_features = d;
    batch.values.reserve(candidates.rows() * context.size());
    for (std::size_t r = 0; r < candidates.rows(); ++r) {
      const auto before = batch.values.size();
      batch.values.insert(batch.values.end(), context.begin(), context.end());
      const auto c = candidates.row(r);
      std::copy(c.begin(), c.end(),
                batch.values.begin() + static_cast<std::ptrdiff_t>(before + step * d));
      batch.labels.push_back(0);
      batch.end_rows.push_back(r);
    }
    scale_windows(member.scaler, batch);
    return lstm_predict_windows(*member.lstm, batch);
  };
}

// ---------------------------------------------------------------------------
// Ensembles.

std::string_view to_string(Combiner combiner) {
  return combiner == Combiner::kAverage ? "average" : "stacked";
}

Combiner combiner_from_string(std::string_view text) {
  if (text == "average") return Combiner::kAverage;
  if (text == "stacked") return Combiner::kStacked;
  throw InvalidArgument(fmt::format("unknown combiner '{}'", text));
}

std::vector<double> average_ensemble(
    std::span<const std::vector<double>> member_probabilities) {
  if (member_probabilities.empty()) throw InvalidArgument("no members to average");
  const std::size_t n = member_probabilities.front().size();
  for (const auto& p : member_probabilities) {
    if (p.size() != n) throw InvalidArgument("member prediction lengths differ");
  }
  std::vector<double> out(n, 0.0);
  const double m = static_cast<double>(member_probabilities.size());
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (const auto& p : member_probabilities) s += p[i];
    out[i] = s / m;
  }
  return out;
}

std::string StackConfig::name() const {
  std::string out;
  for (std::size_t k = 0; k < members.size(); ++k) {
    if (k > 0) out += '+';
    out += to_string(members[k]);
  }
  return fmt::format("{}:{}", to_string(combiner), out);
}

std::vector<int> assign_folds(std::span<const int> y,
                              std::span<const std::size_t> train_rows,
                              int folds, std::uint64_t seed) {
  if (folds < 2) throw InvalidArgument("oof_folds must be >= 2");
  std::vector<int> fold_of(train_rows.size(), 0);
  Rng rng(seed);
  for (int cls = 0; cls < 2; ++cls) {
    std::vector<std::size_t> positions;
    for (std::size_t i = 0; i < train_rows.size(); ++i) {
      if (y[train_rows[i]] == cls) positions.push_back(i);
    }
    rng.shuffle(std::span<std::size_t>(positions));
    for (std::size_t k = 0; k < positions.size(); ++k) {
      fold_of[positions[k]] = static_cast<int>(k % static_cast<std::size_t>(folds));
    }
  }
  return fold_of;
}

OofPredictions out_of_fold_predictions(
    MemberKind kind, const Matrix& x, std::span<const int> y,
    std::span<const std::size_t> train_rows, std::span<const int> fold_of,
    std::span<const std::string> feature_names, const MemberConfig& config) {
  if (fold_of.size() != train_rows.size()) {
    throw InvalidArgument("fold assignment does not match training rows");
  }
  const int folds = *std::max_element(fold_of.begin(), fold_of.end()) + 1;
  OofPredictions out;
  out.kind = kind;
  out.probabilities.assign(train_rows.size(), 0.0);
  out.fold_of.assign(fold_of.begin(), fold_of.end());
  out.fit_rows.resize(static_cast<std::size_t>(folds));
  for (int k = 0; k < folds; ++k) {
    std::vector<std::size_t> fit_rows, held_rows, held_pos;
    for (std::size_t i = 0; i < train_rows.size(); ++i) {
      if (fold_of[i] == k) {
        held_rows.push_back(train_rows[i]);
        held_pos.push_back(i);
      } else {
        fit_rows.push_back(train_rows[i]);
      }
    }
    if (held_rows.empty()) continue;
    MemberModel member;
    try {
      member = fit_member(kind, x, y, fit_rows, feature_names, config,
                          static_cast<std::uint64_t>(k) + 1);
    } catch (const Error& e) {
      throw TrainingError(fmt::format("{} member failed on fold {}: {}",
                                      to_string(kind), k, e.what()));
    }
    const auto preds = predict_member(member, x, held_rows);
    for (std::size_t j = 0; j < held_pos.size(); ++j) {
      out.probabilities[held_pos[j]] = preds[j];
    }
    out.fit_rows[static_cast<std::size_t>(k)] = std::move(fit_rows);
  }
  return out;
}

EnsembleModel assemble_ensemble(const StackConfig& config,
                                std::vector<MemberModel> members,
                                std::span<const OofPredictions> oof,
                                std::span<const int> y,
                                std::span<const std::size_t> train_rows) {
  if (members.size() != config.members.size()) {
    throw InvalidArgument("member count does not match the stack config");
  }
  for (std::size_t k = 0; k < members.size(); ++k) {
    if (members[k].kind != config.members[k]) {
      throw InvalidArgument("member order does not match the stack config");
    }
  }
  EnsembleModel model;
  model.config = config;
  model.members = std::move(members);
  if (config.combiner == Combiner::kStacked) {
    if (oof.size() != model.members.size()) {
      throw InvalidArgument("need out-of-fold predictions for every member");
    }
    Matrix meta_x(train_rows.size(), oof.size());
    for (std::size_t k = 0; k < oof.size(); ++k) {
      if (oof[k].kind != config.members[k] ||
          oof[k].probabilities.size() != train_rows.size()) {
        throw InvalidArgument("out-of-fold predictions do not match members");
      }
      for (std::size_t i = 0; i < train_rows.size(); ++i) {
        meta_x(i, k) = oof[k].probabilities[i];
      }
    }
    const Labels meta_y = select(y, train_rows);
    model.meta = fit_logistic_regression(meta_x, meta_y, config.meta);
  }
  return model;
}

EnsembleModel fit_stack(const Matrix& x, std::span<const int> y,
                        std::span<const std::size_t> train_rows,
                        std::span<const std::string> feature_names,
                        const StackConfig& config,
                        const MemberConfig& member_config) {
  if (config.members.empty()) throw InvalidArgument("ensemble has no members");
  std::vector<OofPredictions> oof;
  if (config.combiner == Combiner::kStacked) {
    const auto fold_of = assign_folds(y, train_rows, config.oof_folds, config.seed);
    for (MemberKind kind : config.members) {
      oof.push_back(out_of_fold_predictions(kind, x, y, train_rows, fold_of,
                                            feature_names, member_config));
    }
  }
  std::vector<MemberModel> members;
  for (MemberKind kind : config.members) {
    try {
      members.push_back(
          fit_member(kind, x, y, train_rows, feature_names, member_config));
    } catch (const Error& e) {
      throw TrainingError(
          fmt::format("{} member failed: {}", to_string(kind), e.what()));
    }
  }
  return assemble_ensemble(config, std::move(members), oof, y, train_rows);
}

std::vector<double> combine(const EnsembleModel& model,
                            std::span<const std::vector<double>> member_probs) {
  if (member_probs.size() != model.config.members.size()) {
    throw InvalidArgument("member prediction count does not match the ensemble");
  }
  if (model.config.combiner == Combiner::kAverage) {
    return average_ensemble(member_probs);
  }
  const std::size_t n = member_probs.front().size();
  std::vector<double> out(n);
  std::vector<double> features(member_probs.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < member_probs.size(); ++k) {
      features[k] = member_probs[k][i];
    }
    out[i] = model.meta.predict(features);
  }
  return out;
}

std::vector<double> stack_predict_proba(const EnsembleModel& model,
                                        const Matrix& x,
                                        std::span<const std::size_t> rows) {
  if (model.members.empty()) throw InvalidArgument("ensemble is not fitted");
  std::vector<std::vector<double>> probs;
  for (const auto& m : model.members) probs.push_back(predict_member(m, x, rows));
  return combine(model, probs);
}

RowPredictor ensemble_row_predictor(const EnsembleModel& model, const Matrix& x,
                                    std::size_t context_row) {
  std::vector<RowPredictor> parts;
  for (const auto& m : model.members) {
    parts.push_back(member_row_predictor(m, x, context_row));
  }
  return [&model, parts = std::move(parts)](const Matrix& candidates) {
    std::vector<std::vector<double>> probs;
    for (const auto& p : parts) probs.push_back(p(candidates));
    return combine(model, probs);
  };
}

}  // namespace wdsguard
