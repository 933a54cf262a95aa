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

#ifndef WDSGUARD_LSTM_H_
#define WDSGUARD_LSTM_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "wdsguard/dataset.h"
#include "wdsguard/matrix.h"

namespace wdsguard {

// Stride-1 sliding windows over a time-ordered matrix. Window w covers rows
// [end_rows[w] - seq_len + 1, end_rows[w]] and carries the label of its last
// row. Values are stored (window, step, feature) row-major.
struct SequenceBatch {
  std::size_t seq_len = 0;
  std::size_t n_features = 0;
  std::vector<double> values;
  Labels labels;
  std::vector<std::size_t> end_rows;

  std::size_t size() const { return labels.size(); }
  std::span<const double> window(std::size_t w) const {
    return {values.data() + w * seq_len * n_features, seq_len * n_features};
  }
  double at(std::size_t w, std::size_t step, std::size_t feature) const {
    return values[(w * seq_len + step) * n_features + feature];
  }
  // Windows picked by position, in the given order.
  SequenceBatch subset(std::span<const std::size_t> windows) const;
};

SequenceBatch make_windows(const Matrix& x, std::span<const int> y,
                           int seq_len);

// One window per requested row r, ending at max(r, seq_len - 1), so rows at
// the left edge share the first full window.
SequenceBatch make_windows_at(const Matrix& x, std::span<const int> y,
                              std::span<const std::size_t> rows, int seq_len);

struct LstmConfig {
  int hidden_units = 64;
  double dropout_rate = 0.2;
  int seq_len = 10;
  int epochs = 30;
  int batch_size = 64;
  // Adam step size; moments use beta1 = 0.9, beta2 = 0.999, eps = 1e-8.
  double learning_rate = 1e-3;
  // Unset: w_c = N / (2 N_c) from the training windows.
  std::optional<std::pair<double, double>> class_weights;
  // Scaled inputs are clamped to this range before entering the network.
  double clamp_low = -0.05;
  double clamp_high = 1.05;
  std::uint64_t seed = 0;

  friend bool operator==(const LstmConfig&, const LstmConfig&) = default;
};

// Gate blocks are stacked [input; forget; cell; output] along the rows of
// w_in (4H x D), w_rec (4H x H) and bias (4H).
template <typename T>
struct LstmParams {
  using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

  Mat w_in;
  Mat w_rec;
  Vec bias;
  Vec w_out;
  Vec b_out;  // size 1

  int hidden() const { return static_cast<int>(w_rec.cols()); }
  int inputs() const { return static_cast<int>(w_in.cols()); }

  static LstmParams zeros(int inputs, int hidden);

  template <typename Fn>
  void for_each(Fn&& fn) {
    fn(w_in);
    fn(w_rec);
    fn(bias);
    fn(w_out);
    fn(b_out);
  }

  template <typename U>
  LstmParams<U> cast() const {
    return {w_in.template cast<U>(), w_rec.template cast<U>(),
            bias.template cast<U>(), w_out.template cast<U>(),
            b_out.template cast<U>()};
  }

  bool operator==(const LstmParams& o) const {
    return w_in == o.w_in && w_rec == o.w_rec && bias == o.bias &&
           w_out == o.w_out && b_out == o.b_out;
  }
};

// Uniform(-1/sqrt(H), 1/sqrt(H)) everywhere except forget-gate bias = 1.
template <typename T>
LstmParams<T> init_lstm_params(int inputs, int hidden, std::uint64_t seed);

// Probability of class 1 for each listed window, dropout off.
template <typename T>
std::vector<double> lstm_forward_batch(const LstmParams<T>& params,
                                       const SequenceBatch& batch,
                                       std::span<const std::size_t> windows,
                                       double clamp_low, double clamp_high);

// Mean class-weighted binary cross-entropy over the listed windows and its
// gradient (written to *grad when non-null). `dropout_mask`, when non-empty,
// is H x |windows| and multiplies the final hidden state.
template <typename T>
T lstm_loss_and_gradient(
    const LstmParams<T>& params, const SequenceBatch& batch,
    std::span<const std::size_t> windows, std::pair<double, double> class_weights,
    const typename LstmParams<T>::Mat& dropout_mask, LstmParams<T>* grad,
    double clamp_low, double clamp_high);

struct LstmModel {
  LstmParams<float> params;
  LstmConfig config;
  std::vector<std::string> feature_names;
  // Min-max scaler fitted on the training rows, when the model owns one.
  std::optional<ScalerParams> scaler;
  std::pair<double, double> class_weights{1.0, 1.0};
  std::vector<double> epoch_loss;
  std::vector<std::string> warnings;

  bool fitted() const { return params.w_in.size() > 0; }
};

// Mini-batch Adam with full backpropagation through time. A single-class
// batch still trains but records a degeneracy warning.
LstmModel train_lstm(const SequenceBatch& batch, const LstmConfig& config,
                     std::vector<std::string> feature_names = {});

double lstm_forward(const LstmModel& model, std::span<const double> window);

// One probability per window.
std::vector<double> lstm_predict_windows(const LstmModel& model,
                                         const SequenceBatch& batch);

// Row-aligned probabilities for a contiguous batch from make_windows: row r
// gets the window ending at r; rows before the first window end reuse the
// first window's probability.
std::vector<double> lstm_predict_proba(const LstmModel& model,
                                       const SequenceBatch& batch);

}  // namespace wdsguard

#endif  // WDSGUARD_LSTM_H_
