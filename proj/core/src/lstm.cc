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

#include "wdsguard/lstm.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "wdsguard/errors.h"
#include "wdsguard/rng.h"

namespace wdsguard {

SequenceBatch SequenceBatch::subset(std::span<const std::size_t> windows) const {
  SequenceBatch out;
  out.seq_len = seq_len;
  out.n_features = n_features;
  const std::size_t stride = seq_len * n_features;
  out.values.reserve(windows.size() * stride);
  for (std::size_t w : windows) {
    const auto src = window(w);
    out.values.insert(out.values.end(), src.begin(), src.end());
    out.labels.push_back(labels[w]);
    out.end_rows.push_back(end_rows[w]);
  }
  return out;
}

SequenceBatch make_windows(const Matrix& x, std::span<const int> y,
                           int seq_len) {
  if (seq_len < 1) throw InvalidArgument("seq_len must be >= 1");
  if (y.size() != x.rows()) {
    throw InvalidArgument("label count does not match row count");
  }
  const auto len = static_cast<std::size_t>(seq_len);
  if (x.rows() < len) {
    throw InvalidArgument(fmt::format(
        "{} rows are fewer than the sequence length {}", x.rows(), seq_len));
  }
  SequenceBatch out;
  out.seq_len = len;
  out.n_features = x.cols();
  const std::size_t n_windows = x.rows() - len + 1;
  out.values.reserve(n_windows * len * x.cols());
  for (std::size_t w = 0; w < n_windows; ++w) {
    const auto first = x.data().begin() + static_cast<std::ptrdiff_t>(w * x.cols());
    out.values.insert(out.values.end(), first,
                      first + static_cast<std::ptrdiff_t>(len * x.cols()));
    out.labels.push_back(y[w + len - 1]);
    out.end_rows.push_back(w + len - 1);
  }
  return out;
}

SequenceBatch make_windows_at(const Matrix& x, std::span<const int> y,
                              std::span<const std::size_t> rows, int seq_len) {
  if (seq_len < 1) throw InvalidArgument("seq_len must be >= 1");
  if (y.size() != x.rows()) {
    throw InvalidArgument("label count does not match row count");
  }
  const auto len = static_cast<std::size_t>(seq_len);
  if (x.rows() < len) {
    throw InvalidArgument(fmt::format(
        "{} rows are fewer than the sequence length {}", x.rows(), seq_len));
  }
  SequenceBatch out;
  out.seq_len = len;
  out.n_features = x.cols();
  out.values.reserve(rows.size() * len * x.cols());
  for (std::size_t r : rows) {
    if (r >= x.rows()) throw InvalidArgument("window row out of range");
    const std::size_t end = std::max(r, len - 1);
    const auto first =
        x.data().begin() + static_cast<std::ptrdiff_t>((end + 1 - len) * x.cols());
    out.values.insert(out.values.end(), first,
                      first + static_cast<std::ptrdiff_t>(len * x.cols()));
    out.labels.push_back(y[r]);
    out.end_rows.push_back(end);
  }
  return out;
}

template <typename T>
LstmParams<T> LstmParams<T>::zeros(int inputs, int hidden) {
  LstmParams p;
  p.w_in = Mat::Zero(4 * hidden, inputs);
  p.w_rec = Mat::Zero(4 * hidden, hidden);
  p.bias = Vec::Zero(4 * hidden);
  p.w_out = Vec::Zero(hidden);
  p.b_out = Vec::Zero(1);
  return p;
}

template <typename T>
LstmParams<T> init_lstm_params(int inputs, int hidden, std::uint64_t seed) {
  if (inputs < 1 || hidden < 1) {
    throw InvalidArgument("LSTM needs at least one input and one hidden unit");
  }
  auto p = LstmParams<T>::zeros(inputs, hidden);
  Rng rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  p.for_each([&](auto& tensor) {
    for (Eigen::Index k = 0; k < tensor.size(); ++k) {
      tensor.data()[k] = static_cast<T>((2.0 * rng.uniform() - 1.0) * bound);
    }
  });
  p.bias.segment(hidden, hidden).setOnes();
  return p;
}

namespace {

template <typename T>
struct Cache {
  using Mat = typename LstmParams<T>::Mat;
  // Per step, each H x B (x_t is D x B).
  std::vector<Mat> x, i, f, g, o, c, tanh_c, h;
  Mat h_final;  // after dropout
  Eigen::Matrix<T, 1, Eigen::Dynamic> logits;
};

template <typename T>
T sigmoid_t(T z) {
  return z >= T(0) ? T(1) / (T(1) + std::exp(-z))
                   : std::exp(z) / (T(1) + std::exp(z));
}

template <typename T>
void forward(const LstmParams<T>& p, const SequenceBatch& batch,
             std::span<const std::size_t> windows,
             const typename LstmParams<T>::Mat& mask, double lo, double hi,
             Cache<T>& cache) {
  using Mat = typename LstmParams<T>::Mat;
  const auto steps = batch.seq_len;
  const auto d = static_cast<Eigen::Index>(batch.n_features);
  const auto b = static_cast<Eigen::Index>(windows.size());
  const Eigen::Index h = p.hidden();
  if (d != p.inputs()) {
    throw InvalidArgument(fmt::format("LSTM expects {} features, got {}",
                                      p.inputs(), d));
  }
  for (auto* v : {&cache.x, &cache.i, &cache.f, &cache.g, &cache.o, &cache.c,
                  &cache.tanh_c, &cache.h}) {
    v->assign(steps, Mat());
  }
  Mat h_prev = Mat::Zero(h, b);
  Mat c_prev = Mat::Zero(h, b);
  Mat z(4 * h, b);
  for (std::size_t t = 0; t < steps; ++t) {
    Mat& xt = cache.x[t];
    xt.resize(d, b);
    for (Eigen::Index col = 0; col < b; ++col) {
      const std::size_t w = windows[static_cast<std::size_t>(col)];
      for (Eigen::Index j = 0; j < d; ++j) {
        xt(j, col) = static_cast<T>(
            std::clamp(batch.at(w, t, static_cast<std::size_t>(j)), lo, hi));
      }
    }
    z.noalias() = p.w_in * xt;
    z.noalias() += p.w_rec * h_prev;
    z.colwise() += p.bias;
    cache.i[t] = z.topRows(h).unaryExpr([](T v) { return sigmoid_t(v); });
    cache.f[t] = z.middleRows(h, h).unaryExpr([](T v) { return sigmoid_t(v); });
    cache.g[t] = z.middleRows(2 * h, h).array().tanh().matrix();
    cache.o[t] = z.bottomRows(h).unaryExpr([](T v) { return sigmoid_t(v); });
    cache.c[t] = (cache.f[t].array() * c_prev.array() +
                  cache.i[t].array() * cache.g[t].array())
                     .matrix();
    cache.tanh_c[t] = cache.c[t].array().tanh().matrix();
    cache.h[t] = (cache.o[t].array() * cache.tanh_c[t].array()).matrix();
    h_prev = cache.h[t];
    c_prev = cache.c[t];
  }
  cache.h_final = mask.size() > 0
                      ? Mat((h_prev.array() * mask.array()).matrix())
                      : h_prev;
  cache.logits = (p.w_out.transpose() * cache.h_final).array() + p.b_out(0);
}

}  // namespace

template <typename T>
std::vector<double> lstm_forward_batch(const LstmParams<T>& params,
                                       const SequenceBatch& batch,
                                       std::span<const std::size_t> windows,
                                       double clamp_low, double clamp_high) {
  std::vector<double> out;
  out.reserve(windows.size());
  Cache<T> cache;
  const typename LstmParams<T>::Mat no_mask;
  constexpr std::size_t kChunk = 256;
  for (std::size_t start = 0; start < windows.size(); start += kChunk) {
    const auto part = windows.subspan(start, std::min(kChunk, windows.size() - start));
    forward(params, batch, part, no_mask, clamp_low, clamp_high, cache);
    for (Eigen::Index k = 0; k < cache.logits.size(); ++k) {
      out.push_back(static_cast<double>(sigmoid_t(cache.logits(k))));
    }
  }
  return out;
}

template <typename T>
T lstm_loss_and_gradient(
    const LstmParams<T>& p, const SequenceBatch& batch,
    std::span<const std::size_t> windows, std::pair<double, double> class_weights,
    const typename LstmParams<T>::Mat& dropout_mask, LstmParams<T>* grad,
    double clamp_low, double clamp_high) {
  using Mat = typename LstmParams<T>::Mat;
  if (windows.empty()) throw InvalidArgument("empty mini-batch");
  Cache<T> cache;
  forward(p, batch, windows, dropout_mask, clamp_low, clamp_high, cache);

  const auto b = static_cast<Eigen::Index>(windows.size());
  const Eigen::Index h = p.hidden();
  const T inv_b = T(1) / static_cast<T>(b);
  T loss = 0;
  Eigen::Matrix<T, 1, Eigen::Dynamic> dlogit(b);
  for (Eigen::Index k = 0; k < b; ++k) {
    const int y = batch.labels[windows[static_cast<std::size_t>(k)]];
    const T w = static_cast<T>(y == 1 ? class_weights.second : class_weights.first);
    const T z = cache.logits(k);
    const T softplus = z > T(0) ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
    loss += w * (softplus - (y == 1 ? z : T(0)));
    dlogit(k) = w * (sigmoid_t(z) - static_cast<T>(y)) * inv_b;
  }
  loss *= inv_b;
  if (grad == nullptr) return loss;

  *grad = LstmParams<T>::zeros(p.inputs(), static_cast<int>(h));
  grad->w_out.noalias() = cache.h_final * dlogit.transpose();
  grad->b_out(0) = dlogit.sum();

  Mat dh = p.w_out * dlogit;
  if (dropout_mask.size() > 0) dh = (dh.array() * dropout_mask.array()).matrix();
  Mat dc = Mat::Zero(h, b);
  Mat dz(4 * h, b);
  const auto steps = batch.seq_len;
  for (std::size_t step = steps; step-- > 0;) {
    const Mat& i = cache.i[step];
    const Mat& f = cache.f[step];
    const Mat& g = cache.g[step];
    const Mat& o = cache.o[step];
    const Mat& tc = cache.tanh_c[step];
    dc.array() += dh.array() * o.array() * (T(1) - tc.array().square());
    const Mat c_prev = step > 0 ? cache.c[step - 1] : Mat::Zero(h, b);
    const Mat h_prev = step > 0 ? cache.h[step - 1] : Mat::Zero(h, b);
    dz.topRows(h) = (dc.array() * g.array() * i.array() * (T(1) - i.array())).matrix();
    dz.middleRows(h, h) =
        (dc.array() * c_prev.array() * f.array() * (T(1) - f.array())).matrix();
    dz.middleRows(2 * h, h) =
        (dc.array() * i.array() * (T(1) - g.array().square())).matrix();
    dz.bottomRows(h) =
        (dh.array() * tc.array() * o.array() * (T(1) - o.array())).matrix();
    grad->w_in.noalias() += dz * cache.x[step].transpose();
    grad->w_rec.noalias() += dz * h_prev.transpose();
    grad->bias += dz.rowwise().sum();
    dh.noalias() = p.w_rec.transpose() * dz;
    dc = (dc.array() * f.array()).matrix();
  }
  return loss;
}

template LstmParams<float> LstmParams<float>::zeros(int, int);
template LstmParams<double> LstmParams<double>::zeros(int, int);
template LstmParams<float> init_lstm_params<float>(int, int, std::uint64_t);
template LstmParams<double> init_lstm_params<double>(int, int, std::uint64_t);
template std::vector<double> lstm_forward_batch<float>(
    const LstmParams<float>&, const SequenceBatch&, std::span<const std::size_t>,
    double, double);
template std::vector<double> lstm_forward_batch<double>(
    const LstmParams<double>&, const SequenceBatch&,
    std::span<const std::size_t>, double, double);
template float lstm_loss_and_gradient<float>(
    const LstmParams<float>&, const SequenceBatch&, std::span<const std::size_t>,
    std::pair<double, double>, const LstmParams<float>::Mat&,
    LstmParams<float>*, double, double);
template double lstm_loss_and_gradient<double>(
    const LstmParams<double>&, const SequenceBatch&,
    std::span<const std::size_t>, std::pair<double, double>,
    const LstmParams<double>::Mat&, LstmParams<double>*, double, double);

LstmModel train_lstm(const SequenceBatch& batch, const LstmConfig& config,
                     std::vector<std::string> feature_names) {
  if (config.hidden_units < 1) throw InvalidArgument("hidden_units must be >= 1");
  if (!(config.dropout_rate >= 0.0 && config.dropout_rate < 1.0)) {
    throw InvalidArgument("dropout_rate must be in [0, 1)");
  }
  if (config.batch_size < 1 || config.epochs < 0) {
    throw InvalidArgument("batch_size must be >= 1 and epochs >= 0");
  }
  if (batch.size() == 0) throw InvalidArgument("no training windows");
  if (batch.seq_len != static_cast<std::size_t>(config.seq_len)) {
    throw InvalidArgument("window length does not match config.seq_len");
  }
  if (feature_names.empty()) {
    for (std::size_t j = 0; j < batch.n_features; ++j) {
      feature_names.push_back(fmt::format("f{}", j));
    }
  }
  if (feature_names.size() != batch.n_features) {
    throw InvalidArgument("feature name count does not match window width");
  }

  LstmModel model;
  model.config = config;
  model.feature_names = std::move(feature_names);

  const auto n = static_cast<double>(batch.size());
  const double n1 =
      static_cast<double>(std::count(batch.labels.begin(), batch.labels.end(), 1));
  const double n0 = n - n1;
  if (n0 == 0.0 || n1 == 0.0) {
    model.warnings.push_back(fmt::format(
        "degenerate training set: only class {} present in {} windows",
        n1 == 0.0 ? 0 : 1, batch.size()));
  }
  if (config.class_weights) {
    model.class_weights = *config.class_weights;
  } else {
    model.class_weights = {n0 > 0.0 ? n / (2.0 * n0) : 1.0,
                           n1 > 0.0 ? n / (2.0 * n1) : 1.0};
  }

  Rng rng(config.seed);
  model.params = init_lstm_params<float>(static_cast<int>(batch.n_features),
                                         config.hidden_units, rng.next());
  auto m = LstmParams<float>::zeros(static_cast<int>(batch.n_features),
                                    config.hidden_units);
  auto v = m;
  LstmParams<float> grad;

  const float lr = static_cast<float>(config.learning_rate);
  constexpr float kBeta1 = 0.9f;
  constexpr float kBeta2 = 0.999f;
  constexpr float kEps = 1e-8f;
  const float keep = static_cast<float>(1.0 - config.dropout_rate);
  std::int64_t step = 0;

  std::vector<std::size_t> order(batch.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto bs = static_cast<std::size_t>(config.batch_size);
  const Eigen::Index h = config.hidden_units;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += bs) {
      const std::span<const std::size_t> idx(
          order.data() + start, std::min(bs, order.size() - start));
      LstmParams<float>::Mat mask;
      if (config.dropout_rate > 0.0) {
        mask.resize(h, static_cast<Eigen::Index>(idx.size()));
        for (Eigen::Index k = 0; k < mask.size(); ++k) {
          mask.data()[k] = rng.uniform() < keep ? 1.0f / keep : 0.0f;
        }
      }
      const float loss = lstm_loss_and_gradient<float>(
          model.params, batch, idx, model.class_weights, mask, &grad,
          config.clamp_low, config.clamp_high);
      epoch_loss += static_cast<double>(loss) * static_cast<double>(idx.size());

      ++step;
      const float c1 = 1.0f - std::pow(kBeta1, static_cast<float>(step));
      const float c2 = 1.0f - std::pow(kBeta2, static_cast<float>(step));
      auto update = [&](auto& p_t, auto& m_t, auto& v_t, const auto& g_t) {
        m_t = kBeta1 * m_t + (1.0f - kBeta1) * g_t;
        v_t = (kBeta2 * v_t.array() + (1.0f - kBeta2) * g_t.array().square()).matrix();
        p_t.array() -= lr * (m_t.array() / c1) / ((v_t.array() / c2).sqrt() + kEps);
      };
      update(model.params.w_in, m.w_in, v.w_in, grad.w_in);
      update(model.params.w_rec, m.w_rec, v.w_rec, grad.w_rec);
      update(model.params.bias, m.bias, v.bias, grad.bias);
      update(model.params.w_out, m.w_out, v.w_out, grad.w_out);
      update(model.params.b_out, m.b_out, v.b_out, grad.b_out);
    }
    model.epoch_loss.push_back(epoch_loss / n);
  }
  for (const auto* t : {&model.params.w_in, &model.params.w_rec}) {
    if (!t->allFinite()) throw TrainingError("LSTM parameters diverged");
  }
  return model;
}

double lstm_forward(const LstmModel& model, std::span<const double> window) {
  if (!model.fitted()) throw InvalidArgument("LSTM model is not fitted");
  const auto d = static_cast<std::size_t>(model.params.inputs());
  const auto len = static_cast<std::size_t>(model.config.seq_len);
  if (window.size() != d * len) {
    throw InvalidArgument(fmt::format(
        "window has {} values, expected {} x {}", window.size(), len, d));
  }
  SequenceBatch one;
  one.seq_len = len;
  one.n_features = d;
  one.values.assign(window.begin(), window.end());
  one.labels = {0};
  one.end_rows = {len - 1};
  const std::size_t idx = 0;
  return lstm_forward_batch(model.params, one, std::span(&idx, 1),
                            model.config.clamp_low, model.config.clamp_high)[0];
}

std::vector<double> lstm_predict_windows(const LstmModel& model,
                                         const SequenceBatch& batch) {
  if (!model.fitted()) throw InvalidArgument("LSTM model is not fitted");
  if (batch.seq_len != static_cast<std::size_t>(model.config.seq_len)) {
    throw InvalidArgument("window length does not match the model");
  }
  std::vector<std::size_t> idx(batch.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return lstm_forward_batch(model.params, batch, idx, model.config.clamp_low,
                            model.config.clamp_high);
}

std::vector<double> lstm_predict_proba(const LstmModel& model,
                                       const SequenceBatch& batch) {
  const auto per_window = lstm_predict_windows(model, batch);
  if (per_window.empty()) return {};
  std::vector<double> out(batch.end_rows.back() + 1, per_window.front());
  for (std::size_t w = 0; w < per_window.size(); ++w) {
    out[batch.end_rows[w]] = per_window[w];
  }
  return out;
}

}  // namespace wdsguard
