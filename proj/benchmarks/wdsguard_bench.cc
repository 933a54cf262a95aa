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


#include <numeric>
#include <vector>

#include <benchmark/benchmark.h>

#include "wdsguard/explain.h"
#include "wdsguard/forest.h"
#include "wdsguard/gbt.h"
#include "wdsguard/lstm.h"
#include "wdsguard/metrics.h"
#include "wdsguard/rng.h"

namespace {

using namespace wdsguard;

struct Fixture {
  Matrix x;
  Labels y;
};

Fixture make_data(std::size_t rows, std::size_t cols) {
  Rng rng(1);
  Fixture f{Matrix(rows, cols), Labels(rows)};
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) f.x(r, c) = rng.normal();
    f.y[r] = f.x(r, 0) + 0.5 * f.x(r, 1) * f.x(r, 2) + 0.3 * rng.normal() > 1.0 ? 1 : 0;
  }
  return f;
}

void BM_TreeFit(benchmark::State& state) {
  const auto data = make_data(static_cast<std::size_t>(state.range(0)), 40);
  ForestConfig cfg;
  for (auto _ : state) {
    Rng rng(3);
    benchmark::DoNotOptimize(fit_tree(data.x, data.y, cfg, rng));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TreeFit)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_GbtRound(benchmark::State& state) {
  const auto data = make_data(static_cast<std::size_t>(state.range(0)), 40);
  GbtConfig cfg;
  cfg.n_rounds = 1;
  cfg.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(fit_gbt(data.x, data.y, cfg));
}
BENCHMARK(BM_GbtRound)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_LstmForward(benchmark::State& state) {
  Rng rng(4);
  Matrix x(2000, 40);
  for (auto& v : x.data()) v = rng.uniform();
  const Labels y(2000, 0);
  const auto batch = make_windows(x, y, 10);
  std::vector<std::size_t> windows(batch.size());
  std::iota(windows.begin(), windows.end(), 0);
  const auto params = init_lstm_params<double>(40, 64, 5);
  const LstmParams<double>::Mat none;
  for (auto _ : state) {
    benchmark::DoNotOptimize(lstm_loss_and_gradient<double>(params, batch, windows, {1.0, 1.0},
                                                            none, nullptr, -0.05, 1.05));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(windows.size()));
}
BENCHMARK(BM_LstmForward)->Unit(benchmark::kMillisecond);

void BM_RocAuc(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(6);
  std::vector<int> y(n);
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = rng.uniform() < 0.04;
    s[i] = rng.uniform() + 0.3 * y[i];
  }
  for (auto _ : state) benchmark::DoNotOptimize(roc_auc(y, s));
}
BENCHMARK(BM_RocAuc)->Arg(2588)->Arg(100000);

void BM_ShapleySampling(benchmark::State& state) {
  const auto data = make_data(500, 20);
  ForestConfig cfg;
  cfg.n_trees = 50;
  cfg.threads = 1;
  const auto forest = fit_forest(data.x, data.y, cfg);
  const BatchModel model = [&](const Matrix& m) { return forest_predict_proba(forest, m); };
  const Matrix background = data.x.select_rows(std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7});
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        shapley_sampling(model, data.x.row(10), background, static_cast<int>(state.range(0)), 7));
  }
}
BENCHMARK(BM_ShapleySampling)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
