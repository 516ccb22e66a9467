// Copyright 2026 The gsa-shapley Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include <array>
#include <numbers>

#include "gsa/inputs.hpp"
#include "gsa/kriging.hpp"
#include "gsa/models.hpp"
#include "gsa/rng.hpp"
#include "gsa/shapley.hpp"

namespace {

using namespace gsa;

void BM_PhiloxNormal(benchmark::State& state) {
  auto stream = rng::Stream::derive(1, rng::Purpose::sample);
  for (auto _ : state) benchmark::DoNotOptimize(stream.normal());
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_PhiloxNormal);

GaussianJoint correlated(std::size_t d) {
  Matrix cov = Matrix::Identity(d, d);
  for (std::size_t i = 0; i + 1 < d; ++i) cov(i, i + 1) = cov(i + 1, i) = 0.4;
  return GaussianJoint(Vector::Zero(d), cov);
}

void BM_ConditionalDraw(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  std::vector<std::size_t> free;
  for (std::size_t i = 0; i < d / 2; ++i) free.push_back(i);
  const ConditionalSampler sampler(correlated(d), IndexSet(free));
  auto stream = rng::Stream::derive(2, rng::Purpose::conditional);
  std::vector<double> given(sampler.given().size()), out(sampler.free().size());
  sampler.draw_given(stream, given);
  for (auto _ : state) {
    sampler.draw_free(stream, given, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ConditionalDraw)->Arg(4)->Arg(11)->Arg(32);

void BM_RandomShapleyLinear(benchmark::State& state) {
  const std::size_t d = 11;
  const auto model = make_model(LinearModel{0.0, Vector::Ones(d)}, d);
  const auto dist = correlated(d);
  EstimatorConfig cfg;
  cfg.method = Method::random;
  cfg.permutations = static_cast<std::size_t>(state.range(0));
  cfg.variance_samples = 1000;
  cfg.seed = 3;
  cfg.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(estimate_shapley(*model, dist, cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(evaluation_cost(cfg, d)));
}
BENCHMARK(BM_RandomShapleyLinear)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_KrigingPredictMean(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto dist = correlated(3);
  const Matrix x = sample(dist, n, 4);
  const Vector y = make_model(IshigamiModel{}, 3)->evaluate(x);
  const auto km = KrigingModel::assemble(x, y, Trend::linear, Vector::Constant(3, 1.0), 1e-8);
  const Matrix pts = sample(dist, 1000, 5);
  for (auto _ : state) benchmark::DoNotOptimize(km.predict_mean(pts));
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_KrigingPredictMean)->Arg(50)->Arg(200)->Arg(500)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
