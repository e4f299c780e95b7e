// Copyright 2026 The mhlora Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <random>

#include "mhlora/adapter.hpp"
#include "mhlora/crop.hpp"
#include "mhlora/denoiser.hpp"
#include "mhlora/embedder.hpp"
#include "mhlora/metrics.hpp"
#include "mhlora/sampling.hpp"
#include "mhlora/simplex.hpp"
#include "mhlora/training.hpp"

namespace mhlora {
namespace {

Denoiser default_model() {
  DenoiserConfig cfg;
  Rng rng(1);
  return {cfg, init_weights(cfg, rng), {}};
}

ClassAdapters trained_looking(const DenoiserConfig& cfg, int rank, int heads) {
  ClassAdapters a = new_class_adapters(cfg, 0, rank, heads, default_init_std(rank), 2);
  Rng rng(3);
  std::normal_distribution<float> n(0.0f, 0.05f);
  for (auto& l : a.layers)
    for (auto& b : l.heads)
      for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = n(rng);
  return a;
}

void BM_DirichletDraw(benchmark::State& state) {
  Rng rng(4);
  const int k = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sample_dirichlet(k, 1.0, rng));
}
BENCHMARK(BM_DirichletDraw)->Arg(4)->Arg(64);

void BM_MergeHeads(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const MultiHeadAdapter a = new_multi_head({d, d, 4, 4}, 0.25, 5);
  const MixtureWeights w({0.1, 0.2, 0.3, 0.4});
  for (auto _ : state) benchmark::DoNotOptimize(merge_heads(a, w));
}
BENCHMARK(BM_MergeHeads)->Arg(24)->Arg(320);

void BM_DenoiserForward(benchmark::State& state) {
  const Denoiser model = default_model();
  const auto w = model.weights.cast<ComputeReal>();
  DenoiserPass<ComputeReal> pass(model.config, w);
  const VecX<ComputeReal> x = VecX<ComputeReal>::Random(model.config.pixels());
  for (auto _ : state) benchmark::DoNotOptimize(pass.forward(x, 50, 1));
}
BENCHMARK(BM_DenoiserForward);

void BM_DenoiserForwardBackward(benchmark::State& state) {
  const Denoiser model = default_model();
  const auto w = model.weights.cast<ComputeReal>();
  const ClassAdapters adapters = trained_looking(model.config, 4, 4);
  const MergedClassAdapters merged = merge_class_adapters(adapters, MixtureWeights::one_hot(4, 0));
  std::vector<MatX<ComputeReal>> a, b;
  for (const auto& l : merged.layers) {
    a.push_back(l.A.cast<ComputeReal>());
    b.push_back(l.B_prime.cast<ComputeReal>());
  }
  std::vector<LoraLayer<ComputeReal>> lora;
  for (std::size_t i = 0; i < a.size(); ++i) lora.push_back({&a[i], &b[i], ComputeReal(1)});
  std::vector<LoraGrads<ComputeReal>> grads(lora.size());
  DenoiserPass<ComputeReal> pass(model.config, w);
  const VecX<ComputeReal> x = VecX<ComputeReal>::Random(model.config.pixels());
  for (auto _ : state) {
    for (std::size_t i = 0; i < grads.size(); ++i) {
      grads[i].dA = MatX<ComputeReal>::Zero(a[i].rows(), a[i].cols());
      grads[i].dB = MatX<ComputeReal>::Zero(b[i].rows(), b[i].cols());
    }
    const VecX<ComputeReal> out = pass.forward(x, 50, 1, lora);
    pass.backward(out, nullptr, grads);
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_DenoiserForwardBackward);

void BM_GenerateImage(benchmark::State& state) {
  const Denoiser model = default_model();
  const NoiseSchedule schedule = NoiseSchedule::scaled_linear(200);
  AdapterBank bank;
  bank.regime = Regime::kMultiHead;
  bank.sets.push_back(trained_looking(model.config, 4, 4));
  GenerationRequest req;
  req.count = 1;
  req.sampler.steps = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(generate_dataset(model, schedule, bank, req));
}
BENCHMARK(BM_GenerateImage)->Arg(20)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_SampleAndApplyCrop(benchmark::State& state) {
  Rng rng(6);
  const Image img(16, 16, 0.5);
  const Box b(3, 4, 11, 12);
  const JitterParams j;
  for (auto _ : state) benchmark::DoNotOptimize(apply_crop(img, sample_crop(16, 16, b, 16, 16, j, rng)));
}
BENCHMARK(BM_SampleAndApplyCrop);

EmbeddingSet random_set(int n, int d, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  EmbeddingSet s;
  s.vectors.resize(n, d);
  for (Eigen::Index i = 0; i < s.vectors.size(); ++i) s.vectors.data()[i] = g(rng);
  s.vectors.rowwise().normalize();
  return s;
}

void BM_FrechetDistance(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const EmbeddingSet a = random_set(200, d, 1), b = random_set(200, d, 2);
  for (auto _ : state) benchmark::DoNotOptimize(frechet_distance(a, b));
}
BENCHMARK(BM_FrechetDistance)->Arg(8)->Arg(64)->Arg(512);

void BM_Coverage(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const EmbeddingSet r = random_set(n, 64, 3), s = random_set(n, 64, 4);
  const double rho = class_radius(r);
  for (auto _ : state) benchmark::DoNotOptimize(coverage(s, r, rho));
}
BENCHMARK(BM_Coverage)->Arg(4)->Arg(500);

void BM_ToyEmbed(benchmark::State& state) {
  const ToyEmbedder e(16);
  const Image img(16, 16, 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(e.embed(img));
}
BENCHMARK(BM_ToyEmbed);

}  // namespace
}  // namespace mhlora

BENCHMARK_MAIN();
