// Copyright 2026 The mhlora Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <random>
#include <set>

#include "mhlora/errors.hpp"
#include "mhlora/sampling.hpp"

namespace mhlora {
namespace {

struct SamplingFixture {
  DenoiserConfig cfg;
  Denoiser model;
  NoiseSchedule schedule = NoiseSchedule::scaled_linear(20);
  AdapterBank multi;

  SamplingFixture() {
    cfg.image_size = 8;
    cfg.channels = 6;
    cfg.blocks = 2;
    cfg.time_dim = 4;
    Rng rng(3);
    model = {cfg, init_weights(cfg, rng), {}};
    multi.regime = Regime::kMultiHead;
    multi.class_id = 1;
    multi.sets.push_back(new_class_adapters(cfg, 1, 2, 4, 0.5, 5));
    std::normal_distribution<float> n(0.0f, 0.3f);
    for (auto& l : multi.sets[0].layers)
      for (auto& b : l.heads)
        for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = n(rng);
  }

  GenerationRequest request(int count) const {
    GenerationRequest r;
    r.count = count;
    r.sampler.steps = 5;
    r.seed = 42;
    return r;
  }
};

TEST(Generate, OutputsLieInPixelRange) {
  SamplingFixture f;
  const GenerationResult r = generate_dataset(f.model, f.schedule, f.multi, f.request(4));
  ASSERT_EQ(r.images.size(), 4u);
  for (const auto& g : r.images) {
    EXPECT_EQ(g.image.width, 8);
    for (double p : g.image.pixels) {
      EXPECT_GE(p, 0.0);
      EXPECT_LE(p, 1.0);
    }
  }
  EXPECT_TRUE(r.warnings.empty());
}

TEST(Generate, SeededAndWorkerCountIndependent) {
  SamplingFixture f;
  GenerationRequest req = f.request(7);
  const GenerationResult a = generate_dataset(f.model, f.schedule, f.multi, req);
  const GenerationResult b = generate_dataset(f.model, f.schedule, f.multi, req);
  req.jobs = 3;
  const GenerationResult c = generate_dataset(f.model, f.schedule, f.multi, req);
  for (std::size_t i = 0; i < 7; ++i) {
    EXPECT_EQ(a.images[i].image, b.images[i].image);
    EXPECT_EQ(a.images[i].image, c.images[i].image);
    EXPECT_EQ(a.images[i].record.weights, c.images[i].record.weights);
  }
  req.seed = 43;
  EXPECT_NE(generate_dataset(f.model, f.schedule, f.multi, req).images[0].image, a.images[0].image);
}

TEST(Generate, DrawsFreshWeightsPerImage) {
  SamplingFixture f;
  const GenerationResult r = generate_dataset(f.model, f.schedule, f.multi, f.request(12));
  std::set<std::vector<double>> seen;
  std::set<std::uint64_t> seeds;
  for (const auto& g : r.images) {
    ASSERT_EQ(g.record.weights.size(), 4u);
    double s = 0.0;
    for (double w : g.record.weights) s += w;
    EXPECT_NEAR(s, 1.0, 1e-12);
    seen.insert(g.record.weights);
    seeds.insert(g.record.seed);
  }
  EXPECT_EQ(seen.size(), 12u);
  EXPECT_EQ(seeds.size(), 12u);
}

TEST(Generate, UniformModeSharesOneMergedAdapter) {
  SamplingFixture f;
  GenerationRequest req = f.request(5);
  req.mixture.mode = MixtureMode::kUniform;
  const GenerationResult r = generate_dataset(f.model, f.schedule, f.multi, req);
  const MergedClassAdapters first = merge_class_adapters(f.multi.sets[0], MixtureWeights(r.images[0].record.weights));
  for (const auto& g : r.images) {
    EXPECT_EQ(g.record.weights, std::vector<double>(4, 0.25));
    const MergedClassAdapters m = merge_class_adapters(f.multi.sets[0], MixtureWeights(g.record.weights));
    for (std::size_t l = 0; l < m.layers.size(); ++l) EXPECT_EQ(m.layers[l].B_prime, first.layers[l].B_prime);
  }
}

TEST(Generate, ZeroHeadsWarnAndMatchBase) {
  SamplingFixture f;
  AdapterBank zero = f.multi;
  zero.sets[0] = new_class_adapters(f.cfg, 1, 2, 4, 0.5, 5);
  AdapterBank base;
  base.regime = Regime::kBase;
  base.class_id = 1;
  const GenerationResult z = generate_dataset(f.model, f.schedule, zero, f.request(2));
  const GenerationResult b = generate_dataset(f.model, f.schedule, base, f.request(2));
  ASSERT_EQ(z.warnings.size(), 1u);
  EXPECT_TRUE(b.warnings.empty());
  EXPECT_EQ(z.images[0].image, b.images[0].image);
  EXPECT_EQ(z.images[1].image, b.images[1].image);
}

TEST(Generate, ReplayReproducesEveryImage) {
  SamplingFixture f;
  AdapterBank image_bank;
  image_bank.regime = Regime::kImageWise;
  image_bank.class_id = 1;
  for (int i = 0; i < 3; ++i) {
    ClassAdapters s = new_class_adapters(f.cfg, 1, 2, 1, 0.5, 20 + i);
    for (auto& l : s.layers) l.heads[0].setConstant(0.1f * (i + 1));
    image_bank.sets.push_back(s);
  }
  for (const AdapterBank* bank : {&f.multi, &image_bank}) {
    const GenerationResult r = generate_dataset(f.model, f.schedule, *bank, f.request(4));
    for (const auto& g : r.images) EXPECT_EQ(replay(f.model, f.schedule, *bank, g.record), g.image);
  }
  const GenerationResult r = generate_dataset(f.model, f.schedule, image_bank, f.request(6));
  for (const auto& g : r.images) {
    EXPECT_GE(g.record.adapter_index, 0);
    EXPECT_LT(g.record.adapter_index, 3);
    EXPECT_TRUE(g.record.weights.empty());
  }
  GenerationRecord wrong = r.images[0].record;
  wrong.regime = Regime::kClassWise;
  EXPECT_THROW(replay(f.model, f.schedule, image_bank, wrong), DataError);
}

TEST(Generate, RejectsBadRequests) {
  SamplingFixture f;
  GenerationRequest req = f.request(1);
  req.sampler.guidance = -0.5;
  EXPECT_THROW(generate_dataset(f.model, f.schedule, f.multi, req), ParameterError);
  req = f.request(1);
  req.sampler.steps = 21;
  EXPECT_THROW(generate_dataset(f.model, f.schedule, f.multi, req), ParameterError);
  req = f.request(1);
  req.mixture.alpha = 0.0;
  EXPECT_THROW(generate_dataset(f.model, f.schedule, f.multi, req), ParameterError);
  AdapterBank bad = f.multi;
  bad.regime = Regime::kClassWise;
  EXPECT_THROW(generate_dataset(f.model, f.schedule, bad, f.request(1)), DataError);
}

TEST(Generate, ImageSeedsAreDistinct) {
  std::set<std::uint64_t> seen;
  for (int c = 0; c < 10; ++c)
    for (int i = 0; i < 500; ++i) seen.insert(image_seed(7, c, i));
  EXPECT_EQ(seen.size(), 5000u);
  EXPECT_NE(image_seed(7, 0, 0), image_seed(8, 0, 0));
}

TEST(Regime, NamesRoundTrip) {
  for (Regime r : {Regime::kMultiHead, Regime::kImageWise, Regime::kClassWise, Regime::kBase})
    EXPECT_EQ(parse_regime(to_string(r)), r);
  EXPECT_THROW(parse_regime("lora"), ParameterError);
}

}  // namespace
}  // namespace mhlora
