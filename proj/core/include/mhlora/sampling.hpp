// Copyright 2026 The mhlora Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mhlora/denoiser.hpp"
#include "mhlora/image.hpp"
#include "mhlora/schedule.hpp"
#include "mhlora/simplex.hpp"
#include "mhlora/training.hpp"

namespace mhlora {

struct SamplerConfig {
  double guidance = 2.0;
  int steps = 50;  // respaced ancestral steps; equal to T for the full chain
  bool clip_denoised = true;

  void validate(const NoiseSchedule& schedule) const;
};

// eps_u + g (eps_c - eps_u), written as (1 - g) eps_u + g eps_c so that g = 1
// returns eps_c and g = 0 returns eps_u exactly.
Eigen::VectorXd guided_epsilon(const Eigen::VectorXd& eps_cond, const Eigen::VectorXd& eps_uncond,
                               double guidance);

// Guided noise prediction of the model at (x_t, t) with optional adapters
// active in both branches.
Eigen::VectorXd predict_noise(const Denoiser& model, const Eigen::VectorXd& x_t, int t,
                              int class_id, const MergedClassAdapters* adapters, double guidance);

// Ancestral DDPM sampling from pure noise; `adapters` may be null for the
// base model.
Image generate(const Denoiser& model, const NoiseSchedule& schedule, int class_id,
               const MergedClassAdapters* adapters, const SamplerConfig& cfg, Rng& rng);

enum class Regime { kMultiHead, kImageWise, kClassWise, kBase };

std::string_view to_string(Regime r);
Regime parse_regime(std::string_view name);  // "multi", "image", "class", "base"

// Trained adapters of one class for one regime. Multi-head and class-wise hold
// a single set; image-wise holds one single-head set per few-shot image; base
// holds none.
struct AdapterBank {
  Regime regime = Regime::kMultiHead;
  int class_id = 0;
  std::vector<ClassAdapters> sets;
};

// Everything needed to regenerate one image bit-for-bit.
struct GenerationRecord {
  int class_id = 0;
  int index = 0;
  std::uint64_t seed = 0;
  Regime regime = Regime::kMultiHead;
  std::vector<double> weights;  // merge weights (multi-head only)
  int adapter_index = -1;       // image-wise adapter used, -1 otherwise
  double guidance = 2.0;
  int steps = 50;
};

struct GeneratedImage {
  Image image;
  GenerationRecord record;
};

struct GenerationRequest {
  int count = 500;
  DirichletConfig mixture;  // k is taken from the bank
  SamplerConfig sampler;
  std::uint64_t seed = 0;
  int jobs = 1;
};

struct GenerationResult {
  std::vector<GeneratedImage> images;
  std::vector<std::string> warnings;
};

// Per-image noise seed derived from the request seed, class and index.
std::uint64_t image_seed(std::uint64_t base, int class_id, int index);

// Draws every mixture sequentially, then renders images on `jobs` workers;
// worker w renders indices w, w + jobs, ... so output does not depend on the
// worker count.
GenerationResult generate_dataset(const Denoiser& model, const NoiseSchedule& schedule,
                                  const AdapterBank& bank, const GenerationRequest& request);

// Renders the image described by a record (weights are used verbatim).
Image replay(const Denoiser& model, const NoiseSchedule& schedule, const AdapterBank& bank,
             const GenerationRecord& record);

}  // namespace mhlora
