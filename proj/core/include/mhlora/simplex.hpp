// Copyright 2026 The mhlora Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "mhlora/adapter.hpp"

namespace mhlora {

enum class MixtureMode {
  kPerImageSample,  // fresh Dirichlet draw for every generated image
  kUniform,         // w_i = 1/K, no randomness
  kReuseSingle,     // one Dirichlet draw, reused for every image
};

std::string_view to_string(MixtureMode mode);
MixtureMode parse_mixture_mode(std::string_view name);  // throws ParameterError

struct DirichletConfig {
  int k = 1;
  double alpha = 1.0;
  MixtureMode mode = MixtureMode::kPerImageSample;

  void validate() const;
};

struct DirichletMoments {
  double mean = 0.0;
  double variance = 0.0;
};

// Closed-form per-coordinate moments of the symmetric Dirichlet(alpha * 1_K).
DirichletMoments dirichlet_moments(int k, double alpha);

// One draw from the symmetric Dirichlet via normalised Gamma(alpha, 1) variates.
MixtureWeights sample_dirichlet(int k, double alpha, Rng& rng);

// Stateful sampler implementing the three mixture modes. The reuse-single
// cache lives in the sampler, so each generator/sampler pair draws its own
// shared vector.
class MixtureSampler {
 public:
  explicit MixtureSampler(DirichletConfig cfg);

  MixtureWeights sample(Rng& rng);
  const DirichletConfig& config() const { return cfg_; }

 private:
  DirichletConfig cfg_;
  std::optional<MixtureWeights> cached_;
};

}  // namespace mhlora
