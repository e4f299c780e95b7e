// Copyright 2026 The mhlora Authors
// SPDX-License-Identifier: Apache-2.0

#include "mhlora/simplex.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "mhlora/errors.hpp"

namespace mhlora {

std::string_view to_string(MixtureMode mode) {
  switch (mode) {
    case MixtureMode::kPerImageSample: return "dirichlet";
    case MixtureMode::kUniform: return "uniform";
    case MixtureMode::kReuseSingle: return "reuse";
  }
  return "dirichlet";
}

MixtureMode parse_mixture_mode(std::string_view name) {
  if (name == "dirichlet" || name == "per-image-sample") return MixtureMode::kPerImageSample;
  if (name == "uniform") return MixtureMode::kUniform;
  if (name == "reuse" || name == "reuse-single") return MixtureMode::kReuseSingle;
  throw ParameterError("unknown mixture mode '" + std::string(name) + "'");
}

void DirichletConfig::validate() const {
  if (k < 1) throw ParameterError("Dirichlet dimension must be at least 1");
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw ParameterError("Dirichlet concentration must be positive");
}

DirichletMoments dirichlet_moments(int k, double alpha) {
  DirichletConfig{k, alpha, MixtureMode::kPerImageSample}.validate();
  const double kd = k;
  return {1.0 / kd, (kd - 1.0) / (kd * kd * (kd * alpha + 1.0))};
}

MixtureWeights sample_dirichlet(int k, double alpha, Rng& rng) {
  DirichletConfig{k, alpha, MixtureMode::kPerImageSample}.validate();
  if (k == 1) return MixtureWeights({1.0});

  std::gamma_distribution<double> gamma(alpha, 1.0);
  std::vector<double> g(static_cast<std::size_t>(k));
  double sum = 0.0;
  // For tiny alpha every variate can underflow to zero; redraw in that case.
  do {
    sum = 0.0;
    for (double& v : g) {
      v = gamma(rng);
      sum += v;
    }
  } while (!(sum > 0.0));

  for (double& v : g) v /= sum;
  // Put the rounding residue on the largest coordinate so the sum is 1 to
  // within a few ulps.
  double total = 0.0;
  std::size_t largest = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    total += g[i];
    if (g[i] > g[largest]) largest = i;
  }
  g[largest] += 1.0 - total;
  if (g[largest] < 0.0) g[largest] = 0.0;
  return MixtureWeights(std::move(g));
}

MixtureSampler::MixtureSampler(DirichletConfig cfg) : cfg_(cfg) { cfg_.validate(); }

MixtureWeights MixtureSampler::sample(Rng& rng) {
  switch (cfg_.mode) {
    case MixtureMode::kUniform:
      return MixtureWeights::uniform(cfg_.k);
    case MixtureMode::kReuseSingle:
      if (!cached_) cached_ = sample_dirichlet(cfg_.k, cfg_.alpha, rng);
      return *cached_;
    case MixtureMode::kPerImageSample:
      break;
  }
  return sample_dirichlet(cfg_.k, cfg_.alpha, rng);
}

}  // namespace mhlora
