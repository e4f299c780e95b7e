// Copyright 2026 The mhlora Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include <Eigen/Dense>

namespace mhlora {

// Forward-noising schedule over timesteps 0..T-1.
class NoiseSchedule {
 public:
  // Linear betas from beta_start to beta_end inclusive.
  static NoiseSchedule linear(int steps, double beta_start, double beta_end);

  // Linear schedule whose endpoints (1e-4, 0.02 at 1000 steps) are rescaled by
  // 1000 / steps, so short schedules still end near pure noise.
  static NoiseSchedule scaled_linear(int steps);

  // Explicit per-step betas, each in (0, 1).
  static NoiseSchedule from_betas(std::vector<double> betas);

  // Arbitrary cumulative products; used by tests to pin edge values.
  static NoiseSchedule from_alpha_bar(std::vector<double> alpha_bar);

  int steps() const { return static_cast<int>(beta_.size()); }
  double beta(int t) const;
  double alpha_bar(int t) const;
  const std::vector<double>& betas() const { return beta_; }
  const std::vector<double>& alpha_bars() const { return alpha_bar_; }

  // Evenly spaced subset of `count` timesteps in increasing order, always
  // including T-1; used for respaced ancestral sampling.
  std::vector<int> respaced(int count) const;

 private:
  std::vector<double> beta_;
  std::vector<double> alpha_bar_;
};

// z_t = sqrt(abar_t) z + sqrt(1 - abar_t) eps. Throws on t out of range or
// shape mismatch.
Eigen::VectorXd forward_noise(const Eigen::VectorXd& z, int t, const Eigen::VectorXd& eps,
                              const NoiseSchedule& schedule);

}  // namespace mhlora
