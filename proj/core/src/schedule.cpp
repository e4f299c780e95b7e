// Copyright 2026 The mhlora Authors
// SPDX-License-Identifier: Apache-2.0

#include "mhlora/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mhlora/errors.hpp"

namespace mhlora {

NoiseSchedule NoiseSchedule::linear(int steps, double beta_start, double beta_end) {
  if (steps < 1) throw ParameterError("schedule needs at least one step");
  if (!(beta_start > 0.0) || !(beta_end < 1.0) || beta_end < beta_start)
    throw ParameterError("betas must satisfy 0 < beta_start <= beta_end < 1");
  NoiseSchedule s;
  s.beta_.resize(static_cast<std::size_t>(steps));
  s.alpha_bar_.resize(static_cast<std::size_t>(steps));
  double prod = 1.0;
  for (int t = 0; t < steps; ++t) {
    const double frac = steps == 1 ? 0.0 : static_cast<double>(t) / (steps - 1);
    const double b = beta_start + frac * (beta_end - beta_start);
    s.beta_[static_cast<std::size_t>(t)] = b;
    prod *= 1.0 - b;
    s.alpha_bar_[static_cast<std::size_t>(t)] = prod;
  }
  return s;
}

NoiseSchedule NoiseSchedule::scaled_linear(int steps) {
  if (steps < 1) throw ParameterError("schedule needs at least one step");
  const double scale = 1000.0 / steps;
  return linear(steps, 1e-4 * scale, std::min(0.02 * scale, 0.999));
}

NoiseSchedule NoiseSchedule::from_betas(std::vector<double> betas) {
  if (betas.empty()) throw ParameterError("schedule needs at least one step");
  NoiseSchedule s;
  double prod = 1.0;
  for (double b : betas) {
    if (!(b > 0.0 && b < 1.0)) throw ParameterError("betas must lie in (0, 1)");
    prod *= 1.0 - b;
    s.alpha_bar_.push_back(prod);
  }
  s.beta_ = std::move(betas);
  return s;
}

NoiseSchedule NoiseSchedule::from_alpha_bar(std::vector<double> alpha_bar) {
  if (alpha_bar.empty()) throw ParameterError("schedule needs at least one step");
  NoiseSchedule s;
  double prev = 1.0;
  for (double a : alpha_bar) {
    if (!(a >= 0.0 && a <= 1.0)) throw ParameterError("alpha_bar values must lie in [0, 1]");
    s.beta_.push_back(prev > 0.0 ? 1.0 - a / prev : 1.0);
    prev = a;
  }
  s.alpha_bar_ = std::move(alpha_bar);
  return s;
}

double NoiseSchedule::beta(int t) const {
  if (t < 0 || t >= steps()) throw ParameterError("timestep " + std::to_string(t) + " out of range");
  return beta_[static_cast<std::size_t>(t)];
}

double NoiseSchedule::alpha_bar(int t) const {
  if (t < 0 || t >= steps()) throw ParameterError("timestep " + std::to_string(t) + " out of range");
  return alpha_bar_[static_cast<std::size_t>(t)];
}

std::vector<int> NoiseSchedule::respaced(int count) const {
  const int T = steps();
  if (count < 1 || count > T) throw ParameterError("respacing count must lie in [1, T]");
  std::vector<int> ts(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    // Spread count points over [0, T-1], last point pinned to T-1.
    const double pos = count == 1 ? T - 1 : static_cast<double>(i) * (T - 1) / (count - 1);
    ts[static_cast<std::size_t>(i)] = static_cast<int>(std::lround(pos));
  }
  return ts;
}

Eigen::VectorXd forward_noise(const Eigen::VectorXd& z, int t, const Eigen::VectorXd& eps,
                              const NoiseSchedule& schedule) {
  if (z.size() != eps.size()) throw DimensionError("noise and signal shapes differ");
  const double ab = schedule.alpha_bar(t);
  return std::sqrt(ab) * z + std::sqrt(1.0 - ab) * eps;
}

}  // namespace mhlora
