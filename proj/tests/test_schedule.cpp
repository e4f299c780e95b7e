// Copyright 2026 The mhlora Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "mhlora/errors.hpp"
#include "mhlora/schedule.hpp"

namespace mhlora {
namespace {

TEST(Schedule, LinearInvariants) {
  for (const NoiseSchedule& s : {NoiseSchedule::linear(1000, 1e-4, 0.02), NoiseSchedule::scaled_linear(200),
                                 NoiseSchedule::scaled_linear(50)}) {
    double prev = 1.0;
    for (int t = 0; t < s.steps(); ++t) {
      EXPECT_GT(s.beta(t), 0.0);
      EXPECT_LT(s.beta(t), 1.0);
      EXPECT_GT(s.alpha_bar(t), 0.0);
      EXPECT_LT(s.alpha_bar(t), prev);
      EXPECT_NEAR(s.alpha_bar(t), prev * (1.0 - s.beta(t)), 1e-15);
      prev = s.alpha_bar(t);
    }
  }
}

TEST(Schedule, LinearEndpoints) {
  const NoiseSchedule s = NoiseSchedule::linear(1000, 1e-4, 0.02);
  EXPECT_DOUBLE_EQ(s.beta(0), 1e-4);
  EXPECT_DOUBLE_EQ(s.beta(999), 0.02);
  const NoiseSchedule short_s = NoiseSchedule::scaled_linear(200);
  EXPECT_DOUBLE_EQ(short_s.beta(0), 5e-4);
  EXPECT_DOUBLE_EQ(short_s.beta(199), 0.1);
  // Both end close to pure noise.
  EXPECT_LT(s.alpha_bar(999), 1e-4);
  EXPECT_LT(short_s.alpha_bar(199), 1e-4);
}

TEST(Schedule, RejectsBadInput) {
  EXPECT_THROW(NoiseSchedule::linear(0, 1e-4, 0.02), ParameterError);
  EXPECT_THROW(NoiseSchedule::linear(10, 0.0, 0.02), ParameterError);
  EXPECT_THROW(NoiseSchedule::linear(10, 0.03, 0.02), ParameterError);
  EXPECT_THROW(NoiseSchedule::from_betas({0.1, 1.0}), ParameterError);
  EXPECT_THROW(NoiseSchedule::from_alpha_bar({0.5, 1.5}), ParameterError);
  const NoiseSchedule s = NoiseSchedule::scaled_linear(10);
  EXPECT_THROW(s.alpha_bar(10), ParameterError);
  EXPECT_THROW(s.beta(-1), ParameterError);
}

TEST(ForwardNoise, WorkedValues) {
  const NoiseSchedule s = NoiseSchedule::from_alpha_bar({1.0, 0.25, 0.0});
  Eigen::VectorXd z(2), eps(2);
  z << 2.0, -1.0;
  eps << 1.0, 3.0;
  // alpha_bar = 1 returns the signal, alpha_bar = 0 returns the noise.
  EXPECT_EQ(forward_noise(z, 0, eps, s), z);
  EXPECT_EQ(forward_noise(z, 2, eps, s), eps);
  // 0.5 * 2 + sqrt(0.75) * 1 = 1.8660...
  const Eigen::VectorXd mid = forward_noise(z, 1, eps, s);
  EXPECT_NEAR(mid(0), 1.0 + std::sqrt(0.75), 1e-15);
  EXPECT_NEAR(mid(0), 1.8660, 5e-5);
  EXPECT_NEAR(mid(1), -0.5 + 3.0 * std::sqrt(0.75), 1e-15);
}

TEST(ForwardNoise, ShapeAndRangeErrors) {
  const NoiseSchedule s = NoiseSchedule::scaled_linear(20);
  EXPECT_THROW(forward_noise(Eigen::VectorXd::Zero(3), 0, Eigen::VectorXd::Zero(4), s), DimensionError);
  EXPECT_THROW(forward_noise(Eigen::VectorXd::Zero(3), 20, Eigen::VectorXd::Zero(3), s), ParameterError);
}

TEST(ForwardNoise, MarginalMoments) {
  // With z fixed, z_t ~ N(sqrt(ab) z, (1 - ab) I).
  const NoiseSchedule s = NoiseSchedule::scaled_linear(200);
  std::mt19937_64 rng(12);
  std::normal_distribution<double> n;
  for (int t : {0, 50, 120, 199}) {
    const double ab = s.alpha_bar(t);
    Eigen::VectorXd z(1), eps(1);
    z << 0.7;
    const int draws = 10000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < draws; ++i) {
      eps(0) = n(rng);
      const double v = forward_noise(z, t, eps, s)(0);
      sum += v;
      sq += v * v;
    }
    const double mean = sum / draws;
    const double var = sq / draws - mean * mean;
    const double sd = std::sqrt(1.0 - ab);
    EXPECT_NEAR(mean, std::sqrt(ab) * 0.7, 3.0 * sd / std::sqrt(draws)) << t;
    EXPECT_NEAR(var / (1.0 - ab), 1.0, 0.05) << t;
  }
}

TEST(Respacing, EvenSubsetEndingAtLast) {
  const NoiseSchedule s = NoiseSchedule::scaled_linear(200);
  for (int count : {1, 2, 7, 50, 200}) {
    const std::vector<int> ts = s.respaced(count);
    ASSERT_EQ(static_cast<int>(ts.size()), count);
    EXPECT_EQ(ts.back(), 199);
    EXPECT_EQ(std::set<int>(ts.begin(), ts.end()).size(), ts.size());
    for (std::size_t i = 1; i < ts.size(); ++i) EXPECT_LT(ts[i - 1], ts[i]);
    if (count > 1) {
      EXPECT_EQ(ts.front(), 0);
    }
  }
  const std::vector<int> full = s.respaced(200);
  for (int t = 0; t < 200; ++t) EXPECT_EQ(full[static_cast<std::size_t>(t)], t);
  EXPECT_THROW(s.respaced(0), ParameterError);
  EXPECT_THROW(s.respaced(201), ParameterError);
}

}  // namespace
}  // namespace mhlora
