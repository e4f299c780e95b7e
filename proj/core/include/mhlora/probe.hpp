// Copyright 2026 The mhlora Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mhlora/metrics.hpp"

namespace mhlora {

struct ProbeConfig {
  double l2 = 1e-3;
  int iterations = 400;
  double learning_rate = 0.5;
  bool standardize = true;  // z-score features with training statistics
};

// Multinomial logistic regression trained by full-batch gradient descent
// from zero weights, so fitting is deterministic.
class LinearProbe {
 public:
  void fit(const EmbeddingSet& train, int num_classes, const ProbeConfig& cfg = {});

  int num_classes() const { return static_cast<int>(weights_.rows()); }
  Eigen::MatrixXd logits(const Eigen::MatrixXd& x) const;
  std::vector<int> predict(const Eigen::MatrixXd& x) const;

 private:
  Eigen::MatrixXd weights_;  // classes x dim
  Eigen::VectorXd bias_;
  Eigen::RowVectorXd mean_, inv_std_;
};

struct ProbeScores {
  double accuracy = 0.0;             // over all test items
  std::vector<double> per_class;     // NaN for classes absent from the test set
  double long_accuracy = 0.0;        // mean over head classes
  double tail_accuracy = 0.0;        // mean over the remaining classes
  double average = 0.0;              // mean over all present classes
};

// head_classes may be empty, in which case long and tail accuracy are both the
// class average.
ProbeScores score_probe(const LinearProbe& probe, const EmbeddingSet& test,
                        std::span<const int> head_classes = {});

}  // namespace mhlora
