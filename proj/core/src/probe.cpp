// Copyright 2026 The mhlora Authors
// SPDX-License-Identifier: Apache-2.0

#include "mhlora/probe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mhlora/errors.hpp"

namespace mhlora {

void LinearProbe::fit(const EmbeddingSet& train, int num_classes, const ProbeConfig& cfg) {
  if (num_classes < 2) throw ParameterError("probe needs at least 2 classes");
  if (train.size() == 0) throw SampleSizeError("probe needs training data");
  if (static_cast<int>(train.labels.size()) != train.size()) throw DataError("probe training data must be labeled");
  for (int y : train.labels)
    if (y < 0 || y >= num_classes) throw DataError("training label out of range");
  if (cfg.iterations < 0 || !(cfg.learning_rate > 0.0) || !(cfg.l2 >= 0.0))
    throw ParameterError("invalid probe configuration");

  const Eigen::Index n = train.size(), d = train.dim();
  mean_ = Eigen::RowVectorXd::Zero(d);
  inv_std_ = Eigen::RowVectorXd::Ones(d);
  if (cfg.standardize) {
    mean_ = train.vectors.colwise().mean();
    const Eigen::MatrixXd c = train.vectors.rowwise() - mean_;
    const Eigen::RowVectorXd var = c.colwise().squaredNorm() / static_cast<double>(n);
    for (Eigen::Index j = 0; j < d; ++j) inv_std_(j) = var(j) > 1e-12 ? 1.0 / std::sqrt(var(j)) : 1.0;
  }
  const Eigen::MatrixXd x = ((train.vectors.rowwise() - mean_).array().rowwise() * inv_std_.array()).matrix();

  Eigen::MatrixXd onehot = Eigen::MatrixXd::Zero(n, num_classes);
  for (Eigen::Index i = 0; i < n; ++i) onehot(i, train.labels[static_cast<std::size_t>(i)]) = 1.0;

  weights_ = Eigen::MatrixXd::Zero(num_classes, d);
  bias_ = Eigen::VectorXd::Zero(num_classes);
  for (int it = 0; it < cfg.iterations; ++it) {
    Eigen::MatrixXd z = (x * weights_.transpose()).rowwise() + bias_.transpose();
    const Eigen::VectorXd zmax = z.rowwise().maxCoeff();
    z = (z.colwise() - zmax).array().exp().matrix();
    const Eigen::VectorXd zsum = z.rowwise().sum();
    const Eigen::MatrixXd residual = (z.array().colwise() / zsum.array()).matrix() - onehot;
    const Eigen::MatrixXd gw = residual.transpose() * x / static_cast<double>(n) + cfg.l2 * weights_;
    const Eigen::VectorXd gb = residual.colwise().sum().transpose() / static_cast<double>(n);
    weights_ -= cfg.learning_rate * gw;
    bias_ -= cfg.learning_rate * gb;
  }
}

Eigen::MatrixXd LinearProbe::logits(const Eigen::MatrixXd& x) const {
  if (weights_.size() == 0) throw ParameterError("probe has not been fitted");
  if (x.cols() != weights_.cols()) throw DimensionError("probe input has the wrong dimension");
  const Eigen::MatrixXd xs = ((x.rowwise() - mean_).array().rowwise() * inv_std_.array()).matrix();
  return (xs * weights_.transpose()).rowwise() + bias_.transpose();
}

std::vector<int> LinearProbe::predict(const Eigen::MatrixXd& x) const {
  const Eigen::MatrixXd z = logits(x);
  std::vector<int> out(static_cast<std::size_t>(z.rows()));
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    Eigen::Index best = 0;
    z.row(i).maxCoeff(&best);
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

ProbeScores score_probe(const LinearProbe& probe, const EmbeddingSet& test, std::span<const int> head_classes) {
  if (test.size() == 0) throw SampleSizeError("probe test set is empty");
  if (static_cast<int>(test.labels.size()) != test.size()) throw DataError("probe test data must be labeled");
  const int k = probe.num_classes();
  const std::vector<int> pred = probe.predict(test.vectors);
  std::vector<int> hit(static_cast<std::size_t>(k), 0), total(static_cast<std::size_t>(k), 0);
  int correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const int y = test.labels[i];
    if (y < 0 || y >= k) throw DataError("test label out of range");
    ++total[static_cast<std::size_t>(y)];
    if (pred[i] == y) {
      ++hit[static_cast<std::size_t>(y)];
      ++correct;
    }
  }
  ProbeScores s;
  s.accuracy = static_cast<double>(correct) / test.size();
  s.per_class.assign(static_cast<std::size_t>(k), std::numeric_limits<double>::quiet_NaN());
  double all = 0.0, head = 0.0, tail = 0.0;
  int n_all = 0, n_head = 0, n_tail = 0;
  for (int c = 0; c < k; ++c) {
    const auto cc = static_cast<std::size_t>(c);
    if (total[cc] == 0) continue;
    const double acc = static_cast<double>(hit[cc]) / total[cc];
    s.per_class[cc] = acc;
    all += acc;
    ++n_all;
    const bool is_head = std::find(head_classes.begin(), head_classes.end(), c) != head_classes.end();
    if (is_head) {
      head += acc;
      ++n_head;
    } else {
      tail += acc;
      ++n_tail;
    }
  }
  s.average = all / n_all;
  if (head_classes.empty()) {
    s.long_accuracy = s.tail_accuracy = s.average;
  } else {
    s.long_accuracy = n_head ? head / n_head : std::numeric_limits<double>::quiet_NaN();
    s.tail_accuracy = n_tail ? tail / n_tail : std::numeric_limits<double>::quiet_NaN();
  }
  return s;
}

}  // namespace mhlora
