// Copyright 2026 The mhlora Authors
// SPDX-License-Identifier: Apache-2.0

#include "mhlora/adapter.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mhlora/errors.hpp"

namespace mhlora {

void AdapterShape::validate() const {
  if (d1 < 1 || d2 < 1)
    throw ShapeError("adapter layer dimensions must be positive");
  if (rank < 1) throw ShapeError("adapter rank must be at least 1");
  if (rank > std::min(d1, d2))
    throw ShapeError("adapter rank " + std::to_string(rank) + " exceeds min(d1, d2) = " +
                     std::to_string(std::min(d1, d2)));
  if (heads < 1) throw ShapeError("adapter needs at least one head");
}

MixtureWeights::MixtureWeights(std::vector<double> w) : w_(std::move(w)) {
  if (w_.empty()) throw ParameterError("mixture weights must be nonempty");
  double sum = 0.0;
  for (double v : w_) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw ParameterError("mixture weights must be finite and nonnegative");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw ParameterError("mixture weights must sum to 1 (got " + std::to_string(sum) + ")");
}

MixtureWeights MixtureWeights::uniform(int k) {
  if (k < 1) throw ParameterError("mixture dimension must be at least 1");
  return MixtureWeights(std::vector<double>(static_cast<std::size_t>(k), 1.0 / k));
}

MixtureWeights MixtureWeights::one_hot(int k, int index) {
  if (index < 0 || index >= k) throw ParameterError("one-hot index out of range");
  std::vector<double> w(static_cast<std::size_t>(k), 0.0);
  w[static_cast<std::size_t>(index)] = 1.0;
  return MixtureWeights(std::move(w));
}

bool MultiHeadAdapter::all_heads_zero() const {
  return std::all_of(heads.begin(), heads.end(),
                     [](const Eigen::MatrixXf& b) { return (b.array() == 0.0f).all(); });
}

bool MultiHeadAdapter::all_finite() const {
  if (!A.allFinite()) return false;
  return std::all_of(heads.begin(), heads.end(),
                     [](const Eigen::MatrixXf& b) { return b.allFinite(); });
}

MultiHeadAdapter new_multi_head(const AdapterShape& shape, double init_std, Rng& rng,
                                double lora_scale) {
  shape.validate();
  if (!(init_std > 0.0)) throw ParameterError("init_std must be positive");
  MultiHeadAdapter a;
  a.shape = shape;
  a.lora_scale = lora_scale;
  a.A.resize(shape.rank, shape.d2);
  std::normal_distribution<double> normal(0.0, init_std);
  // Row-major fill order so the draw sequence matches the file layout.
  for (int i = 0; i < shape.rank; ++i)
    for (int j = 0; j < shape.d2; ++j) a.A(i, j) = static_cast<float>(normal(rng));
  a.heads.assign(static_cast<std::size_t>(shape.heads),
                 Eigen::MatrixXf::Zero(shape.d1, shape.rank));
  return a;
}

MultiHeadAdapter new_multi_head(const AdapterShape& shape, double init_std,
                                std::uint64_t seed, double lora_scale) {
  Rng rng(seed);
  return new_multi_head(shape, init_std, rng, lora_scale);
}

MergedAdapter merge_heads(const MultiHeadAdapter& adapter, const MixtureWeights& w) {
  if (w.size() != adapter.num_heads())
    throw DimensionError("mixture has " + std::to_string(w.size()) + " weights but adapter has " +
                         std::to_string(adapter.num_heads()) + " heads");
  MergedAdapter m;
  m.A = adapter.A.cast<double>();
  m.lora_scale = adapter.lora_scale;
  m.B_prime = Eigen::MatrixXd::Zero(adapter.shape.d1, adapter.shape.rank);
  for (int i = 0; i < w.size(); ++i) {
    if (w[i] == 0.0) continue;
    m.B_prime.noalias() += w[i] * adapter.heads[static_cast<std::size_t>(i)].cast<double>();
  }
  return m;
}

MergedAdapter select_head(const MultiHeadAdapter& adapter, int head) {
  if (head < 0 || head >= adapter.num_heads()) throw DimensionError("head index out of range");
  MergedAdapter m;
  m.A = adapter.A.cast<double>();
  m.B_prime = adapter.heads[static_cast<std::size_t>(head)].cast<double>();
  m.lora_scale = adapter.lora_scale;
  return m;
}

Eigen::MatrixXd effective_delta(const MergedAdapter& m) {
  return m.lora_scale * (m.B_prime * m.A);
}

Eigen::VectorXd adapted_forward(const Eigen::MatrixXd& W0, const MergedAdapter& m,
                                const Eigen::VectorXd& x) {
  if (W0.rows() != m.B_prime.rows() || W0.cols() != m.A.cols() || x.size() != W0.cols())
    throw DimensionError("adapted_forward: base layer, adapter and input disagree");
  Eigen::VectorXd y = W0 * x;
  const Eigen::VectorXd ax = m.A * x;
  y.noalias() += m.lora_scale * (m.B_prime * ax);
  return y;
}

std::int64_t trainable_parameters(const AdapterShape& shape) {
  shape.validate();
  return static_cast<std::int64_t>(shape.rank) * shape.d2 +
         static_cast<std::int64_t>(shape.heads) * shape.d1 * shape.rank;
}

std::int64_t image_wise_parameters(int d1, int d2, int rank, int k) {
  return static_cast<std::int64_t>(k) * rank * (d1 + d2);
}

std::int64_t class_wise_parameters(int d1, int d2, int rank, int k) {
  return static_cast<std::int64_t>(rank) * k * (d1 + d2);
}

}  // namespace mhlora
