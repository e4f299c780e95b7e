// Copyright 2026 The mhlora Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace mhlora {

using Rng = std::mt19937_64;

// Dimensions of one adapted layer W0 (d1 x d2) carrying a rank-r update, split
// over K per-image heads.
struct AdapterShape {
  int d1 = 0;
  int d2 = 0;
  int rank = 0;
  int heads = 1;

  void validate() const;  // throws ShapeError

  friend bool operator==(const AdapterShape&, const AdapterShape&) = default;
};

// Simplex point used to merge heads. Construction validates nonnegativity and
// unit sum (within 1e-9).
class MixtureWeights {
 public:
  MixtureWeights() = default;
  explicit MixtureWeights(std::vector<double> w);

  static MixtureWeights uniform(int k);
  static MixtureWeights one_hot(int k, int index);

  int size() const { return static_cast<int>(w_.size()); }
  double operator[](int i) const { return w_[static_cast<std::size_t>(i)]; }
  const std::vector<double>& values() const { return w_; }

  friend bool operator==(const MixtureWeights&, const MixtureWeights&) = default;

 private:
  std::vector<double> w_;
};

// Shared A (r x d2) plus K heads B_i (d1 x r). Matrices are stored in single
// precision, which is also the on-disk precision, so saved adapters reload
// bit-for-bit.
struct MultiHeadAdapter {
  AdapterShape shape;
  Eigen::MatrixXf A;
  std::vector<Eigen::MatrixXf> heads;
  double lora_scale = 1.0;

  int rank() const { return shape.rank; }
  int num_heads() const { return shape.heads; }

  bool all_heads_zero() const;
  bool all_finite() const;
};

// Snapshot produced by merging: A is copied, never referenced.
struct MergedAdapter {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B_prime;
  double lora_scale = 1.0;

  int d1() const { return static_cast<int>(B_prime.rows()); }
  int d2() const { return static_cast<int>(A.cols()); }
  int rank() const { return static_cast<int>(A.rows()); }
};

// Default standard deviation of the Gaussian A initialisation: 1/r.
inline double default_init_std(int rank) { return 1.0 / rank; }

MultiHeadAdapter new_multi_head(const AdapterShape& shape, double init_std,
                                std::uint64_t seed, double lora_scale = 1.0);

// Same as above but drawing from a caller-owned generator.
MultiHeadAdapter new_multi_head(const AdapterShape& shape, double init_std, Rng& rng,
                                double lora_scale = 1.0);

MergedAdapter merge_heads(const MultiHeadAdapter& adapter, const MixtureWeights& w);

// Merged view of a single head (equivalent to merging with a one-hot vector).
MergedAdapter select_head(const MultiHeadAdapter& adapter, int head);

Eigen::MatrixXd effective_delta(const MergedAdapter& m);

// y = W0 x + s * B'(A x), never forming B'A.
Eigen::VectorXd adapted_forward(const Eigen::MatrixXd& W0, const MergedAdapter& m,
                                const Eigen::VectorXd& x);

// Trainable parameter accounting.
std::int64_t trainable_parameters(const AdapterShape& shape);
// K independent rank-r pairs (image-wise regime).
std::int64_t image_wise_parameters(int d1, int d2, int rank, int k);
// One pair of rank r*K (budget-matched class-wise regime).
std::int64_t class_wise_parameters(int d1, int d2, int rank, int k);

}  // namespace mhlora
