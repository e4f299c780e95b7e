// Copyright 2026 The mhlora Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mhlora/image.hpp"

namespace mhlora {

// Deterministic stand-in for an image encoder. Each 4x4 patch contributes its
// mean, standard deviation and mean absolute horizontal/vertical differences;
// the statistics pass through a fixed-seed random projection bank with a tanh
// nonlinearity and are L2-normalised.
class ToyEmbedder {
 public:
  static constexpr int kPatch = 4;
  static constexpr int kDefaultDim = 64;
  static constexpr std::uint64_t kDefaultSeed = 0x5EEDB0A7ULL;

  explicit ToyEmbedder(int image_size = 16, int dim = kDefaultDim,
                       std::uint64_t seed = kDefaultSeed);

  int dim() const { return static_cast<int>(projection_.rows()); }
  int image_size() const { return image_size_; }

  Eigen::VectorXd patch_statistics(const Image& img) const;
  Eigen::VectorXd embed(const Image& img) const;

  // One embedding per row.
  Eigen::MatrixXd embed_all(std::span<const Image> images) const;

 private:
  int image_size_;
  Eigen::MatrixXd projection_;
  Eigen::VectorXd bias_;
};

// Unit-norm mean embedding of every class 0..num_classes-1; stands in for a
// text embedding of the class name when scoring images. Throws DataError if a
// class has no images.
std::vector<Eigen::VectorXd> class_directions(const ToyEmbedder& embedder,
                                              std::span<const Image> images,
                                              std::span<const int> labels, int num_classes);

}  // namespace mhlora
