// Copyright 2026 The mhlora Authors
// SPDX-License-Identifier: Apache-2.0

#include "mhlora/embedder.hpp"

#include <cmath>
#include <random>
#include <string>

#include "mhlora/adapter.hpp"
#include "mhlora/errors.hpp"

namespace mhlora {

namespace {
constexpr int kStatsPerPatch = 4;
}

ToyEmbedder::ToyEmbedder(int image_size, int dim, std::uint64_t seed) : image_size_(image_size) {
  if (image_size < kPatch || image_size % kPatch != 0)
    throw ParameterError("embedder image size must be a positive multiple of 4");
  if (dim < 2) throw ParameterError("embedding dimension must be at least 2");
  const int patches = (image_size / kPatch) * (image_size / kPatch);
  const int features = patches * kStatsPerPatch;
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  projection_.resize(dim, features);
  bias_.resize(dim);
  const double gain = 3.0 / std::sqrt(static_cast<double>(features));
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < features; ++j) projection_(i, j) = gain * normal(rng);
  for (int i = 0; i < dim; ++i) bias_(i) = 0.5 * normal(rng);
}

Eigen::VectorXd ToyEmbedder::patch_statistics(const Image& img) const {
  if (img.width != image_size_ || img.height != image_size_)
    throw DimensionError("embedder expects " + std::to_string(image_size_) + "x" +
                         std::to_string(image_size_) + " images");
  const int per_side = image_size_ / kPatch;
  Eigen::VectorXd f(per_side * per_side * kStatsPerPatch);
  int k = 0;
  for (int py = 0; py < per_side; ++py) {
    for (int px = 0; px < per_side; ++px) {
      double sum = 0.0, sq = 0.0, gx = 0.0, gy = 0.0;
      for (int y = py * kPatch; y < (py + 1) * kPatch; ++y) {
        for (int x = px * kPatch; x < (px + 1) * kPatch; ++x) {
          const double v = img.at(x, y);
          sum += v;
          sq += v * v;
          if (x + 1 < image_size_) gx += std::abs(img.at(x + 1, y) - v);
          if (y + 1 < image_size_) gy += std::abs(img.at(x, y + 1) - v);
        }
      }
      constexpr double n = kPatch * kPatch;
      const double mean = sum / n;
      f(k++) = mean;
      f(k++) = std::sqrt(std::max(sq / n - mean * mean, 0.0));
      f(k++) = gx / n;
      f(k++) = gy / n;
    }
  }
  return f;
}

Eigen::VectorXd ToyEmbedder::embed(const Image& img) const {
  const Eigen::VectorXd f = patch_statistics(img);
  Eigen::VectorXd e = (projection_ * f + bias_).array().tanh().matrix();
  const double norm = e.norm();
  if (!(norm > 0.0)) throw NumericalError("embedding has zero norm");
  return e / norm;
}

Eigen::MatrixXd ToyEmbedder::embed_all(std::span<const Image> images) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(images.size()), dim());
  for (std::size_t i = 0; i < images.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = embed(images[i]).transpose();
  return out;
}

std::vector<Eigen::VectorXd> class_directions(const ToyEmbedder& embedder,
                                              std::span<const Image> images,
                                              std::span<const int> labels, int num_classes) {
  if (images.size() != labels.size()) throw DimensionError("one label per image is required");
  std::vector<Eigen::VectorXd> sums(static_cast<std::size_t>(num_classes),
                                    Eigen::VectorXd::Zero(embedder.dim()));
  std::vector<int> counts(static_cast<std::size_t>(num_classes), 0);
  for (std::size_t i = 0; i < images.size(); ++i) {
    const int c = labels[i];
    if (c < 0 || c >= num_classes) throw DataError("label " + std::to_string(c) + " out of range");
    sums[static_cast<std::size_t>(c)] += embedder.embed(images[i]);
    ++counts[static_cast<std::size_t>(c)];
  }
  for (int c = 0; c < num_classes; ++c) {
    auto& v = sums[static_cast<std::size_t>(c)];
    if (counts[static_cast<std::size_t>(c)] == 0 || !(v.norm() > 0.0))
      throw DataError("class " + std::to_string(c) + " has no images to define its direction");
    v.normalize();
  }
  return sums;
}

}  // namespace mhlora
