// Copyright 2026 The mhlora Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace mhlora {

// Grayscale pixel grid, row-major, intensities nominally in [0, 1] with 0 as
// background.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<double> pixels;

  Image() = default;
  Image(int w, int h, double fill = 0.0)
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

  double& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  double at(int x, int y) const {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }
  std::size_t size() const { return pixels.size(); }

  friend bool operator==(const Image&, const Image&) = default;
};

Image flip_horizontal(const Image& img);

// Rounds every pixel onto the 8-bit grid used by the graymap format so that
// in-memory images and their files agree exactly.
Image quantize_u8(const Image& img);

// FNV-1a digest over the raw pixel bytes; used for run manifests and
// determinism checks.
std::uint64_t digest(const Image& img);

}  // namespace mhlora
