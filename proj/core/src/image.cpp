// Copyright 2026 The mhlora Authors
// SPDX-License-Identifier: Apache-2.0

#include "mhlora/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace mhlora {

Image flip_horizontal(const Image& img) {
  Image out(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) out.at(x, y) = img.at(img.width - 1 - x, y);
  return out;
}

Image quantize_u8(const Image& img) {
  Image out = img;
  for (double& p : out.pixels) {
    const double c = std::clamp(p, 0.0, 1.0);
    p = std::round(c * 255.0) / 255.0;
  }
  return out;
}

std::uint64_t digest(const Image& img) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* data, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ULL;
    }
  };
  mix(&img.width, sizeof(img.width));
  mix(&img.height, sizeof(img.height));
  mix(img.pixels.data(), img.pixels.size() * sizeof(double));
  return h;
}

}  // namespace mhlora
