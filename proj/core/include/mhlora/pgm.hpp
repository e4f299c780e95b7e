// Copyright 2026 The mhlora Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "mhlora/image.hpp"

namespace mhlora {

// Binary 8-bit portable graymap (P5). Pixels are clamped to [0, 1] and
// rounded to k/255 on write; reading yields k/255 exactly, so
// read(write(quantize_u8(img))) == quantize_u8(img).
std::string encode_pgm(const Image& img);
Image decode_pgm(std::string_view bytes);

void write_pgm(const std::filesystem::path& path, const Image& img);
Image read_pgm(const std::filesystem::path& path);

}  // namespace mhlora
