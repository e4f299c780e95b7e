// Copyright 2026 The mhlora Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "mhlora/denoiser.hpp"
#include "mhlora/schedule.hpp"

namespace mhlora {

// Base model checkpoint, little-endian:
//   "CHLM" | u16 version=1 | i32 image_size, channels, blocks, time_dim,
//   num_classes | u32 T | f64 betas[T] | u32 tensors | per tensor: u32 rows,
//   u32 cols, f64 row-major | u32 directions | u32 dim | f64 values
struct Checkpoint {
  Denoiser model;
  NoiseSchedule schedule = NoiseSchedule::scaled_linear(200);
};

std::string encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(std::string_view bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace mhlora
