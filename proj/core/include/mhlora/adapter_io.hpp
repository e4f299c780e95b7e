// Copyright 2026 The mhlora Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "mhlora/adapter.hpp"
#include "mhlora/sampling.hpp"

namespace mhlora {

// Single adapter record, all little-endian:
//   "CHLA" | u16 version=1 | u32 d1 | u32 d2 | u32 r | u32 K | f64 lora_scale
//   | f32 A[r x d2] row-major | f32 B_1[d1 x r] ... B_K row-major
inline constexpr std::uint16_t kAdapterFormatVersion = 1;

std::string encode_adapter(const MultiHeadAdapter& adapter);

// Decodes one record starting at `offset`; on return `offset` points past it.
// Errors (bad magic, version mismatch, truncation) carry the byte offset.
MultiHeadAdapter decode_adapter(std::string_view bytes, std::size_t& offset);
MultiHeadAdapter decode_adapter(std::string_view bytes);  // whole buffer, no trailing bytes

void save_adapter(const std::filesystem::path& path, const MultiHeadAdapter& adapter);
MultiHeadAdapter load_adapter(const std::filesystem::path& path);

// Adapter bank of one class:
//   "CHLB" | u16 version=1 | i32 class_id | u8 regime | u32 sets | u32 layers
//   | sets x layers adapter records
std::string encode_bank(const AdapterBank& bank);
AdapterBank decode_bank(std::string_view bytes);

void save_bank(const std::filesystem::path& path, const AdapterBank& bank);
AdapterBank load_bank(const std::filesystem::path& path);

}  // namespace mhlora
