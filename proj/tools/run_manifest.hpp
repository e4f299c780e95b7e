// Copyright 2026 The mhlora Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace mhlora::cli {

// FNV-1a 64 over raw bytes, as 16 lowercase hex digits.
std::string digest_hex(std::string_view bytes);
std::string file_digest(const std::filesystem::path& path);

// Record written next to every command's outputs. `argv` holds the command
// line without the program name so `mhlora rerun` can replay it.
struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::uint64_t seed = 0;
  std::string seed_source = "flag";  // "flag" or "CHIMERA_SEED"
  std::vector<std::filesystem::path> inputs;
  std::vector<std::filesystem::path> outputs;

  // Digests every listed file that exists and writes the manifest atomically.
  void write(const std::filesystem::path& path) const;
};

struct LoadedRunManifest {
  std::string command;
  std::vector<std::string> argv;
  std::uint64_t seed = 0;
};

LoadedRunManifest read_run_manifest(const std::filesystem::path& path);

std::string tool_version();

}  // namespace mhlora::cli
