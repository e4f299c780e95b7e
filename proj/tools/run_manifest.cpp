// Copyright 2026 The mhlora Authors
// SPDX-License-Identifier: Apache-2.0

#include "run_manifest.hpp"

#include <algorithm>
#include <cstdio>

#include "mhlora/errors.hpp"
#include "mhlora/fileio.hpp"

#ifndef MHLORA_VERSION
#define MHLORA_VERSION "0.0.0"
#endif

namespace mhlora::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::string digest_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string file_digest(const fs::path& path) { return digest_hex(read_file(path)); }

std::string tool_version() { return MHLORA_VERSION; }

namespace {

ojson digest_list(const std::vector<fs::path>& paths) {
  ojson out = ojson::array();
  for (const fs::path& p : paths) {
    std::error_code ec;
    if (fs::is_regular_file(p, ec)) {
      out.push_back({{"path", p.generic_string()}, {"fnv1a64", file_digest(p)}});
    } else if (fs::is_directory(p, ec)) {
      // Directories are digested file by file in sorted order.
      std::vector<fs::path> files;
      for (const auto& e : fs::recursive_directory_iterator(p))
        if (e.is_regular_file()) files.push_back(e.path());
      std::sort(files.begin(), files.end());
      std::string combined;
      for (const fs::path& f : files)
        combined += fs::relative(f, p).generic_string() + ":" + file_digest(f) + "\n";
      out.push_back({{"path", p.generic_string()}, {"files", files.size()}, {"fnv1a64", digest_hex(combined)}});
    }
  }
  return out;
}

}  // namespace

void RunManifest::write(const fs::path& path) const {
  ojson j;
  j["schema_version"] = 1;
  j["tool"] = "mhlora";
  j["version"] = tool_version();
  j["command"] = command;
  j["argv"] = argv;
  j["seed"] = seed;
  j["seed_source"] = seed_source;
  j["config"] = config;
  j["inputs"] = digest_list(inputs);
  j["outputs"] = digest_list(outputs);
  write_file_atomic(path, j.dump(2) + "\n");
}

LoadedRunManifest read_run_manifest(const fs::path& path) {
  try {
    const auto j = nlohmann::json::parse(read_file(path));
    LoadedRunManifest m;
    m.command = j.at("command").get<std::string>();
    m.argv = j.at("argv").get<std::vector<std::string>>();
    m.seed = j.at("seed").get<std::uint64_t>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("malformed run manifest " + path.string() + ": " + e.what());
  }
}

}  // namespace mhlora::cli
