// Copyright 2026 The mhlora Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace mhlora {

// Writes to a sibling temporary file and renames it over `path`, so readers
// never observe a partial file. Parent directories are created.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

// Whole-file read; throws DataError when the file cannot be opened.
std::string read_file(const std::filesystem::path& path);

}  // namespace mhlora
