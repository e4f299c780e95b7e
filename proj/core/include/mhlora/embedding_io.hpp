// Copyright 2026 The mhlora Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "mhlora/metrics.hpp"

namespace mhlora {

// CSV with a header row. Labeled sets start with a "label" column followed by
// d0..d{D-1}; unlabeled sets carry only the d columns. Values are written with
// 17 significant digits so a round trip is exact.
std::string embeddings_to_csv(const EmbeddingSet& set);
EmbeddingSet embeddings_from_csv(std::string_view text);

void export_embeddings(const std::filesystem::path& path, const EmbeddingSet& set);
EmbeddingSet import_embeddings(const std::filesystem::path& path);

// Row-wise concatenation; both sets must share dimension and labeling.
EmbeddingSet concatenate(const EmbeddingSet& a, const EmbeddingSet& b);

}  // namespace mhlora
