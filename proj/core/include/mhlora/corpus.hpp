// Copyright 2026 The mhlora Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "mhlora/crop.hpp"
#include "mhlora/image.hpp"
#include "mhlora/training.hpp"

namespace mhlora {

enum class Split { kUnassigned, kPretrain, kFewShot, kHead, kTail, kTest };

std::string_view to_string(Split s);  // "none", "pretrain", "fewshot", "head", "tail", "test"
Split parse_split(std::string_view name);

struct ManifestItem {
  std::string image;  // path relative to the manifest directory
  int class_id = 0;
  std::vector<Box> boxes;
  Split split = Split::kUnassigned;
};

struct DatasetManifest {
  static constexpr int kSchemaVersion = 1;

  std::vector<std::string> classes;
  std::vector<ManifestItem> items;
  // Shot count K; when positive every class with few-shot (or tail) items has
  // exactly K of them.
  int shots = 0;

  int count(int class_id, Split split) const;
  // Throws DataError on undeclared classes or wrong K-shot counts.
  void validate() const;
};

// Manifest plus decoded pixels, images[i] belonging to manifest.items[i].
struct Corpus {
  DatasetManifest manifest;
  std::vector<Image> images;

  // Items of one split (all classes) with their enclosing boxes; items
  // without boxes get the full frame.
  std::vector<LabeledImage> labeled(Split split) const;
  std::vector<LabeledImage> labeled(Split split, int class_id) const;
};

// Rendering statistics of the procedural corpus. kBroad draws flat shapes for
// base pretraining; kTarget adds stripe textures and brighter shapes, so the
// few-shot domain differs from what the base model has seen.
enum class ToyStyle { kBroad, kTarget };

inline constexpr int kToyShapeCount = 10;
std::string_view toy_class_name(int class_id);

// per_class shapes per class, rendered at image_size x image_size (>= 8) with
// tight ground-truth boxes. Items are left unassigned. Pixels lie on the 8-bit
// grid so a save/load round trip is exact.
Corpus generate_toy_corpus(int n_classes, int per_class, int image_size, std::uint64_t seed,
                           ToyStyle style = ToyStyle::kTarget);

// Tags every item with `split`.
void tag_all(DatasetManifest& manifest, Split split);

// First k items of every class become few-shot, the rest test; sets shots = k.
void make_fewshot_split(DatasetManifest& manifest, int k);

// Random half of the classes (the larger half on odd counts) become head
// classes with up to head_budget items, the others tail classes with exactly
// tail_k items. Items already tagged test stay test; leftovers are unassigned.
DatasetManifest make_longtail_split(const DatasetManifest& manifest, int head_budget, int tail_k,
                                    std::uint64_t seed);

// JSON manifest and per-image box sidecars.
std::string manifest_to_json(const DatasetManifest& manifest);
DatasetManifest manifest_from_json(std::string_view text);

// Writes images/, boxes/ and manifest.json under `dir`.
void save_corpus(const std::filesystem::path& dir, const Corpus& corpus);

// Loads and validates: referenced files exist, boxes lie inside their image,
// K-shot counts are exact.
Corpus load_corpus(const std::filesystem::path& manifest_path);

}  // namespace mhlora
