// Copyright 2026 The mhlora Authors
// SPDX-License-Identifier: Apache-2.0

#include "mhlora/corpus.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <random>

#include "json.hpp"
#include "mhlora/errors.hpp"
#include "mhlora/fileio.hpp"
#include "mhlora/pgm.hpp"

namespace mhlora {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr std::array<std::string_view, kToyShapeCount> kShapeNames = {
    "disk", "ring", "hbar", "vbar", "plus", "xcross", "square", "frame", "triangle", "diamond"};

constexpr std::array<std::pair<Split, std::string_view>, 6> kSplitNames = {{
    {Split::kUnassigned, "none"},
    {Split::kPretrain, "pretrain"},
    {Split::kFewShot, "fewshot"},
    {Split::kHead, "head"},
    {Split::kTail, "tail"},
    {Split::kTest, "test"},
}};

// Shape membership for a pixel centre at offset (u, v) from the shape centre.
bool inside(int shape, double u, double v, double s) {
  const double au = std::abs(u), av = std::abs(v);
  const double thick = std::max(1.0, 0.35 * s);
  switch (shape) {
    case 0: return u * u + v * v <= s * s;
    case 1: {
      const double r2 = u * u + v * v;
      const double inner = std::max(s - 1.8, 0.0);
      return r2 <= s * s && r2 >= inner * inner;
    }
    case 2: return au <= s && av <= thick;
    case 3: return av <= s && au <= thick;
    case 4: return (au <= s && av <= 0.8 * thick) || (av <= s && au <= 0.8 * thick);
    case 5: {
      if (au > s || av > s) return false;
      const double band = 0.75 * thick * std::numbers::sqrt2;
      return std::abs(u - v) <= band || std::abs(u + v) <= band;
    }
    case 6: return au <= 0.85 * s && av <= 0.85 * s;
    case 7: {
      const double outer = 0.85 * s, inner = outer - 1.6;
      return au <= outer && av <= outer && (au > inner || av > inner);
    }
    case 8: return v >= -s && v <= s && au <= 0.5 * (v + s) + 0.5;
    case 9: return au + av <= s;
    default: return false;
  }
}

struct ShapeDraw {
  double cx, cy, size, intensity;
  double stripe_period, stripe_angle, stripe_phase, stripe_amp;
};

ShapeDraw draw_params(int image_size, ToyStyle style, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double k = image_size / 16.0;
  ShapeDraw d{};
  d.size = k * (3.0 + 3.0 * unit(rng));
  const double margin = d.size + 0.5;
  d.cx = margin + (image_size - 2.0 * margin) * unit(rng);
  d.cy = margin + (image_size - 2.0 * margin) * unit(rng);
  if (style == ToyStyle::kBroad) {
    d.intensity = 0.45 + 0.4 * unit(rng);
    d.stripe_amp = 0.0;
    d.stripe_period = 1.0;
  } else {
    d.intensity = 0.7 + 0.3 * unit(rng);
    d.stripe_amp = 0.5;
    d.stripe_period = k * (2.5 + 1.5 * unit(rng));
  }
  d.stripe_angle = std::numbers::pi * unit(rng);
  d.stripe_phase = 2.0 * std::numbers::pi * unit(rng);
  return d;
}

// Renders one shape and returns its tight box.
Box render_shape(Image& img, int shape, const ShapeDraw& d) {
  int x0 = img.width, y0 = img.height, x1 = -1, y1 = -1;
  const double cu = std::cos(d.stripe_angle), sv = std::sin(d.stripe_angle);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const double u = x + 0.5 - d.cx, v = y + 0.5 - d.cy;
      if (!inside(shape, u, v, d.size)) continue;
      const double wave = 0.5 * (1.0 + std::sin(2.0 * std::numbers::pi * (u * cu + v * sv) / d.stripe_period +
                                               d.stripe_phase));
      const double value = d.intensity * (1.0 - d.stripe_amp * wave);
      img.at(x, y) = std::max(value, 2.0 / 255.0);
      x0 = std::min(x0, x);
      y0 = std::min(y0, y);
      x1 = std::max(x1, x + 1);
      y1 = std::max(y1, y + 1);
    }
  }
  if (x1 < 0) throw ShapeError("shape rasterised to no pixels");
  return Box(x0, y0, x1, y1);
}

std::string item_stem(int class_id, int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "c%02d_%05d", class_id, index);
  return buf;
}

json box_json(const Box& b) { return json::array({b.x0(), b.y0(), b.x1(), b.y1()}); }

Box box_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4) throw FormatError("box must be [x0, y0, x1, y1]");
  try {
    return Box(j[0].get<int>(), j[1].get<int>(), j[2].get<int>(), j[3].get<int>());
  } catch (const ShapeError& e) {
    throw DataError(std::string("invalid box: ") + e.what());
  }
}

fs::path sidecar_for(const std::string& image) {
  fs::path p = fs::path("boxes") / fs::path(image).filename();
  p.replace_extension(".json");
  return p;
}

}  // namespace

std::string_view to_string(Split s) {
  for (const auto& [k, v] : kSplitNames)
    if (k == s) return v;
  return "none";
}

Split parse_split(std::string_view name) {
  for (const auto& [k, v] : kSplitNames)
    if (v == name) return k;
  throw FormatError("unknown split tag '" + std::string(name) + "'");
}

std::string_view toy_class_name(int class_id) {
  if (class_id < 0 || class_id >= kToyShapeCount) throw ParameterError("toy class id out of range");
  return kShapeNames[static_cast<std::size_t>(class_id)];
}

int DatasetManifest::count(int class_id, Split split) const {
  return static_cast<int>(std::count_if(items.begin(), items.end(), [&](const ManifestItem& it) {
    return it.class_id == class_id && it.split == split;
  }));
}

void DatasetManifest::validate() const {
  if (classes.empty()) throw DataError("manifest declares no classes");
  for (const auto& it : items)
    if (it.class_id < 0 || it.class_id >= static_cast<int>(classes.size()))
      throw DataError("item " + it.image + " has an undeclared class");
  if (shots < 0) throw DataError("negative shot count");
  if (shots == 0) return;
  for (int c = 0; c < static_cast<int>(classes.size()); ++c) {
    for (Split s : {Split::kFewShot, Split::kTail}) {
      const int n = count(c, s);
      if (n != 0 && n != shots)
        throw DataError("class '" + classes[static_cast<std::size_t>(c)] + "' has " + std::to_string(n) + " " +
                        std::string(to_string(s)) + " items, expected " + std::to_string(shots));
    }
  }
}

std::vector<LabeledImage> Corpus::labeled(Split split) const {
  std::vector<LabeledImage> out;
  for (std::size_t i = 0; i < manifest.items.size(); ++i) {
    const ManifestItem& it = manifest.items[i];
    if (it.split != split) continue;
    const Image& img = images.at(i);
    out.push_back({img, it.class_id, enclosing_box_or_full(it.boxes, img.width, img.height)});
  }
  return out;
}

std::vector<LabeledImage> Corpus::labeled(Split split, int class_id) const {
  std::vector<LabeledImage> all = labeled(split);
  std::erase_if(all, [&](const LabeledImage& l) { return l.class_id != class_id; });
  return all;
}

Corpus generate_toy_corpus(int n_classes, int per_class, int image_size, std::uint64_t seed,
                           ToyStyle style) {
  if (n_classes < 2) throw ParameterError("toy corpus needs at least 2 classes");
  if (n_classes > kToyShapeCount)
    throw ParameterError("toy corpus supports at most " + std::to_string(kToyShapeCount) + " classes");
  if (per_class < 1) throw ParameterError("toy corpus needs at least one image per class");
  if (image_size < 8) throw ShapeError("image size " + std::to_string(image_size) + " is too small for the toy shapes");

  Corpus corpus;
  for (int c = 0; c < n_classes; ++c) corpus.manifest.classes.emplace_back(toy_class_name(c));
  Rng rng(seed ^ (style == ToyStyle::kBroad ? 0xB40ADULL : 0x7A26E7ULL));
  for (int c = 0; c < n_classes; ++c) {
    for (int i = 0; i < per_class; ++i) {
      Image img(image_size, image_size);
      const Box box = render_shape(img, c, draw_params(image_size, style, rng));
      ManifestItem item;
      item.image = "images/" + item_stem(c, i) + ".pgm";
      item.class_id = c;
      item.boxes.push_back(box);
      corpus.manifest.items.push_back(std::move(item));
      corpus.images.push_back(quantize_u8(img));
    }
  }
  return corpus;
}

void tag_all(DatasetManifest& manifest, Split split) {
  for (auto& it : manifest.items) it.split = split;
}

void make_fewshot_split(DatasetManifest& manifest, int k) {
  if (k < 1) throw ParameterError("shot count must be positive");
  std::map<int, int> seen;
  for (auto& it : manifest.items) it.split = seen[it.class_id]++ < k ? Split::kFewShot : Split::kTest;
  for (int c = 0; c < static_cast<int>(manifest.classes.size()); ++c)
    if (seen[c] < k) throw SampleSizeError("class '" + manifest.classes[static_cast<std::size_t>(c)] +
                                           "' has fewer than " + std::to_string(k) + " items");
  manifest.shots = k;
}

DatasetManifest make_longtail_split(const DatasetManifest& manifest, int head_budget, int tail_k,
                                    std::uint64_t seed) {
  if (head_budget < 1 || tail_k < 1) throw ParameterError("head budget and tail shots must be positive");
  const int n = static_cast<int>(manifest.classes.size());
  if (n < 2) throw ParameterError("long-tail split needs at least 2 classes");

  std::vector<int> order(static_cast<std::size_t>(n));
  for (int c = 0; c < n; ++c) order[static_cast<std::size_t>(c)] = c;
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const int n_head = (n + 1) / 2;
  std::vector<bool> is_head(static_cast<std::size_t>(n), false);
  for (int i = 0; i < n_head; ++i) is_head[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = true;

  DatasetManifest out = manifest;
  out.shots = tail_k;
  std::vector<int> taken(static_cast<std::size_t>(n), 0);
  for (auto& it : out.items) {
    if (it.split == Split::kTest) continue;
    const auto c = static_cast<std::size_t>(it.class_id);
    const int cap = is_head[c] ? head_budget : tail_k;
    if (taken[c] < cap) {
      it.split = is_head[c] ? Split::kHead : Split::kTail;
      ++taken[c];
    } else {
      it.split = Split::kUnassigned;
    }
  }
  for (int c = 0; c < n; ++c)
    if (!is_head[static_cast<std::size_t>(c)] && taken[static_cast<std::size_t>(c)] < tail_k)
      throw SampleSizeError("tail class '" + manifest.classes[static_cast<std::size_t>(c)] +
                            "' has fewer than " + std::to_string(tail_k) + " items");
  return out;
}

std::string manifest_to_json(const DatasetManifest& m) {
  json items = json::array();
  for (const auto& it : m.items) {
    json j = {{"image", it.image}, {"class", m.classes.at(static_cast<std::size_t>(it.class_id))},
              {"split", to_string(it.split)}};
    if (!it.boxes.empty()) j["boxes"] = sidecar_for(it.image).generic_string();
    items.push_back(std::move(j));
  }
  const json doc = {{"schema_version", DatasetManifest::kSchemaVersion},
                    {"shots", m.shots},
                    {"classes", m.classes},
                    {"items", std::move(items)}};
  return doc.dump(1) + "\n";
}

namespace {

DatasetManifest parse_manifest(const json& doc, std::vector<std::string>* sidecars) {
  if (!doc.is_object()) throw FormatError("manifest must be a JSON object");
  const int version = doc.value("schema_version", -1);
  if (version != DatasetManifest::kSchemaVersion)
    throw FormatError("unsupported manifest schema version " + std::to_string(version));
  DatasetManifest m;
  m.shots = doc.value("shots", 0);
  m.classes = doc.at("classes").get<std::vector<std::string>>();
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < m.classes.size(); ++i) index[m.classes[i]] = static_cast<int>(i);
  for (const auto& j : doc.at("items")) {
    ManifestItem it;
    it.image = j.at("image").get<std::string>();
    const std::string cls = j.at("class").get<std::string>();
    const auto f = index.find(cls);
    if (f == index.end()) throw DataError("item " + it.image + " has undeclared class '" + cls + "'");
    it.class_id = f->second;
    it.split = parse_split(j.value("split", std::string("none")));
    if (sidecars) sidecars->push_back(j.value("boxes", std::string()));
    m.items.push_back(std::move(it));
  }
  return m;
}

}  // namespace

DatasetManifest manifest_from_json(std::string_view text) {
  try {
    return parse_manifest(json::parse(text), nullptr);
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed manifest: ") + e.what());
  }
}

void save_corpus(const fs::path& dir, const Corpus& corpus) {
  const DatasetManifest& m = corpus.manifest;
  if (m.items.size() != corpus.images.size()) throw DataError("corpus has mismatched item and image counts");
  m.validate();
  for (std::size_t i = 0; i < m.items.size(); ++i) {
    const ManifestItem& it = m.items[i];
    write_pgm(dir / it.image, corpus.images[i]);
    if (it.boxes.empty()) continue;
    json boxes = json::array();
    for (const Box& b : it.boxes)
      boxes.push_back({{"class", m.classes[static_cast<std::size_t>(it.class_id)]}, {"box", box_json(b)}});
    const json sidecar = {{"image", it.image}, {"boxes", std::move(boxes)}};
    write_file_atomic(dir / sidecar_for(it.image), sidecar.dump(1) + "\n");
  }
  write_file_atomic(dir / "manifest.json", manifest_to_json(m));
}

Corpus load_corpus(const fs::path& manifest_path) {
  const fs::path dir = manifest_path.parent_path();
  Corpus corpus;
  std::vector<std::string> sidecars;
  try {
    corpus.manifest = parse_manifest(json::parse(read_file(manifest_path)), &sidecars);
    for (std::size_t i = 0; i < corpus.manifest.items.size(); ++i) {
      ManifestItem& it = corpus.manifest.items[i];
      const fs::path img_path = dir / it.image;
      if (!fs::exists(img_path)) throw DataError("missing image file " + img_path.string());
      corpus.images.push_back(read_pgm(img_path));
      const Image& img = corpus.images.back();
      if (sidecars[i].empty()) continue;
      const fs::path box_path = dir / sidecars[i];
      if (!fs::exists(box_path)) throw DataError("missing box sidecar " + box_path.string());
      const json side = json::parse(read_file(box_path));
      for (const auto& b : side.at("boxes")) {
        const Box box = box_from_json(b.at("box"));
        if (!box.within(img.width, img.height))
          throw DataError("box " + to_string(box) + " lies outside " + it.image);
        if (b.contains("class") && b.at("class").get<std::string>() !=
                                       corpus.manifest.classes[static_cast<std::size_t>(it.class_id)])
          throw DataError("box class in " + box_path.string() + " does not match the manifest");
        it.boxes.push_back(box);
      }
    }
  } catch (const json::exception& e) {
    throw FormatError(manifest_path.string() + ": malformed JSON: " + e.what());
  }
  corpus.manifest.validate();
  return corpus;
}

}  // namespace mhlora
