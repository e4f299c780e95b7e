// Copyright 2026 The mhlora Authors
// SPDX-License-Identifier: Apache-2.0

#include "mhlora/pgm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "mhlora/errors.hpp"
#include "mhlora/fileio.hpp"

namespace mhlora {

std::string encode_pgm(const Image& img) {
  if (img.width <= 0 || img.height <= 0) throw ShapeError("cannot encode an empty image");
  std::string out = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  out.reserve(out.size() + img.size());
  for (double v : img.pixels) {
    const double c = std::clamp(std::isfinite(v) ? v : 0.0, 0.0, 1.0);
    out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(c * 255.0))));
  }
  return out;
}

namespace {

// Reads one header integer, skipping whitespace and '#' comments.
int header_int(std::string_view b, std::size_t& pos) {
  while (pos < b.size()) {
    if (std::isspace(static_cast<unsigned char>(b[pos]))) {
      ++pos;
    } else if (b[pos] == '#') {
      while (pos < b.size() && b[pos] != '\n') ++pos;
    } else {
      break;
    }
  }
  const std::size_t start = pos;
  long long v = 0;
  while (pos < b.size() && std::isdigit(static_cast<unsigned char>(b[pos]))) {
    v = v * 10 + (b[pos] - '0');
    if (v > 1 << 20) throw FormatError("graymap header value too large", static_cast<long long>(start));
    ++pos;
  }
  if (pos == start) throw FormatError("expected a number in graymap header", static_cast<long long>(pos));
  return static_cast<int>(v);
}

}  // namespace

Image decode_pgm(std::string_view bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5')
    throw FormatError("not a binary graymap (bad magic)", 0);
  std::size_t pos = 2;
  const int w = header_int(bytes, pos);
  const int h = header_int(bytes, pos);
  const int maxval = header_int(bytes, pos);
  if (w <= 0 || h <= 0) throw FormatError("graymap has zero size", static_cast<long long>(pos));
  if (maxval != 255) throw FormatError("only 8-bit graymaps are supported", static_cast<long long>(pos));
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos])))
    throw FormatError("missing separator after graymap header", static_cast<long long>(pos));
  ++pos;
  const std::size_t need = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  if (bytes.size() - pos < need) throw FormatError("truncated graymap payload", static_cast<long long>(bytes.size()));
  Image img(w, h);
  for (std::size_t i = 0; i < need; ++i)
    img.pixels[i] = static_cast<unsigned char>(bytes[pos + i]) / 255.0;
  return img;
}

void write_pgm(const std::filesystem::path& path, const Image& img) {
  write_file_atomic(path, encode_pgm(img));
}

Image read_pgm(const std::filesystem::path& path) {
  try {
    return decode_pgm(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace mhlora
