// Copyright 2026 The mhlora Authors
// SPDX-License-Identifier: Apache-2.0

#include "mhlora/adapter_io.hpp"

#include <limits>

#include "bytes.hpp"
#include "mhlora/errors.hpp"
#include "mhlora/fileio.hpp"

namespace mhlora {

using detail::ByteReader;
using detail::ByteWriter;

namespace {

constexpr std::string_view kAdapterMagic = "CHLA";
constexpr std::string_view kBankMagic = "CHLB";
constexpr std::uint16_t kBankVersion = 1;
constexpr std::uint32_t kMaxDim = 1u << 16;

void write_matrix(ByteWriter& w, const Eigen::MatrixXf& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) w.f32(m(i, j));
}

Eigen::MatrixXf read_matrix(ByteReader& r, int rows, int cols) {
  r.need(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols) * 4);
  Eigen::MatrixXf m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = r.f32();
  return m;
}

void write_adapter(ByteWriter& w, const MultiHeadAdapter& a) {
  a.shape.validate();
  w.raw(kAdapterMagic);
  w.u16(kAdapterFormatVersion);
  w.u32(static_cast<std::uint32_t>(a.shape.d1));
  w.u32(static_cast<std::uint32_t>(a.shape.d2));
  w.u32(static_cast<std::uint32_t>(a.shape.rank));
  w.u32(static_cast<std::uint32_t>(a.shape.heads));
  w.f64(a.lora_scale);
  write_matrix(w, a.A);
  for (const auto& b : a.heads) write_matrix(w, b);
}

}  // namespace

std::string encode_adapter(const MultiHeadAdapter& adapter) {
  ByteWriter w;
  write_adapter(w, adapter);
  return std::move(w.str());
}

MultiHeadAdapter decode_adapter(std::string_view bytes, std::size_t& offset) {
  ByteReader r(bytes, offset);
  const std::size_t start = offset;
  if (r.remaining() < kAdapterMagic.size() || r.raw(kAdapterMagic.size()) != kAdapterMagic)
    throw FormatError("bad adapter magic", static_cast<long long>(start));
  const std::size_t version_at = r.pos();
  const std::uint16_t version = r.u16();
  if (version != kAdapterFormatVersion)
    throw FormatError("unsupported adapter version " + std::to_string(version),
                      static_cast<long long>(version_at));
  const std::size_t shape_at = r.pos();
  const std::uint32_t d1 = r.u32(), d2 = r.u32(), rank = r.u32(), k = r.u32();
  if (d1 > kMaxDim || d2 > kMaxDim || rank > kMaxDim || k > kMaxDim)
    throw FormatError("implausible adapter shape", static_cast<long long>(shape_at));
  MultiHeadAdapter a;
  a.shape = {static_cast<int>(d1), static_cast<int>(d2), static_cast<int>(rank), static_cast<int>(k)};
  try {
    a.shape.validate();
  } catch (const ShapeError& e) {
    throw FormatError(std::string("invalid adapter shape: ") + e.what(), static_cast<long long>(shape_at));
  }
  a.lora_scale = r.f64();
  a.A = read_matrix(r, a.shape.rank, a.shape.d2);
  a.heads.reserve(k);
  for (std::uint32_t i = 0; i < k; ++i) a.heads.push_back(read_matrix(r, a.shape.d1, a.shape.rank));
  offset = r.pos();
  return a;
}

MultiHeadAdapter decode_adapter(std::string_view bytes) {
  std::size_t offset = 0;
  MultiHeadAdapter a = decode_adapter(bytes, offset);
  if (offset != bytes.size()) throw FormatError("trailing bytes after adapter", static_cast<long long>(offset));
  return a;
}

void save_adapter(const std::filesystem::path& path, const MultiHeadAdapter& adapter) {
  write_file_atomic(path, encode_adapter(adapter));
}

MultiHeadAdapter load_adapter(const std::filesystem::path& path) {
  return decode_adapter(read_file(path));
}

std::string encode_bank(const AdapterBank& bank) {
  ByteWriter w;
  w.raw(kBankMagic);
  w.u16(kBankVersion);
  w.i32(bank.class_id);
  w.u8(static_cast<std::uint8_t>(bank.regime));
  const std::size_t layers = bank.sets.empty() ? 0 : bank.sets.front().layers.size();
  w.u32(static_cast<std::uint32_t>(bank.sets.size()));
  w.u32(static_cast<std::uint32_t>(layers));
  for (const auto& set : bank.sets) {
    if (set.layers.size() != layers) throw DimensionError("adapter sets differ in layer count");
    if (set.class_id != bank.class_id) throw DataError("adapter set belongs to a different class");
    for (const auto& l : set.layers) write_adapter(w, l);
  }
  return std::move(w.str());
}

AdapterBank decode_bank(std::string_view bytes) {
  ByteReader r(bytes);
  if (r.remaining() < kBankMagic.size() || r.raw(kBankMagic.size()) != kBankMagic)
    throw FormatError("bad adapter bank magic", 0);
  const std::uint16_t version = r.u16();
  if (version != kBankVersion) throw FormatError("unsupported adapter bank version " + std::to_string(version), 4);
  AdapterBank bank;
  bank.class_id = r.i32();
  const std::size_t regime_at = r.pos();
  const std::uint8_t regime = r.u8();
  if (regime > static_cast<std::uint8_t>(Regime::kBase))
    throw FormatError("unknown regime tag", static_cast<long long>(regime_at));
  bank.regime = static_cast<Regime>(regime);
  const std::uint32_t sets = r.u32(), layers = r.u32();
  if (sets > kMaxDim || layers > kMaxDim) throw FormatError("implausible bank size", static_cast<long long>(r.pos()));
  std::size_t offset = r.pos();
  for (std::uint32_t s = 0; s < sets; ++s) {
    ClassAdapters set;
    set.class_id = bank.class_id;
    for (std::uint32_t l = 0; l < layers; ++l) set.layers.push_back(decode_adapter(bytes, offset));
    bank.sets.push_back(std::move(set));
  }
  if (offset != bytes.size()) throw FormatError("trailing bytes after adapter bank", static_cast<long long>(offset));
  return bank;
}

void save_bank(const std::filesystem::path& path, const AdapterBank& bank) {
  write_file_atomic(path, encode_bank(bank));
}

AdapterBank load_bank(const std::filesystem::path& path) {
  return decode_bank(read_file(path));
}

}  // namespace mhlora
