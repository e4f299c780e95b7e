// Copyright 2026 The mhlora Authors
// SPDX-License-Identifier: Apache-2.0

#include "mhlora/checkpoint.hpp"

#include "bytes.hpp"
#include "mhlora/errors.hpp"
#include "mhlora/fileio.hpp"

namespace mhlora {

using detail::ByteReader;
using detail::ByteWriter;

namespace {
constexpr std::string_view kMagic = "CHLM";
constexpr std::uint16_t kVersion = 1;
constexpr std::uint32_t kMaxCount = 1u << 24;
}  // namespace

std::string encode_checkpoint(const Checkpoint& ckpt) {
  const Denoiser& m = ckpt.model;
  m.config.validate();
  ByteWriter w;
  w.raw(kMagic);
  w.u16(kVersion);
  w.i32(m.config.image_size);
  w.i32(m.config.channels);
  w.i32(m.config.blocks);
  w.i32(m.config.time_dim);
  w.i32(m.config.num_classes);
  w.u32(static_cast<std::uint32_t>(ckpt.schedule.steps()));
  for (double b : ckpt.schedule.betas()) w.f64(b);
  const auto tensors = m.weights.tensors();
  w.u32(static_cast<std::uint32_t>(tensors.size()));
  for (const MatX<double>* t : tensors) {
    w.u32(static_cast<std::uint32_t>(t->rows()));
    w.u32(static_cast<std::uint32_t>(t->cols()));
    for (Eigen::Index i = 0; i < t->rows(); ++i)
      for (Eigen::Index j = 0; j < t->cols(); ++j) w.f64((*t)(i, j));
  }
  const std::size_t dim = m.class_directions.empty() ? 0 : static_cast<std::size_t>(m.class_directions[0].size());
  w.u32(static_cast<std::uint32_t>(m.class_directions.size()));
  w.u32(static_cast<std::uint32_t>(dim));
  for (const auto& d : m.class_directions) {
    if (static_cast<std::size_t>(d.size()) != dim) throw DimensionError("class directions differ in dimension");
    for (Eigen::Index i = 0; i < d.size(); ++i) w.f64(d(i));
  }
  return std::move(w.str());
}

Checkpoint decode_checkpoint(std::string_view bytes) {
  ByteReader r(bytes);
  if (r.remaining() < kMagic.size() || r.raw(kMagic.size()) != kMagic) throw FormatError("bad checkpoint magic", 0);
  const std::uint16_t version = r.u16();
  if (version != kVersion) throw FormatError("unsupported checkpoint version " + std::to_string(version), 4);
  Checkpoint ck;
  DenoiserConfig& cfg = ck.model.config;
  const std::size_t cfg_at = r.pos();
  cfg.image_size = r.i32();
  cfg.channels = r.i32();
  cfg.blocks = r.i32();
  cfg.time_dim = r.i32();
  cfg.num_classes = r.i32();
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw FormatError(std::string("invalid model config: ") + e.what(), static_cast<long long>(cfg_at));
  }
  const std::size_t t_at = r.pos();
  const std::uint32_t steps = r.u32();
  if (steps == 0 || steps > kMaxCount) throw FormatError("implausible schedule length", static_cast<long long>(t_at));
  r.need(static_cast<std::size_t>(steps) * 8);
  std::vector<double> betas(steps);
  for (auto& b : betas) b = r.f64();
  try {
    ck.schedule = NoiseSchedule::from_betas(std::move(betas));
  } catch (const ParameterError& e) {
    throw FormatError(std::string("invalid schedule: ") + e.what(), static_cast<long long>(t_at));
  }

  ck.model.weights = DenoiserWeights<double>::zeros(cfg);
  auto tensors = ck.model.weights.tensors();
  const std::size_t count_at = r.pos();
  if (r.u32() != tensors.size())
    throw FormatError("tensor count does not match the model config", static_cast<long long>(count_at));
  for (MatX<double>* t : tensors) {
    const std::size_t at = r.pos();
    const std::uint32_t rows = r.u32(), cols = r.u32();
    if (rows != t->rows() || cols != t->cols())
      throw FormatError("tensor shape does not match the model config", static_cast<long long>(at));
    r.need(static_cast<std::size_t>(rows) * cols * 8);
    for (Eigen::Index i = 0; i < t->rows(); ++i)
      for (Eigen::Index j = 0; j < t->cols(); ++j) (*t)(i, j) = r.f64();
  }
  const std::size_t dir_at = r.pos();
  const std::uint32_t ndir = r.u32(), dim = r.u32();
  if (ndir > kMaxCount || dim > kMaxCount) throw FormatError("implausible direction table", static_cast<long long>(dir_at));
  r.need(static_cast<std::size_t>(ndir) * dim * 8);
  for (std::uint32_t k = 0; k < ndir; ++k) {
    Eigen::VectorXd d(dim);
    for (std::uint32_t i = 0; i < dim; ++i) d(i) = r.f64();
    ck.model.class_directions.push_back(std::move(d));
  }
  if (r.remaining() != 0) throw FormatError("trailing bytes after checkpoint", static_cast<long long>(r.pos()));
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  write_file_atomic(path, encode_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw DataError("missing checkpoint " + path.string());
  return decode_checkpoint(read_file(path));
}

}  // namespace mhlora
