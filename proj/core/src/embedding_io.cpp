// Copyright 2026 The mhlora Authors
// SPDX-License-Identifier: Apache-2.0

#include "mhlora/embedding_io.hpp"

#include <charconv>
#include <vector>

#include "mhlora/errors.hpp"
#include "mhlora/fileio.hpp"

namespace mhlora {

namespace {

void append_double(std::string& out, double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  out.append(buf, res.ptr);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  for (auto& f : out) {
    while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.remove_prefix(1);
    while (!f.empty() && (f.back() == ' ' || f.back() == '\t' || f.back() == '\r')) f.remove_suffix(1);
  }
  return out;
}

template <class T>
T parse_number(std::string_view s, long long offset) {
  T v{};
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw FormatError("cannot parse '" + std::string(s) + "' as a number", offset);
  return v;
}

}  // namespace

std::string embeddings_to_csv(const EmbeddingSet& set) {
  if (set.labeled() && static_cast<int>(set.labels.size()) != set.size())
    throw DimensionError("label count does not match the number of embeddings");
  std::string out;
  if (set.labeled()) out += "label,";
  for (int j = 0; j < set.dim(); ++j) {
    if (j) out += ',';
    out += 'd' + std::to_string(j);
  }
  out += '\n';
  for (int i = 0; i < set.size(); ++i) {
    if (set.labeled()) out += std::to_string(set.labels[static_cast<std::size_t>(i)]) + ',';
    for (int j = 0; j < set.dim(); ++j) {
      if (j) out += ',';
      append_double(out, set.vectors(i, j));
    }
    out += '\n';
  }
  return out;
}

EmbeddingSet embeddings_from_csv(std::string_view text) {
  std::size_t pos = 0;
  auto next_line = [&](std::string_view& line, std::size_t& line_start) {
    while (pos < text.size()) {
      line_start = pos;
      const std::size_t nl = text.find('\n', pos);
      line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
      pos = nl == std::string_view::npos ? text.size() : nl + 1;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (!line.empty()) return true;
    }
    return false;
  };

  std::string_view line;
  std::size_t line_start = 0;
  if (!next_line(line, line_start)) throw FormatError("empty embedding file", 0);
  const auto header = split_fields(line);
  const bool labeled = !header.empty() && header.front() == "label";
  const std::size_t dim = header.size() - (labeled ? 1 : 0);
  if (dim == 0) throw FormatError("embedding header has no dimension columns", 0);

  std::vector<double> values;
  std::vector<int> labels;
  while (next_line(line, line_start)) {
    const auto fields = split_fields(line);
    const auto at = static_cast<long long>(line_start);
    if (fields.size() != header.size())
      throw FormatError("ragged row: expected " + std::to_string(header.size()) + " fields, got " +
                            std::to_string(fields.size()),
                        at);
    std::size_t k = 0;
    if (labeled) labels.push_back(parse_number<int>(fields[k++], at));
    for (; k < fields.size(); ++k) values.push_back(parse_number<double>(fields[k], at));
  }
  EmbeddingSet set;
  const auto rows = static_cast<Eigen::Index>(values.size() / dim);
  set.vectors.resize(rows, static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(dim); ++j)
      set.vectors(i, j) = values[static_cast<std::size_t>(i) * dim + static_cast<std::size_t>(j)];
  set.labels = std::move(labels);
  return set;
}

void export_embeddings(const std::filesystem::path& path, const EmbeddingSet& set) {
  write_file_atomic(path, embeddings_to_csv(set));
}

EmbeddingSet import_embeddings(const std::filesystem::path& path) {
  try {
    return embeddings_from_csv(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

EmbeddingSet concatenate(const EmbeddingSet& a, const EmbeddingSet& b) {
  if (a.size() > 0 && b.size() > 0 && a.dim() != b.dim())
    throw DimensionError("cannot concatenate embeddings of dimension " + std::to_string(a.dim()) + " and " +
                         std::to_string(b.dim()));
  if (a.size() > 0 && b.size() > 0 && a.labeled() != b.labeled())
    throw DataError("cannot concatenate labeled and unlabeled embeddings");
  if (a.size() == 0) return b;
  if (b.size() == 0) return a;
  EmbeddingSet out;
  out.vectors.resize(a.size() + b.size(), a.dim());
  out.vectors << a.vectors, b.vectors;
  out.labels = a.labels;
  out.labels.insert(out.labels.end(), b.labels.begin(), b.labels.end());
  return out;
}

}  // namespace mhlora
