// Copyright 2026 The mhlora Authors
// SPDX-License-Identifier: Apache-2.0
//
// Independent reference implementations used only by tests. None of them
// calls into the library code they check.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace oracle {

using Ld = long double;
using LdMatrix = std::vector<std::vector<Ld>>;  // row-major, square

inline LdMatrix identity(std::size_t n) {
  LdMatrix m(n, std::vector<Ld>(n, 0.0L));
  for (std::size_t i = 0; i < n; ++i) m[i][i] = 1.0L;
  return m;
}

inline LdMatrix multiply(const LdMatrix& a, const LdMatrix& b) {
  const std::size_t n = a.size();
  LdMatrix c(n, std::vector<Ld>(n, 0.0L));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < n; ++j) c[i][j] += a[i][k] * b[k][j];
  return c;
}

// Cyclic Jacobi rotations on a symmetric matrix. Returns eigenvalues and
// fills `vectors` (columns) when non-null.
inline std::vector<Ld> jacobi_eigen(LdMatrix a, LdMatrix* vectors = nullptr) {
  const std::size_t n = a.size();
  LdMatrix v = identity(n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    Ld off = 0.0L;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-36L) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::fabs(a[p][q]) < 1e-300L) continue;
        const Ld theta = (a[q][q] - a[p][p]) / (2.0L * a[p][q]);
        const Ld t = (theta >= 0 ? 1.0L : -1.0L) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0L));
        const Ld c = 1.0L / std::sqrt(t * t + 1.0L);
        const Ld s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const Ld akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const Ld apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const Ld vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<Ld> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a[i][i];
  if (vectors) *vectors = std::move(v);
  return ev;
}

inline LdMatrix sqrt_psd(const LdMatrix& m) {
  LdMatrix v;
  const std::vector<Ld> ev = jacobi_eigen(m, &v);
  const std::size_t n = m.size();
  LdMatrix out(n, std::vector<Ld>(n, 0.0L));
  for (std::size_t k = 0; k < n; ++k) {
    const Ld r = std::sqrt(std::max(ev[k], 0.0L));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) out[i][j] += v[i][k] * r * v[j][k];
  }
  return out;
}

// Frechet distance between Gaussian fits of two row sets (N-1 covariance plus
// `shrink` on the diagonal), all in long double.
inline Ld frechet(const std::vector<std::vector<double>>& s1, const std::vector<std::vector<double>>& s2,
                  double shrink) {
  const std::size_t d = s1.front().size();
  auto fit = [&](const std::vector<std::vector<double>>& s, std::vector<Ld>& mean, LdMatrix& cov) {
    mean.assign(d, 0.0L);
    for (const auto& row : s)
      for (std::size_t j = 0; j < d; ++j) mean[j] += row[j];
    for (auto& m : mean) m /= static_cast<Ld>(s.size());
    cov.assign(d, std::vector<Ld>(d, 0.0L));
    for (const auto& row : s)
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) cov[i][j] += (row[i] - mean[i]) * (row[j] - mean[j]);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) cov[i][j] /= static_cast<Ld>(s.size() - 1);
      cov[i][i] += shrink;
    }
  };
  std::vector<Ld> m1, m2;
  LdMatrix c1, c2;
  fit(s1, m1, c1);
  fit(s2, m2, c2);
  const LdMatrix r1 = sqrt_psd(c1);
  const LdMatrix mid = multiply(multiply(r1, c2), r1);
  const std::vector<Ld> ev = jacobi_eigen(mid);
  Ld tr_sqrt = 0.0L, tr1 = 0.0L, tr2 = 0.0L, mean_sq = 0.0L;
  for (Ld e : ev) tr_sqrt += std::sqrt(std::max(e, 0.0L));
  for (std::size_t i = 0; i < d; ++i) {
    tr1 += c1[i][i];
    tr2 += c2[i][i];
    mean_sq += (m1[i] - m2[i]) * (m1[i] - m2[i]);
  }
  return std::max(mean_sq + tr1 + tr2 - 2.0L * tr_sqrt, 0.0L);
}

inline double cosine_distance(const std::vector<double>& u, const std::vector<double>& v) {
  if (u == v) return 0.0;
  double dot = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) dot += u[i] * v[i];
  return std::clamp(1.0 - dot, 0.0, 2.0);
}

inline double class_radius(const std::vector<std::vector<double>>& real) {
  std::vector<double> nn;
  for (std::size_t i = 0; i < real.size(); ++i) {
    double best = 2.0;
    for (std::size_t j = 0; j < real.size(); ++j)
      if (i != j) best = std::min(best, cosine_distance(real[i], real[j]));
    nn.push_back(best);
  }
  std::sort(nn.begin(), nn.end());
  const std::size_t n = nn.size();
  return n % 2 ? nn[n / 2] : 0.5 * (nn[n / 2 - 1] + nn[n / 2]);
}

inline double coverage(const std::vector<std::vector<double>>& anchor,
                       const std::vector<std::vector<double>>& other, double rho) {
  int hit = 0;
  for (const auto& a : anchor) {
    bool covered = false;
    for (const auto& o : other) covered = covered || cosine_distance(a, o) <= rho;
    hit += covered ? 1 : 0;
  }
  return static_cast<double>(hit) / static_cast<double>(anchor.size());
}

// Reader for the single-adapter record, written from the documented layout.
struct AdapterRecord {
  std::uint16_t version = 0;
  std::uint32_t d1 = 0, d2 = 0, r = 0, k = 0;
  double scale = 0.0;
  std::vector<float> a;                 // r * d2, row-major
  std::vector<std::vector<float>> b;    // k blocks of d1 * r, row-major
};

inline std::uint64_t read_le(std::string_view bytes, std::size_t& pos, int width) {
  if (pos + static_cast<std::size_t>(width) > bytes.size()) throw std::runtime_error("truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i)
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[pos + static_cast<std::size_t>(i)])) << (8 * i);
  pos += static_cast<std::size_t>(width);
  return v;
}

inline AdapterRecord read_adapter_record(std::string_view bytes) {
  if (bytes.substr(0, 4) != "CHLA") throw std::runtime_error("magic");
  std::size_t pos = 4;
  AdapterRecord rec;
  rec.version = static_cast<std::uint16_t>(read_le(bytes, pos, 2));
  rec.d1 = static_cast<std::uint32_t>(read_le(bytes, pos, 4));
  rec.d2 = static_cast<std::uint32_t>(read_le(bytes, pos, 4));
  rec.r = static_cast<std::uint32_t>(read_le(bytes, pos, 4));
  rec.k = static_cast<std::uint32_t>(read_le(bytes, pos, 4));
  const std::uint64_t scale_bits = read_le(bytes, pos, 8);
  std::memcpy(&rec.scale, &scale_bits, sizeof rec.scale);
  auto read_f32 = [&] {
    const auto bits = static_cast<std::uint32_t>(read_le(bytes, pos, 4));
    float f;
    std::memcpy(&f, &bits, sizeof f);
    return f;
  };
  for (std::uint32_t i = 0; i < rec.r * rec.d2; ++i) rec.a.push_back(read_f32());
  for (std::uint32_t h = 0; h < rec.k; ++h) {
    rec.b.emplace_back();
    for (std::uint32_t i = 0; i < rec.d1 * rec.r; ++i) rec.b.back().push_back(read_f32());
  }
  if (pos != bytes.size()) throw std::runtime_error("trailing bytes");
  return rec;
}

// Per-coordinate mean and variance of the symmetric Dirichlet(alpha * 1_K).
inline double dirichlet_mean(int k) { return 1.0 / k; }
inline double dirichlet_variance(int k, double alpha) {
  const double a0 = k * alpha;
  const double ai = alpha;
  return ai * (a0 - ai) / (a0 * a0 * (a0 + 1.0));
}

}  // namespace oracle
