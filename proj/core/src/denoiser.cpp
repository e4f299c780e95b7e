// Copyright 2026 The mhlora Authors
// SPDX-License-Identifier: Apache-2.0

#include "mhlora/denoiser.hpp"

#include <cmath>
#include <cstring>
#include <random>
#include <string>

#include "mhlora/errors.hpp"

namespace mhlora {

void DenoiserConfig::validate() const {
  if (image_size < 2) throw ParameterError("image_size must be at least 2");
  if (channels < 1 || blocks < 1) throw ParameterError("channels and blocks must be positive");
  if (time_dim < 2 || time_dim % 2 != 0) throw ParameterError("time_dim must be a positive even number");
  if (num_classes < 1) throw ParameterError("num_classes must be positive");
}

template <class T>
DenoiserWeights<T> DenoiserWeights<T>::zeros(const DenoiserConfig& cfg) {
  const int C = cfg.channels;
  DenoiserWeights w;
  w.stem_w = MatX<T>::Zero(C, 9);
  w.stem_b = MatX<T>::Zero(C, 1);
  w.time_w = MatX<T>::Zero(C, cfg.time_dim);
  w.time_b = MatX<T>::Zero(C, 1);
  w.class_embed = MatX<T>::Zero(cfg.num_classes + 1, C);
  for (int b = 0; b < cfg.blocks; ++b) {
    w.blocks.push_back({MatX<T>::Zero(C, 9 * C), MatX<T>::Zero(C, 1), MatX<T>::Zero(C, C),
                        MatX<T>::Zero(C, C), MatX<T>::Zero(C, C), MatX<T>::Zero(C, 1),
                        MatX<T>::Zero(C, C), MatX<T>::Zero(C, 1)});
  }
  w.head_w = MatX<T>::Zero(1, 9 * C);
  w.head_b = MatX<T>::Zero(1, 1);
  return w;
}

template <class T>
std::vector<MatX<T>*> DenoiserWeights<T>::tensors() {
  std::vector<MatX<T>*> out{&stem_w, &stem_b, &time_w, &time_b, &class_embed};
  for (Block& b : blocks) {
    for (MatX<T>* m : {&b.conv_w, &b.conv_b, &b.film_w, &b.pool_w, &b.proj1_w, &b.proj1_b,
                       &b.proj2_w, &b.proj2_b})
      out.push_back(m);
  }
  out.push_back(&head_w);
  out.push_back(&head_b);
  return out;
}

template <class T>
std::vector<const MatX<T>*> DenoiserWeights<T>::tensors() const {
  auto mut = const_cast<DenoiserWeights*>(this)->tensors();
  return {mut.begin(), mut.end()};
}

DenoiserWeights<double> init_weights(const DenoiserConfig& cfg, Rng& rng) {
  cfg.validate();
  const int C = cfg.channels;
  auto w = DenoiserWeights<double>::zeros(cfg);
  auto fill = [&rng](Eigen::MatrixXd& m, double stddev) {
    std::normal_distribution<double> n(0.0, stddev);
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = n(rng);
  };
  fill(w.stem_w, std::sqrt(2.0 / 9.0));
  fill(w.time_w, std::sqrt(1.0 / cfg.time_dim));
  fill(w.class_embed, 0.5);
  for (auto& b : w.blocks) {
    fill(b.conv_w, std::sqrt(2.0 / (9.0 * C)));
    fill(b.film_w, std::sqrt(1.0 / C));
    fill(b.pool_w, 0.5 * std::sqrt(1.0 / C));
    fill(b.proj1_w, std::sqrt(2.0 / C));
    fill(b.proj2_w, 0.1 * std::sqrt(1.0 / C));
  }
  fill(w.head_w, std::sqrt(1.0 / (9.0 * C)));
  return w;
}

std::int64_t parameter_count(const DenoiserWeights<double>& w) {
  std::int64_t n = 0;
  for (const auto* m : w.tensors()) n += m->size();
  return n;
}

std::uint64_t checksum(const DenoiserWeights<double>& w) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto* m : w.tensors()) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(m->data());
    const std::size_t n = static_cast<std::size_t>(m->size()) * sizeof(double);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ULL;
    }
  }
  return h;
}

template <class T>
VecX<T> timestep_embedding(int t, int dim) {
  const int half = dim / 2;
  VecX<T> e(dim);
  for (int k = 0; k < half; ++k) {
    const T freq = std::exp(-std::log(T(1000)) * T(k) / T(half));
    const T arg = T(t) * freq;
    e(k) = std::sin(arg);
    e(half + k) = std::cos(arg);
  }
  return e;
}

namespace {

template <class T>
T sigmoid(T x) {
  return T(1) / (T(1) + std::exp(-x));
}

template <class T>
MatX<T> silu(const MatX<T>& x) {
  return x.unaryExpr([](T v) { return v * sigmoid(v); });
}

// d silu / dx evaluated at the pre-activation x.
template <class T>
MatX<T> silu_grad(const MatX<T>& x) {
  return x.unaryExpr([](T v) {
    const T s = sigmoid(v);
    return s * (T(1) + v * (T(1) - s));
  });
}

// Dilated 3x3 neighbourhood unfolding with zero padding. Row k*C + c of the
// result holds channel c of the neighbour at offset
// (dy, dx) = dilation * (k / 3 - 1, k % 3 - 1).
template <class T>
MatX<T> im2col(const MatX<T>& h, int side, int dilation = 1) {
  const Eigen::Index C = h.rows();
  MatX<T> col = MatX<T>::Zero(9 * C, h.cols());
  for (int k = 0; k < 9; ++k) {
    const int dy = dilation * (k / 3 - 1);
    const int dx = dilation * (k % 3 - 1);
    for (int y = 0; y < side; ++y) {
      const int ny = y + dy;
      if (ny < 0 || ny >= side) continue;
      for (int x = 0; x < side; ++x) {
        const int nx = x + dx;
        if (nx < 0 || nx >= side) continue;
        col.block(k * C, y * side + x, C, 1) = h.col(ny * side + nx);
      }
    }
  }
  return col;
}

// Adjoint of im2col.
template <class T>
MatX<T> col2im(const MatX<T>& col, Eigen::Index channels, int side, int dilation = 1) {
  MatX<T> h = MatX<T>::Zero(channels, col.cols());
  for (int k = 0; k < 9; ++k) {
    const int dy = dilation * (k / 3 - 1);
    const int dx = dilation * (k % 3 - 1);
    for (int y = 0; y < side; ++y) {
      const int ny = y + dy;
      if (ny < 0 || ny >= side) continue;
      for (int x = 0; x < side; ++x) {
        const int nx = x + dx;
        if (nx < 0 || nx >= side) continue;
        h.col(ny * side + nx) += col.block(k * channels, y * side + x, channels, 1);
      }
    }
  }
  return h;
}

}  // namespace

template <class T>
DenoiserPass<T>::DenoiserPass(const DenoiserConfig& cfg, const DenoiserWeights<T>& weights)
    : cfg_(cfg), w_(weights) {}

template <class T>
const VecX<T>& DenoiserPass<T>::forward(const VecX<T>& x_t, int t, int class_id,
                                        std::span<const LoraLayer<T>> lora) {
  const int S = cfg_.image_size;
  const int P = cfg_.pixels();
  if (x_t.size() != P) throw DimensionError("denoiser input has wrong pixel count");
  if (!lora.empty() && static_cast<int>(lora.size()) != cfg_.adapted_layers())
    throw DimensionError("adapter list must cover every adapted layer");
  if (class_id < kUnconditional || class_id >= cfg_.num_classes)
    throw ParameterError("class id " + std::to_string(class_id) + " out of range");

  lora_.assign(lora.begin(), lora.end());
  class_row_ = class_id + 1;

  const MatX<T> x_row = x_t.transpose();
  col0_ = im2col<T>(x_row, S);
  MatX<T> h = w_.stem_w * col0_;
  h.colwise() += w_.stem_b.col(0);

  temb_ = timestep_embedding<T>(t, cfg_.time_dim);
  time_pre_ = w_.time_w * temb_ + w_.time_b.col(0);
  cond_ = silu<T>(time_pre_) + w_.class_embed.row(class_row_).transpose();

  cache_.resize(static_cast<std::size_t>(cfg_.blocks));
  for (int b = 0; b < cfg_.blocks; ++b) {
    const auto& bw = w_.blocks[static_cast<std::size_t>(b)];
    BlockCache& c = cache_[static_cast<std::size_t>(b)];
    c.h_in = h;
    c.col = im2col<T>(h, S, cfg_.dilation(b));
    c.pool = h.rowwise().mean();
    const VecX<T> shift = bw.film_w * cond_ + bw.pool_w * c.pool + bw.conv_b.col(0);
    c.u.noalias() = bw.conv_w * c.col;
    c.u.colwise() += shift;
    c.a = silu<T>(c.u);

    c.p.noalias() = bw.proj1_w * c.a;
    if (!lora_.empty() && lora_[2 * b].active()) {
      const auto& l = lora_[2 * b];
      c.v1.noalias() = *l.A * c.a;
      c.p.noalias() += l.scale * (*l.B * c.v1);
    }
    c.p.colwise() += bw.proj1_b.col(0);
    c.q = silu<T>(c.p);

    MatX<T> o = bw.proj2_w * c.q;
    if (!lora_.empty() && lora_[2 * b + 1].active()) {
      const auto& l = lora_[2 * b + 1];
      c.v2.noalias() = *l.A * c.q;
      o.noalias() += l.scale * (*l.B * c.v2);
    }
    o.colwise() += bw.proj2_b.col(0);
    h += o;
  }

  col_head_ = im2col<T>(h, S);
  out_ = (w_.head_w * col_head_).transpose();
  out_.array() += w_.head_b(0, 0);
  return out_;
}

template <class T>
void DenoiserPass<T>::backward(const VecX<T>& d_out, DenoiserWeights<T>* dw,
                               std::span<LoraGrads<T>> d_lora) {
  const int S = cfg_.image_size;
  const int C = cfg_.channels;
  const int P = cfg_.pixels();
  if (d_out.size() != P) throw DimensionError("output gradient has wrong pixel count");
  const bool want_lora = !lora_.empty() && !d_lora.empty();
  if (want_lora && d_lora.size() != lora_.size())
    throw DimensionError("adapter gradient list must match the adapter list");
  // Empty gradients start from zero; anything else must already have the
  // adapter's shape.
  for (std::size_t i = 0; want_lora && i < lora_.size(); ++i) {
    if (!lora_[i].active()) continue;
    auto& g = d_lora[i];
    const MatX<T>& A = *lora_[i].A;
    const MatX<T>& B = *lora_[i].B;
    if (g.dA.size() == 0) g.dA = MatX<T>::Zero(A.rows(), A.cols());
    if (g.dB.size() == 0) g.dB = MatX<T>::Zero(B.rows(), B.cols());
    if (g.dA.rows() != A.rows() || g.dA.cols() != A.cols() || g.dB.rows() != B.rows() || g.dB.cols() != B.cols())
      throw DimensionError("adapter gradient shape differs from the adapter");
  }

  const MatX<T> d_row = d_out.transpose();
  if (dw) {
    dw->head_w.noalias() += d_row * col_head_.transpose();
    dw->head_b(0, 0) += d_out.sum();
  }
  MatX<T> dh = col2im<T>(w_.head_w.transpose() * d_row, C, S);
  VecX<T> d_cond = VecX<T>::Zero(C);

  for (int b = cfg_.blocks - 1; b >= 0; --b) {
    const auto& bw = w_.blocks[static_cast<std::size_t>(b)];
    const BlockCache& c = cache_[static_cast<std::size_t>(b)];

    // Residual branch output: o = proj2 q + s B2 A2 q + proj2_b
    const MatX<T>& d_o = dh;
    MatX<T> d_q = bw.proj2_w.transpose() * d_o;
    if (dw) {
      auto& g = dw->blocks[static_cast<std::size_t>(b)];
      g.proj2_w.noalias() += d_o * c.q.transpose();
      g.proj2_b += d_o.rowwise().sum();
    }
    if (!lora_.empty() && lora_[2 * b + 1].active()) {
      const auto& l = lora_[2 * b + 1];
      const MatX<T> d_v2 = l.scale * (l.B->transpose() * d_o);
      if (want_lora) {
        auto& g = d_lora[2 * b + 1];
        g.dB.noalias() += l.scale * (d_o * c.v2.transpose());
        g.dA.noalias() += d_v2 * c.q.transpose();
      }
      d_q.noalias() += l.A->transpose() * d_v2;
    }

    const MatX<T> d_p = d_q.cwiseProduct(silu_grad<T>(c.p));
    MatX<T> d_a = bw.proj1_w.transpose() * d_p;
    if (dw) {
      auto& g = dw->blocks[static_cast<std::size_t>(b)];
      g.proj1_w.noalias() += d_p * c.a.transpose();
      g.proj1_b += d_p.rowwise().sum();
    }
    if (!lora_.empty() && lora_[2 * b].active()) {
      const auto& l = lora_[2 * b];
      const MatX<T> d_v1 = l.scale * (l.B->transpose() * d_p);
      if (want_lora) {
        auto& g = d_lora[2 * b];
        g.dB.noalias() += l.scale * (d_p * c.v1.transpose());
        g.dA.noalias() += d_v1 * c.a.transpose();
      }
      d_a.noalias() += l.A->transpose() * d_v1;
    }

    const MatX<T> d_u = d_a.cwiseProduct(silu_grad<T>(c.u));
    const VecX<T> d_shift = d_u.rowwise().sum();
    if (dw) {
      auto& g = dw->blocks[static_cast<std::size_t>(b)];
      g.conv_w.noalias() += d_u * c.col.transpose();
      g.conv_b += d_shift;
      g.film_w.noalias() += d_shift * cond_.transpose();
      g.pool_w.noalias() += d_shift * c.pool.transpose();
    }
    d_cond.noalias() += bw.film_w.transpose() * d_shift;
    const VecX<T> d_pool = bw.pool_w.transpose() * d_shift;

    MatX<T> dh_in = col2im<T>(bw.conv_w.transpose() * d_u, C, S, cfg_.dilation(b));
    dh_in.colwise() += d_pool / T(P);
    dh_in += d_o;  // skip connection
    dh = std::move(dh_in);
  }

  if (dw) {
    dw->stem_w.noalias() += dh * col0_.transpose();
    dw->stem_b += dh.rowwise().sum();
    dw->class_embed.row(class_row_) += d_cond.transpose();
    const VecX<T> d_pre = d_cond.cwiseProduct(silu_grad<T>(MatX<T>(time_pre_)).col(0));
    dw->time_w.noalias() += d_pre * temb_.transpose();
    dw->time_b += d_pre;
  }
}

template struct DenoiserWeights<float>;
template struct DenoiserWeights<double>;
template struct DenoiserWeights<long double>;
template class DenoiserPass<float>;
template class DenoiserPass<double>;
template class DenoiserPass<long double>;
template VecX<float> timestep_embedding<float>(int, int);
template VecX<double> timestep_embedding<double>(int, int);
template VecX<long double> timestep_embedding<long double>(int, int);

}  // namespace mhlora
