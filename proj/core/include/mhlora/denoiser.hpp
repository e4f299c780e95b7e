// Copyright 2026 The mhlora Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mhlora/adapter.hpp"

namespace mhlora {

template <class T>
using MatX = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <class T>
using VecX = Eigen::Matrix<T, Eigen::Dynamic, 1>;

// Precision of network evaluation during training and sampling. Master
// weights and optimiser state stay in double.
using ComputeReal = float;

// Architecture of the toy class-conditional denoiser.
//
//   stem   : 3x3 conv, 1 -> C
//   cond   : SiLU(time_w * sinusoid(t) + time_b) + class_embed[y]
//   block  : u = conv3x3_d(h) + film_w * cond + pool_w * mean(h) + conv_b
//            p = proj1 * SiLU(u) + proj1_b        <- adapted
//            h = h + proj2 * SiLU(p) + proj2_b    <- adapted
//   head   : 3x3 conv, C -> 1, predicts the noise
//
// Block b convolves with dilation d = 2^(b mod 3). The two 1x1
// channel-mixing projections of every block are the adapted layers; layer
// index 2b is proj1 of block b and 2b+1 is proj2.
struct DenoiserConfig {
  int image_size = 16;
  int channels = 24;
  int blocks = 4;
  int time_dim = 16;
  int num_classes = 3;

  int pixels() const { return image_size * image_size; }
  int adapted_layers() const { return 2 * blocks; }
  int dilation(int block) const { return 1 << (block % 3); }
  void validate() const;

  friend bool operator==(const DenoiserConfig&, const DenoiserConfig&) = default;
};

// Every tensor is a matrix (biases are single columns) so optimisers,
// checksums and serialisers can walk them uniformly through tensors().
template <class T>
struct DenoiserWeights {
  struct Block {
    MatX<T> conv_w, conv_b, film_w, pool_w, proj1_w, proj1_b, proj2_w, proj2_b;
  };

  MatX<T> stem_w, stem_b;
  MatX<T> time_w, time_b;
  MatX<T> class_embed;  // row 0 is the null (unconditional) class
  std::vector<Block> blocks;
  MatX<T> head_w, head_b;

  static DenoiserWeights zeros(const DenoiserConfig& cfg);

  std::vector<MatX<T>*> tensors();
  std::vector<const MatX<T>*> tensors() const;

  template <class U>
  DenoiserWeights<U> cast() const {
    DenoiserWeights<U> out;
    out.stem_w = stem_w.template cast<U>();
    out.stem_b = stem_b.template cast<U>();
    out.time_w = time_w.template cast<U>();
    out.time_b = time_b.template cast<U>();
    out.class_embed = class_embed.template cast<U>();
    out.head_w = head_w.template cast<U>();
    out.head_b = head_b.template cast<U>();
    for (const Block& b : blocks) {
      out.blocks.push_back({b.conv_w.template cast<U>(), b.conv_b.template cast<U>(),
                            b.film_w.template cast<U>(), b.pool_w.template cast<U>(),
                            b.proj1_w.template cast<U>(), b.proj1_b.template cast<U>(),
                            b.proj2_w.template cast<U>(), b.proj2_b.template cast<U>()});
    }
    return out;
  }
};

// He-style Gaussian initialisation; the residual output projections start
// small so the untrained network is close to identity-plus-stem.
DenoiserWeights<double> init_weights(const DenoiserConfig& cfg, Rng& rng);

std::int64_t parameter_count(const DenoiserWeights<double>& w);

// FNV-1a over the raw bytes of every tensor.
std::uint64_t checksum(const DenoiserWeights<double>& w);

// Low-rank update attached to one adapted layer: y += scale * B (A x).
// A null A disables the layer's adapter.
template <class T>
struct LoraLayer {
  const MatX<T>* A = nullptr;
  const MatX<T>* B = nullptr;
  T scale = T(1);

  bool active() const { return A != nullptr && B != nullptr; }
};

template <class T>
struct LoraGrads {
  MatX<T> dA;
  MatX<T> dB;
};

// Class index used to select the null embedding row.
inline constexpr int kUnconditional = -1;

// One forward/backward evaluation of the denoiser. Holds the activations of
// the last forward call so backward() can reuse them.
template <class T>
class DenoiserPass {
 public:
  DenoiserPass(const DenoiserConfig& cfg, const DenoiserWeights<T>& weights);

  // x_t: noised image in [-1, 1] pixel space, row-major. class_id is 0-based
  // or kUnconditional. `lora` is empty or holds one entry per adapted layer.
  const VecX<T>& forward(const VecX<T>& x_t, int t, int class_id,
                         std::span<const LoraLayer<T>> lora = {});

  // Propagates dL/d(output). Base-weight gradients are accumulated into
  // `d_weights` when it is non-null; adapter gradients are accumulated into
  // `d_lora` (same indexing as `lora`, entries for inactive layers ignored;
  // empty matrices are zero-sized to the adapter shape first).
  void backward(const VecX<T>& d_out, DenoiserWeights<T>* d_weights,
                std::span<LoraGrads<T>> d_lora = {});

  const VecX<T>& output() const { return out_; }

 private:
  struct BlockCache {
    MatX<T> h_in, col, u, a, v1, p, q, v2;
    VecX<T> pool;
  };

  const DenoiserConfig& cfg_;
  const DenoiserWeights<T>& w_;
  std::vector<LoraLayer<T>> lora_;
  int class_row_ = 0;
  VecX<T> temb_, time_pre_, cond_;
  MatX<T> col0_, col_head_;
  std::vector<BlockCache> cache_;
  VecX<T> out_;
};

// Sinusoidal timestep embedding of the given even dimension.
template <class T>
VecX<T> timestep_embedding(int t, int dim);

// Trained base network. Its weights are the frozen theta during adapter
// training; class_directions hold one unit vector per class in embedding
// space (used by the score analog).
struct Denoiser {
  DenoiserConfig config;
  DenoiserWeights<double> weights;
  std::vector<Eigen::VectorXd> class_directions;
};

}  // namespace mhlora
