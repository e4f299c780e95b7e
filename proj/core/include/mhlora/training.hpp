// Copyright 2026 The mhlora Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mhlora/adapter.hpp"
#include "mhlora/crop.hpp"
#include "mhlora/denoiser.hpp"
#include "mhlora/image.hpp"
#include "mhlora/schedule.hpp"

namespace mhlora {

// One labelled training image together with its class enclosing box.
struct LabeledImage {
  Image image;
  int class_id = 0;
  Box box{0, 0, 1, 1};
};

// Pixel intensities [0, 1] <-> model space [-1, 1].
Eigen::VectorXd to_model_space(const Image& img);
Image from_model_space(const Eigen::VectorXd& x, int side);

struct PretrainConfig {
  double lr = 2e-3;
  double weight_decay = 1e-4;
  int steps = 3000;
  int batch = 16;
  double flip_prob = 0.5;
  double cond_drop_prob = 0.1;
  std::uint64_t seed = 0;
};

// Adapter fine-tuning hyper-parameters. A learns slower than the heads.
struct TrainConfig {
  double lr_A = 1e-4;
  double lr_B = 1e-3;
  double weight_decay = 0.0;
  int steps = 600;
  int batch = 8;
  double flip_prob = 0.5;
  double cond_drop_prob = 0.0;  // classifier-free dropout is a pretraining-only knob
  bool semantic_crop = true;
  JitterParams jitter;
  double lora_scale = 1.0;
  double init_std = 0.0;  // <= 0 selects 1/rank
  std::uint64_t seed = 0;

  // Returns human-readable warnings (lr_A >= lr_B, ...). Throws on invalid
  // values.
  std::vector<std::string> validate() const;
};

// Adapters of one class: one MultiHeadAdapter per adapted layer, all sharing
// the same head count.
struct ClassAdapters {
  int class_id = 0;
  std::vector<MultiHeadAdapter> layers;

  int num_heads() const { return layers.empty() ? 0 : layers.front().num_heads(); }
  int rank() const { return layers.empty() ? 0 : layers.front().rank(); }
  std::int64_t trainable_parameters() const;
  bool all_heads_zero() const;
};

ClassAdapters new_class_adapters(const DenoiserConfig& cfg, int class_id, int rank, int heads,
                                 double init_std, std::uint64_t seed, double lora_scale = 1.0);

// Per-layer merged snapshot used for generation.
struct MergedClassAdapters {
  int class_id = 0;
  std::vector<MergedAdapter> layers;
};

MergedClassAdapters merge_class_adapters(const ClassAdapters& adapters, const MixtureWeights& w);

struct LossCurve {
  std::vector<double> values;

  // Moving average over `window` consecutive entries (non-overlapping).
  std::vector<double> smoothed(int window) const;
};

struct PretrainResult {
  Denoiser model;
  LossCurve curve;
};

using ProgressFn = std::function<void(int step, double loss)>;

// Trains the base network on the broad corpus with the epsilon-prediction
// objective; conditioning is dropped with cond_drop_prob to enable guidance.
PretrainResult pretrain_base(std::span<const LabeledImage> corpus, const DenoiserConfig& cfg,
                             const NoiseSchedule& schedule, const PretrainConfig& pcfg,
                             const ProgressFn& progress = {});

// Augmented view f_aug(x): semantic crop (when enabled) followed by a random
// horizontal flip.
Image augment_view(const LabeledImage& item, const TrainConfig& cfg, Rng& rng);

// ||eps - eps_hat(z_t, t, y)||^2 with `head` of every layer active. The view
// is produced by augment_view() from `crop_rng`.
double per_image_loss(const Denoiser& model, const ClassAdapters& adapters, int head,
                      const LabeledImage& item, int t, const Eigen::VectorXd& eps,
                      const NoiseSchedule& schedule, const TrainConfig& cfg, Rng& crop_rng);

// Loss and gradients in scalar type T for an already augmented view, with
// adapter matrices supplied directly (so finite-difference checks can perturb
// them in extended precision). `a_mats[l]`/`b_mats[l]` are A and the active
// head of layer l. Base-weight gradients are written to `d_weights` when
// non-null.
template <class T>
T denoising_loss_and_grad(const DenoiserConfig& cfg, const DenoiserWeights<T>& weights,
                          std::span<const MatX<T>> a_mats, std::span<const MatX<T>> b_mats,
                          T lora_scale, const VecX<T>& x0, int t, int class_id,
                          const VecX<T>& eps, const NoiseSchedule& schedule,
                          std::vector<LoraGrads<T>>* d_lora, DenoiserWeights<T>* d_weights);

// Mean of per-image losses over the K heads.
double class_loss(int k, const std::function<double(int)>& per_image);

// Average over the few-shot set with a shared timestep and fresh noise/view per image.
double class_loss(const Denoiser& model, const ClassAdapters& adapters,
                  std::span<const LabeledImage> few_shot, int t, const NoiseSchedule& schedule,
                  const TrainConfig& cfg, Rng& rng);

struct AdapterTrainResult {
  ClassAdapters adapters;
  LossCurve curve;
};

// Joint training of the shared A and all heads: every sample draws an image
// index i uniformly and back-propagates through head i; A moves at lr_A and
// the sampled heads at lr_B.
AdapterTrainResult train_multi_head(const Denoiser& model, std::span<const LabeledImage> few_shot,
                                    int rank, const NoiseSchedule& schedule,
                                    const TrainConfig& cfg, const ProgressFn& progress = {});

// One (A, B) pair trained on the subset: a single image gives the image-wise
// regime, all K images the class-wise regime.
AdapterTrainResult train_single_head(const Denoiser& model, std::span<const LabeledImage> subset,
                                     int rank, const NoiseSchedule& schedule,
                                     const TrainConfig& cfg, const ProgressFn& progress = {});

}  // namespace mhlora
