// Copyright 2026 The mhlora Authors
// SPDX-License-Identifier: Apache-2.0

#include "mhlora/training.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "mhlora/errors.hpp"

namespace mhlora {

Eigen::VectorXd to_model_space(const Image& img) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(img.size()));
  for (std::size_t i = 0; i < img.size(); ++i) x(static_cast<Eigen::Index>(i)) = 2.0 * img.pixels[i] - 1.0;
  return x;
}

Image from_model_space(const Eigen::VectorXd& x, int side) {
  if (x.size() != static_cast<Eigen::Index>(side) * side)
    throw DimensionError("vector does not describe a square image of the requested side");
  Image img(side, side);
  for (Eigen::Index i = 0; i < x.size(); ++i)
    img.pixels[static_cast<std::size_t>(i)] = std::clamp(0.5 * (x(i) + 1.0), 0.0, 1.0);
  return img;
}

std::vector<std::string> TrainConfig::validate() const {
  if (!(lr_A >= 0.0) || !(lr_B >= 0.0)) throw ParameterError("learning rates must be nonnegative");
  if (steps < 0 || batch < 1) throw ParameterError("steps must be >= 0 and batch >= 1");
  if (!(flip_prob >= 0.0 && flip_prob <= 1.0) || !(cond_drop_prob >= 0.0 && cond_drop_prob <= 1.0))
    throw ParameterError("probabilities must lie in [0, 1]");
  jitter.validate();
  std::vector<std::string> warnings;
  if (lr_A >= lr_B)
    warnings.push_back("lr_A >= lr_B: the shared adapter is usually trained with the lower rate");
  return warnings;
}

std::int64_t ClassAdapters::trainable_parameters() const {
  std::int64_t n = 0;
  for (const auto& l : layers) n += mhlora::trainable_parameters(l.shape);
  return n;
}

bool ClassAdapters::all_heads_zero() const {
  for (const auto& l : layers)
    if (!l.all_heads_zero()) return false;
  return true;
}

ClassAdapters new_class_adapters(const DenoiserConfig& cfg, int class_id, int rank, int heads,
                                 double init_std, std::uint64_t seed, double lora_scale) {
  ClassAdapters out;
  out.class_id = class_id;
  Rng rng(seed);
  const AdapterShape shape{cfg.channels, cfg.channels, rank, heads};
  for (int l = 0; l < cfg.adapted_layers(); ++l)
    out.layers.push_back(new_multi_head(shape, init_std, rng, lora_scale));
  return out;
}

MergedClassAdapters merge_class_adapters(const ClassAdapters& adapters, const MixtureWeights& w) {
  MergedClassAdapters m;
  m.class_id = adapters.class_id;
  for (const auto& l : adapters.layers) m.layers.push_back(merge_heads(l, w));
  return m;
}

std::vector<double> LossCurve::smoothed(int window) const {
  std::vector<double> out;
  if (window < 1) return out;
  for (std::size_t start = 0; start + static_cast<std::size_t>(window) <= values.size();
       start += static_cast<std::size_t>(window)) {
    double s = 0.0;
    for (int i = 0; i < window; ++i) s += values[start + static_cast<std::size_t>(i)];
    out.push_back(s / window);
  }
  return out;
}

namespace {

struct AdamState {
  Eigen::MatrixXd m, v;
  int step = 0;
};

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

void adamw_step(Eigen::MatrixXd& p, const Eigen::MatrixXd& g, AdamState& s, double lr,
                double weight_decay) {
  if (s.m.size() == 0) {
    s.m = Eigen::MatrixXd::Zero(p.rows(), p.cols());
    s.v = Eigen::MatrixXd::Zero(p.rows(), p.cols());
  }
  ++s.step;
  s.m = kBeta1 * s.m + (1.0 - kBeta1) * g;
  s.v = kBeta2 * s.v + (1.0 - kBeta2) * g.cwiseProduct(g);
  const double c1 = 1.0 - std::pow(kBeta1, s.step);
  const double c2 = 1.0 - std::pow(kBeta2, s.step);
  if (lr == 0.0) return;
  p *= 1.0 - lr * weight_decay;
  p.array() -= lr * (s.m.array() / c1) / ((s.v.array() / c2).sqrt() + kAdamEps);
}

double cosine_factor(int step, int total) {
  if (total <= 1) return 1.0;
  return 0.5 * (1.0 + std::cos(std::numbers::pi * step / total));
}

Eigen::VectorXd standard_normal(Eigen::Index n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(rng);
  return v;
}

}  // namespace

PretrainResult pretrain_base(std::span<const LabeledImage> corpus, const DenoiserConfig& cfg,
                             const NoiseSchedule& schedule, const PretrainConfig& pcfg,
                             const ProgressFn& progress) {
  cfg.validate();
  if (corpus.empty()) throw DataError("pretraining corpus is empty");
  if (pcfg.batch < 1 || pcfg.steps < 0) throw ParameterError("invalid pretraining schedule");
  for (const auto& item : corpus) {
    if (item.image.width != cfg.image_size || item.image.height != cfg.image_size)
      throw DataError("pretraining image does not match the model resolution");
    if (item.class_id < 0 || item.class_id >= cfg.num_classes)
      throw DataError("pretraining label out of range");
  }

  Rng rng(pcfg.seed);
  PretrainResult result;
  result.model.config = cfg;
  result.model.weights = init_weights(cfg, rng);
  auto& weights = result.model.weights;

  auto params = weights.tensors();
  std::vector<AdamState> states(params.size());
  auto grads = DenoiserWeights<ComputeReal>::zeros(cfg);
  auto grad_tensors = grads.tensors();

  std::uniform_int_distribution<std::size_t> pick(0, corpus.size() - 1);
  std::uniform_int_distribution<int> pick_t(0, schedule.steps() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Eigen::Index P = cfg.pixels();

  for (int step = 0; step < pcfg.steps; ++step) {
    for (auto* g : grad_tensors) g->setZero();
    double loss = 0.0;
    const auto compute_weights = weights.cast<ComputeReal>();
    DenoiserPass<ComputeReal> pass(cfg, compute_weights);
    for (int b = 0; b < pcfg.batch; ++b) {
      const LabeledImage& item = corpus[pick(rng)];
      const bool flip = unit(rng) < pcfg.flip_prob;
      const Eigen::VectorXd x0 = to_model_space(flip ? flip_horizontal(item.image) : item.image);
      const int t = pick_t(rng);
      const Eigen::VectorXd eps = standard_normal(P, rng);
      const int cls = unit(rng) < pcfg.cond_drop_prob ? kUnconditional : item.class_id;
      const double ab = schedule.alpha_bar(t);
      const VecX<ComputeReal> xt = (std::sqrt(ab) * x0 + std::sqrt(1.0 - ab) * eps).cast<ComputeReal>();
      const VecX<ComputeReal> diff = pass.forward(xt, t, cls) - eps.cast<ComputeReal>();
      loss += static_cast<double>(diff.squaredNorm());
      pass.backward(ComputeReal(2) * diff, &grads);
    }
    const double lr = pcfg.lr * cosine_factor(step, pcfg.steps);
    for (std::size_t i = 0; i < params.size(); ++i) {
      const Eigen::MatrixXd g = grad_tensors[i]->cast<double>() / pcfg.batch;
      adamw_step(*params[i], g, states[i], lr, pcfg.weight_decay);
    }
    const double mean_loss = loss / pcfg.batch;
    if (!std::isfinite(mean_loss)) throw NumericalError("pretraining loss diverged");
    result.curve.values.push_back(mean_loss);
    if (progress) progress(step, mean_loss);
  }
  return result;
}

Image augment_view(const LabeledImage& item, const TrainConfig& cfg, Rng& rng) {
  Image view = item.image;
  if (cfg.semantic_crop) {
    const CropSpec spec = sample_crop(item.image.width, item.image.height, item.box,
                                      item.image.width, item.image.height, cfg.jitter, rng);
    view = apply_crop(item.image, spec);
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (unit(rng) < cfg.flip_prob) view = flip_horizontal(view);
  return view;
}

template <class T>
T denoising_loss_and_grad(const DenoiserConfig& cfg, const DenoiserWeights<T>& weights,
                          std::span<const MatX<T>> a_mats, std::span<const MatX<T>> b_mats,
                          T lora_scale, const VecX<T>& x0, int t, int class_id,
                          const VecX<T>& eps, const NoiseSchedule& schedule,
                          std::vector<LoraGrads<T>>* d_lora, DenoiserWeights<T>* d_weights) {
  if (a_mats.size() != b_mats.size())
    throw DimensionError("A and B lists must have the same length");
  std::vector<LoraLayer<T>> lora;
  for (std::size_t l = 0; l < a_mats.size(); ++l) lora.push_back({&a_mats[l], &b_mats[l], lora_scale});

  const T ab = static_cast<T>(schedule.alpha_bar(t));
  const VecX<T> xt = std::sqrt(ab) * x0 + std::sqrt(T(1) - ab) * eps;
  DenoiserPass<T> pass(cfg, weights);
  const VecX<T> diff = pass.forward(xt, t, class_id, lora) - eps;
  const T loss = diff.squaredNorm();
  if (d_lora || d_weights) {
    if (d_lora && d_lora->size() != lora.size()) {
      d_lora->clear();
      for (std::size_t l = 0; l < lora.size(); ++l)
        d_lora->push_back({MatX<T>::Zero(a_mats[l].rows(), a_mats[l].cols()),
                           MatX<T>::Zero(b_mats[l].rows(), b_mats[l].cols())});
    }
    std::span<LoraGrads<T>> dl = d_lora ? std::span<LoraGrads<T>>(*d_lora) : std::span<LoraGrads<T>>();
    pass.backward(T(2) * diff, d_weights, dl);
  }
  return loss;
}

template float denoising_loss_and_grad<float>(const DenoiserConfig&, const DenoiserWeights<float>&,
                                              std::span<const MatX<float>>, std::span<const MatX<float>>,
                                              float, const VecX<float>&, int, int, const VecX<float>&,
                                              const NoiseSchedule&, std::vector<LoraGrads<float>>*,
                                              DenoiserWeights<float>*);
template double denoising_loss_and_grad<double>(
    const DenoiserConfig&, const DenoiserWeights<double>&, std::span<const MatX<double>>,
    std::span<const MatX<double>>, double, const VecX<double>&, int, int, const VecX<double>&,
    const NoiseSchedule&, std::vector<LoraGrads<double>>*, DenoiserWeights<double>*);
template long double denoising_loss_and_grad<long double>(
    const DenoiserConfig&, const DenoiserWeights<long double>&, std::span<const MatX<long double>>,
    std::span<const MatX<long double>>, long double, const VecX<long double>&, int, int,
    const VecX<long double>&, const NoiseSchedule&, std::vector<LoraGrads<long double>>*,
    DenoiserWeights<long double>*);

double per_image_loss(const Denoiser& model, const ClassAdapters& adapters, int head,
                      const LabeledImage& item, int t, const Eigen::VectorXd& eps,
                      const NoiseSchedule& schedule, const TrainConfig& cfg, Rng& crop_rng) {
  if (head < 0 || head >= adapters.num_heads()) throw DimensionError("head index out of range");
  if (static_cast<int>(adapters.layers.size()) != model.config.adapted_layers())
    throw DimensionError("adapter set does not match the model's adapted layers");
  std::vector<Eigen::MatrixXd> a, b;
  for (const auto& l : adapters.layers) {
    a.push_back(l.A.cast<double>());
    b.push_back(l.heads[static_cast<std::size_t>(head)].cast<double>());
  }
  const Image view = augment_view(item, cfg, crop_rng);
  const double scale = adapters.layers.empty() ? 1.0 : adapters.layers.front().lora_scale;
  return denoising_loss_and_grad<double>(model.config, model.weights, a, b, scale,
                                         to_model_space(view), t, item.class_id, eps, schedule,
                                         nullptr, nullptr);
}

double class_loss(int k, const std::function<double(int)>& per_image) {
  if (k < 1) throw ParameterError("class loss needs at least one image");
  double sum = 0.0;
  for (int i = 0; i < k; ++i) sum += per_image(i);
  return sum / k;
}

double class_loss(const Denoiser& model, const ClassAdapters& adapters,
                  std::span<const LabeledImage> few_shot, int t, const NoiseSchedule& schedule,
                  const TrainConfig& cfg, Rng& rng) {
  if (static_cast<int>(few_shot.size()) != adapters.num_heads())
    throw DimensionError("few-shot set size must equal the number of heads");
  return class_loss(adapters.num_heads(), [&](int i) {
    const Eigen::VectorXd eps = standard_normal(model.config.pixels(), rng);
    return per_image_loss(model, adapters, i, few_shot[static_cast<std::size_t>(i)], t, eps,
                          schedule, cfg, rng);
  });
}

namespace {

// Shared trainer: `head_of[j]` maps training image j to the head it trains.
AdapterTrainResult train_adapters(const Denoiser& model, std::span<const LabeledImage> items,
                                  const std::vector<int>& head_of, int heads, int rank,
                                  const NoiseSchedule& schedule, const TrainConfig& cfg,
                                  const ProgressFn& progress) {
  cfg.validate();
  if (items.empty()) throw DataError("adapter training set is empty");
  const int class_id = items.front().class_id;
  for (const auto& item : items)
    if (item.class_id != class_id) throw DataError("adapter training set mixes classes");

  const DenoiserConfig& mc = model.config;
  const double init_std = cfg.init_std > 0.0 ? cfg.init_std : default_init_std(rank);
  AdapterTrainResult result;
  result.adapters = new_class_adapters(mc, class_id, rank, heads, init_std, cfg.seed, cfg.lora_scale);

  const std::size_t L = result.adapters.layers.size();
  const auto H = static_cast<std::size_t>(heads);
  std::vector<Eigen::MatrixXd> A(L);
  std::vector<std::vector<Eigen::MatrixXd>> B(L, std::vector<Eigen::MatrixXd>(H));
  for (std::size_t l = 0; l < L; ++l) {
    A[l] = result.adapters.layers[l].A.cast<double>();
    for (std::size_t h = 0; h < H; ++h) B[l][h] = result.adapters.layers[l].heads[h].cast<double>();
  }
  std::vector<AdamState> state_a(L);
  std::vector<std::vector<AdamState>> state_b(L, std::vector<AdamState>(H));

  Rng rng(cfg.seed ^ 0x9E3779B97F4A7C15ULL);
  std::uniform_int_distribution<std::size_t> pick(0, items.size() - 1);
  std::uniform_int_distribution<int> pick_t(0, schedule.steps() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const auto compute_weights = model.weights.cast<ComputeReal>();
  std::vector<LoraGrads<ComputeReal>> sample_grads;
  std::vector<Eigen::MatrixXd> grad_a(L);
  std::vector<std::vector<Eigen::MatrixXd>> grad_b(L, std::vector<Eigen::MatrixXd>(H));
  std::vector<MatX<ComputeReal>> a_compute(L), b_active(L);

  for (int step = 0; step < cfg.steps; ++step) {
    std::vector<bool> touched(H, false);
    for (std::size_t l = 0; l < L; ++l) {
      grad_a[l] = Eigen::MatrixXd::Zero(A[l].rows(), A[l].cols());
      for (std::size_t h = 0; h < H; ++h) grad_b[l][h] = Eigen::MatrixXd::Zero(B[l][h].rows(), B[l][h].cols());
    }
    double loss = 0.0;
    for (std::size_t l = 0; l < L; ++l) a_compute[l] = A[l].cast<ComputeReal>();
    for (int s = 0; s < cfg.batch; ++s) {
      const std::size_t j = pick(rng);
      const auto h = static_cast<std::size_t>(head_of[j]);
      const int t = pick_t(rng);
      const Image view = augment_view(items[j], cfg, rng);
      const Eigen::VectorXd eps = standard_normal(mc.pixels(), rng);
      const int cls = (cfg.cond_drop_prob > 0.0 && unit(rng) < cfg.cond_drop_prob) ? kUnconditional
                                                                                   : class_id;
      for (std::size_t l = 0; l < L; ++l) b_active[l] = B[l][h].cast<ComputeReal>();
      sample_grads.clear();
      loss += static_cast<double>(denoising_loss_and_grad<ComputeReal>(
          mc, compute_weights, a_compute, b_active, static_cast<ComputeReal>(cfg.lora_scale),
          to_model_space(view).cast<ComputeReal>(), t, cls, eps.cast<ComputeReal>(), schedule,
          &sample_grads, nullptr));
      for (std::size_t l = 0; l < L; ++l) {
        grad_a[l] += sample_grads[l].dA.cast<double>();
        grad_b[l][h] += sample_grads[l].dB.cast<double>();
      }
      touched[h] = true;
    }
    const double factor = cosine_factor(step, cfg.steps);
    for (std::size_t l = 0; l < L; ++l) {
      grad_a[l] /= cfg.batch;
      adamw_step(A[l], grad_a[l], state_a[l], cfg.lr_A * factor, cfg.weight_decay);
      for (std::size_t h = 0; h < H; ++h) {
        if (!touched[h]) continue;
        grad_b[l][h] /= cfg.batch;
        adamw_step(B[l][h], grad_b[l][h], state_b[l][h], cfg.lr_B * factor, cfg.weight_decay);
      }
    }
    const double mean_loss = loss / cfg.batch;
    if (!std::isfinite(mean_loss)) throw NumericalError("adapter training loss diverged");
    result.curve.values.push_back(mean_loss);
    if (progress) progress(step, mean_loss);
  }

  for (std::size_t l = 0; l < L; ++l) {
    result.adapters.layers[l].A = A[l].cast<float>();
    for (std::size_t h = 0; h < H; ++h) result.adapters.layers[l].heads[h] = B[l][h].cast<float>();
  }
  return result;
}

}  // namespace

AdapterTrainResult train_multi_head(const Denoiser& model, std::span<const LabeledImage> few_shot,
                                    int rank, const NoiseSchedule& schedule,
                                    const TrainConfig& cfg, const ProgressFn& progress) {
  if (few_shot.empty()) throw DataError("few-shot set is empty");
  std::vector<int> head_of(few_shot.size());
  for (std::size_t i = 0; i < few_shot.size(); ++i) head_of[i] = static_cast<int>(i);
  return train_adapters(model, few_shot, head_of, static_cast<int>(few_shot.size()), rank, schedule,
                        cfg, progress);
}

AdapterTrainResult train_single_head(const Denoiser& model, std::span<const LabeledImage> subset,
                                     int rank, const NoiseSchedule& schedule,
                                     const TrainConfig& cfg, const ProgressFn& progress) {
  if (subset.empty()) throw DataError("single-head training subset is empty");
  std::vector<int> head_of(subset.size(), 0);
  return train_adapters(model, subset, head_of, 1, rank, schedule, cfg, progress);
}

}  // namespace mhlora
