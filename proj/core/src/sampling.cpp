// Copyright 2026 The mhlora Authors
// SPDX-License-Identifier: Apache-2.0

#include "mhlora/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <exception>
#include <thread>

#include "mhlora/errors.hpp"

namespace mhlora {

void SamplerConfig::validate(const NoiseSchedule& schedule) const {
  if (!(guidance >= 0.0) || !std::isfinite(guidance))
    throw ParameterError("guidance scale must be nonnegative");
  if (steps < 1 || steps > schedule.steps())
    throw ParameterError("sampling steps must lie in [1, T]");
}

Eigen::VectorXd guided_epsilon(const Eigen::VectorXd& eps_cond, const Eigen::VectorXd& eps_uncond,
                               double guidance) {
  return (1.0 - guidance) * eps_uncond + guidance * eps_cond;
}

namespace {

// Network weights and merged adapters converted once to compute precision.
class NoisePredictor {
 public:
  NoisePredictor(const Denoiser& model, const MergedClassAdapters* adapters)
      : config_(model.config), weights_(model.weights.cast<ComputeReal>()) {
    if (!adapters) return;
    for (const auto& l : adapters->layers) {
      a_.push_back(l.A.cast<ComputeReal>());
      b_.push_back(l.B_prime.cast<ComputeReal>());
      scale_.push_back(static_cast<ComputeReal>(l.lora_scale));
    }
    for (std::size_t i = 0; i < a_.size(); ++i) views_.push_back({&a_[i], &b_[i], scale_[i]});
  }

  Eigen::VectorXd operator()(const Eigen::VectorXd& x_t, int t, int class_id, double guidance) {
    DenoiserPass<ComputeReal> pass(config_, weights_);
    const VecX<ComputeReal> x = x_t.cast<ComputeReal>();
    const Eigen::VectorXd eps_c = pass.forward(x, t, class_id, views_).template cast<double>();
    if (guidance == 1.0) return eps_c;
    const Eigen::VectorXd eps_u = pass.forward(x, t, kUnconditional, views_).template cast<double>();
    return guided_epsilon(eps_c, eps_u, guidance);
  }

 private:
  const DenoiserConfig& config_;
  DenoiserWeights<ComputeReal> weights_;
  std::vector<MatX<ComputeReal>> a_, b_;
  std::vector<ComputeReal> scale_;
  std::vector<LoraLayer<ComputeReal>> views_;
};

}  // namespace

Eigen::VectorXd predict_noise(const Denoiser& model, const Eigen::VectorXd& x_t, int t,
                              int class_id, const MergedClassAdapters* adapters, double guidance) {
  NoisePredictor predict(model, adapters);
  return predict(x_t, t, class_id, guidance);
}

Image generate(const Denoiser& model, const NoiseSchedule& schedule, int class_id,
               const MergedClassAdapters* adapters, const SamplerConfig& cfg, Rng& rng) {
  cfg.validate(schedule);
  if (adapters && static_cast<int>(adapters->layers.size()) != model.config.adapted_layers())
    throw DimensionError("merged adapters do not cover the model's adapted layers");

  const Eigen::Index P = model.config.pixels();
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd x(P);
  for (Eigen::Index i = 0; i < P; ++i) x(i) = normal(rng);

  NoisePredictor predict(model, adapters);
  const std::vector<int> ts = schedule.respaced(cfg.steps);
  for (int s = static_cast<int>(ts.size()) - 1; s >= 0; --s) {
    const int t = ts[static_cast<std::size_t>(s)];
    const double ab = schedule.alpha_bar(t);
    const double ab_prev = s > 0 ? schedule.alpha_bar(ts[static_cast<std::size_t>(s - 1)]) : 1.0;
    const double beta = 1.0 - ab / ab_prev;

    const Eigen::VectorXd eps = predict(x, t, class_id, cfg.guidance);
    Eigen::VectorXd x0 = (x - std::sqrt(1.0 - ab) * eps) / std::sqrt(ab);
    if (cfg.clip_denoised) x0 = x0.cwiseMax(-1.0).cwiseMin(1.0);

    // Posterior q(x_{prev} | x_t, x0).
    const double coef_x0 = std::sqrt(ab_prev) * beta / (1.0 - ab);
    const double coef_xt = std::sqrt(1.0 - beta) * (1.0 - ab_prev) / (1.0 - ab);
    Eigen::VectorXd mean = coef_x0 * x0 + coef_xt * x;
    if (s > 0) {
      const double var = beta * (1.0 - ab_prev) / (1.0 - ab);
      const double sd = std::sqrt(std::max(var, 0.0));
      for (Eigen::Index i = 0; i < P; ++i) mean(i) += sd * normal(rng);
    }
    x = std::move(mean);
  }
  return from_model_space(x, model.config.image_size);
}

std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::kMultiHead: return "multi";
    case Regime::kImageWise: return "image";
    case Regime::kClassWise: return "class";
    case Regime::kBase: return "base";
  }
  return "multi";
}

Regime parse_regime(std::string_view name) {
  if (name == "multi") return Regime::kMultiHead;
  if (name == "image") return Regime::kImageWise;
  if (name == "class") return Regime::kClassWise;
  if (name == "base") return Regime::kBase;
  throw ParameterError("unknown regime '" + std::string(name) + "'");
}

std::uint64_t image_seed(std::uint64_t base, int class_id, int index) {
  // splitmix64 finaliser over the packed coordinates.
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(class_id) * 1000003ULL +
                                                    static_cast<std::uint64_t>(index) + 1ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

void check_bank(const AdapterBank& bank) {
  switch (bank.regime) {
    case Regime::kBase:
      break;
    case Regime::kImageWise:
      if (bank.sets.empty()) throw DataError("image-wise bank has no adapters");
      for (const auto& s : bank.sets)
        if (s.num_heads() != 1) throw DataError("image-wise adapters must have one head");
      break;
    case Regime::kClassWise:
      if (bank.sets.size() != 1 || bank.sets[0].num_heads() != 1)
        throw DataError("class-wise bank must hold exactly one single-head adapter");
      break;
    case Regime::kMultiHead:
      if (bank.sets.size() != 1) throw DataError("multi-head bank must hold exactly one adapter set");
      break;
  }
}

std::optional<MergedClassAdapters> merged_for(const AdapterBank& bank, const GenerationRecord& rec) {
  switch (bank.regime) {
    case Regime::kBase:
      return std::nullopt;
    case Regime::kMultiHead:
      return merge_class_adapters(bank.sets[0], MixtureWeights(rec.weights));
    case Regime::kImageWise:
      if (rec.adapter_index < 0 || rec.adapter_index >= static_cast<int>(bank.sets.size()))
        throw DataError("record refers to a missing image-wise adapter");
      return merge_class_adapters(bank.sets[static_cast<std::size_t>(rec.adapter_index)],
                                  MixtureWeights::uniform(1));
    case Regime::kClassWise:
      return merge_class_adapters(bank.sets[0], MixtureWeights::uniform(1));
  }
  return std::nullopt;
}

}  // namespace

Image replay(const Denoiser& model, const NoiseSchedule& schedule, const AdapterBank& bank,
             const GenerationRecord& record) {
  check_bank(bank);
  if (record.regime != bank.regime) throw DataError("record regime does not match the adapters");
  const auto merged = merged_for(bank, record);
  Rng rng(record.seed);
  SamplerConfig sc;
  sc.guidance = record.guidance;
  sc.steps = record.steps;
  return generate(model, schedule, record.class_id, merged ? &*merged : nullptr, sc, rng);
}

GenerationResult generate_dataset(const Denoiser& model, const NoiseSchedule& schedule,
                                  const AdapterBank& bank, const GenerationRequest& request) {
  check_bank(bank);
  request.sampler.validate(schedule);
  if (request.count < 0) throw ParameterError("image count must be nonnegative");

  GenerationResult result;
  if (bank.regime != Regime::kBase) {
    bool all_zero = true;
    for (const auto& s : bank.sets) all_zero = all_zero && s.all_heads_zero();
    if (all_zero)
      result.warnings.push_back("all adapter heads are zero; output equals the base model");
  }

  // Mixtures are drawn sequentially from one stream so they do not depend on
  // the worker count.
  Rng mix_rng(request.seed ^ (0xA5A5A5A5ULL + static_cast<std::uint64_t>(bank.class_id)));
  std::optional<MixtureSampler> sampler;
  if (bank.regime == Regime::kMultiHead) {
    DirichletConfig dc = request.mixture;
    dc.k = bank.sets[0].num_heads();
    sampler.emplace(dc);
  }
  std::vector<GenerationRecord> records(static_cast<std::size_t>(request.count));
  for (int i = 0; i < request.count; ++i) {
    GenerationRecord& rec = records[static_cast<std::size_t>(i)];
    rec.class_id = bank.class_id;
    rec.index = i;
    rec.seed = image_seed(request.seed, bank.class_id, i);
    rec.regime = bank.regime;
    rec.guidance = request.sampler.guidance;
    rec.steps = request.sampler.steps;
    if (sampler) rec.weights = sampler->sample(mix_rng).values();
    if (bank.regime == Regime::kImageWise) {
      std::uniform_int_distribution<int> pick(0, static_cast<int>(bank.sets.size()) - 1);
      rec.adapter_index = pick(mix_rng);
    }
  }

  result.images.resize(records.size());
  const int jobs = std::max(1, std::min(request.jobs, std::max(1, request.count)));
  std::vector<std::exception_ptr> failures(static_cast<std::size_t>(jobs));
  auto work = [&](int worker) {
    try {
      for (int i = worker; i < request.count; i += jobs) {
        auto& out = result.images[static_cast<std::size_t>(i)];
        out.record = records[static_cast<std::size_t>(i)];
        out.image = replay(model, schedule, bank, out.record);
      }
    } catch (...) {
      failures[static_cast<std::size_t>(worker)] = std::current_exception();
    }
  };
  if (jobs == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < jobs; ++w) pool.emplace_back(work, w);
  }
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);
  return result;
}

}  // namespace mhlora
