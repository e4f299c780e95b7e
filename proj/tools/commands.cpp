// Copyright 2026 The mhlora Authors
// SPDX-License-Identifier: Apache-2.0

#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "mhlora/adapter_io.hpp"
#include "mhlora/checkpoint.hpp"
#include "mhlora/corpus.hpp"
#include "mhlora/crop.hpp"
#include "mhlora/embedder.hpp"
#include "mhlora/embedding_io.hpp"
#include "mhlora/errors.hpp"
#include "mhlora/fileio.hpp"
#include "mhlora/metrics.hpp"
#include "mhlora/pgm.hpp"
#include "mhlora/probe.hpp"
#include "mhlora/sampling.hpp"
#include "mhlora/training.hpp"
#include "report.hpp"
#include "run_manifest.hpp"

namespace mhlora::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

// Bad invocation or missing input; exit code 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

struct Context {
  std::ostream& out;
  std::ostream& err;
  RunManifest manifest;
  fs::path manifest_path;
};

void require_file(const fs::path& p, const std::string& what) {
  if (!fs::is_regular_file(p)) throw UsageError("missing " + what + " '" + p.string() + "'");
}

Split parse_split_flag(const std::string& name) {
  try {
    return parse_split(name);
  } catch (const FormatError&) {
    throw UsageError("unknown split '" + name + "'");
  }
}

CropReference parse_reference(const std::string& s) {
  if (s == "box") return CropReference::kBox;
  if (s == "image") return CropReference::kImage;
  throw UsageError("crop reference must be 'box' or 'image'");
}

std::string reference_name(CropReference r) { return r == CropReference::kBox ? "box" : "image"; }

int class_index(const DatasetManifest& m, const std::string& name) {
  const auto it = std::find(m.classes.begin(), m.classes.end(), name);
  if (it == m.classes.end()) throw UsageError("unknown class '" + name + "'");
  return static_cast<int>(it - m.classes.begin());
}

bool has_split(const DatasetManifest& m, Split s) {
  return std::any_of(m.items.begin(), m.items.end(), [&](const ManifestItem& it) { return it.split == s; });
}

// Resolves --classes. Empty or "all" selects every class with items in
// `split` (every declared class when split is unset); "tail" selects classes
// holding tail items.
std::vector<int> select_classes(const DatasetManifest& m, const std::vector<std::string>& names,
                                std::optional<Split> split) {
  std::vector<int> ids;
  auto with_split = [&](Split s) {
    for (int c = 0; c < static_cast<int>(m.classes.size()); ++c)
      if (m.count(c, s) > 0) ids.push_back(c);
  };
  if (names.empty() || (names.size() == 1 && names[0] == "all")) {
    if (split) {
      with_split(*split);
    } else {
      for (int c = 0; c < static_cast<int>(m.classes.size()); ++c) ids.push_back(c);
    }
  } else if (names.size() == 1 && names[0] == "tail") {
    with_split(Split::kTail);
  } else {
    for (const auto& n : names) ids.push_back(class_index(m, n));
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  if (ids.empty()) throw UsageError("no classes selected");
  return ids;
}

std::string bank_file_name(const std::string& class_name, Regime r) {
  return class_name + "." + std::string(to_string(r)) + ".chlb";
}

Checkpoint load_checkpoint_checked(const fs::path& p) {
  require_file(p, "checkpoint");
  return load_checkpoint(p);
}

Corpus load_corpus_checked(const fs::path& p) {
  require_file(p, "corpus manifest");
  return load_corpus(p);
}

void write_loss_csv(const fs::path& p, const LossCurve& curve) {
  std::string s = "step,loss\n";
  char buf[64];
  for (std::size_t i = 0; i < curve.values.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.9g\n", i, curve.values[i]);
    s += buf;
  }
  write_file_atomic(p, s);
}

ojson train_config_json(const TrainConfig& c) {
  ojson j;
  j["lr_a"] = c.lr_A;
  j["lr_b"] = c.lr_B;
  j["weight_decay"] = c.weight_decay;
  j["steps"] = c.steps;
  j["batch"] = c.batch;
  j["flip_prob"] = c.flip_prob;
  j["semantic_crop"] = c.semantic_crop;
  j["crop_reference"] = reference_name(c.jitter.reference);
  j["scale_min"] = c.jitter.scale_min;
  j["scale_max"] = c.jitter.scale_max;
  j["max_translate"] = c.jitter.max_translate;
  j["isotropic"] = c.jitter.isotropic;
  j["lora_scale"] = c.lora_scale;
  j["init_std"] = c.init_std;
  return j;
}

// ---------------------------------------------------------------- gen-toy

struct GenToyOptions {
  fs::path out;
  int classes = 3;
  int per_class = 54;
  int size = 16;
  std::string style = "target";
  std::string split = "fewshot";
  int shots = 4;
  int test_per_class = 50;
  int head_budget = 500;
};

void cmd_gen_toy(const GenToyOptions& o, Context& ctx) {
  ToyStyle style;
  if (o.style == "target") style = ToyStyle::kTarget;
  else if (o.style == "broad") style = ToyStyle::kBroad;
  else throw UsageError("style must be 'target' or 'broad'");

  Corpus corpus = generate_toy_corpus(o.classes, o.per_class, o.size, ctx.manifest.seed, style);
  if (o.split == "fewshot") {
    make_fewshot_split(corpus.manifest, o.shots);
  } else if (o.split == "pretrain") {
    tag_all(corpus.manifest, Split::kPretrain);
  } else if (o.split == "longtail") {
    // The last test_per_class items of every class are held out first.
    if (o.test_per_class < 1 || o.test_per_class >= o.per_class)
      throw UsageError("--test-per-class must lie in [1, per-class)");
    std::map<int, int> seen;
    for (auto& it : corpus.manifest.items)
      if (++seen[it.class_id] > o.per_class - o.test_per_class) it.split = Split::kTest;
    corpus.manifest = make_longtail_split(corpus.manifest, o.head_budget, o.shots, ctx.manifest.seed);
  } else if (o.split != "none") {
    throw UsageError("split must be one of none, pretrain, fewshot, longtail");
  }
  save_corpus(o.out, corpus);

  auto& c = ctx.manifest.config;
  c["out"] = o.out.generic_string();
  c["classes"] = o.classes;
  c["per_class"] = o.per_class;
  c["size"] = o.size;
  c["style"] = o.style;
  c["split"] = o.split;
  c["shots"] = o.shots;
  c["test_per_class"] = o.test_per_class;
  c["head_budget"] = o.head_budget;
  ctx.manifest.outputs = {o.out / "manifest.json", o.out / "images"};
  if (ctx.manifest_path.empty()) ctx.manifest_path = o.out / "run_manifest.json";
  ctx.out << "wrote " << corpus.manifest.items.size() << " images of " << o.classes << " classes to "
          << o.out.string() << "\n";
}

// ---------------------------------------------------------------- pretrain

struct PretrainOptions {
  fs::path corpus;
  fs::path out;
  std::string split = "pretrain";
  PretrainConfig cfg;
  DenoiserConfig model;
  int timesteps = 200;
  fs::path loss_log;
};

void cmd_pretrain(PretrainOptions o, Context& ctx) {
  const Corpus corpus = load_corpus_checked(o.corpus);
  const Split split = parse_split_flag(o.split);
  const std::vector<LabeledImage> items = corpus.labeled(split);
  if (items.empty()) throw DataError("corpus has no items in split '" + o.split + "'");
  o.model.num_classes = static_cast<int>(corpus.manifest.classes.size());
  o.model.image_size = items.front().image.width;
  o.cfg.seed = ctx.manifest.seed;

  const NoiseSchedule schedule = NoiseSchedule::scaled_linear(o.timesteps);
  PretrainResult res = pretrain_base(items, o.model, schedule, o.cfg, [&](int step, double loss) {
    if (step % 500 == 0) ctx.err << "pretrain step " << step << " loss " << loss << "\n";
  });

  const ToyEmbedder embedder(o.model.image_size);
  std::vector<Image> images;
  std::vector<int> labels;
  for (const auto& it : items) {
    images.push_back(it.image);
    labels.push_back(it.class_id);
  }
  res.model.class_directions = class_directions(embedder, images, labels, o.model.num_classes);

  Checkpoint ck{std::move(res.model), schedule};
  save_checkpoint(o.out, ck);
  const fs::path loss_path = o.loss_log.empty() ? fs::path(o.out.string() + ".loss.csv") : o.loss_log;
  write_loss_csv(loss_path, res.curve);

  auto& c = ctx.manifest.config;
  c["corpus"] = o.corpus.generic_string();
  c["out"] = o.out.generic_string();
  c["split"] = o.split;
  c["steps"] = o.cfg.steps;
  c["batch"] = o.cfg.batch;
  c["lr"] = o.cfg.lr;
  c["weight_decay"] = o.cfg.weight_decay;
  c["flip_prob"] = o.cfg.flip_prob;
  c["cond_drop_prob"] = o.cfg.cond_drop_prob;
  c["timesteps"] = o.timesteps;
  c["schedule"] = "scaled_linear";
  c["model"] = {{"image_size", o.model.image_size},
                {"channels", o.model.channels},
                {"blocks", o.model.blocks},
                {"time_dim", o.model.time_dim},
                {"num_classes", o.model.num_classes}};
  ctx.manifest.inputs = {o.corpus};
  ctx.manifest.outputs = {o.out, loss_path};
  if (ctx.manifest_path.empty()) ctx.manifest_path = o.out.string() + ".manifest.json";
  const auto sm = res.curve.smoothed(100);
  if (!sm.empty())
    ctx.out << "pretrained " << o.cfg.steps << " steps, smoothed loss " << sm.front() << " -> "
            << sm.back() << "\n";
}

// ---------------------------------------------------------------- train

struct TrainOptions {
  fs::path checkpoint;
  fs::path corpus;
  fs::path out;
  std::string regime = "multi";
  int rank = 0;
  std::string split = "auto";
  std::vector<std::string> classes;
  TrainConfig cfg;
  bool no_crop = false;
  std::string crop_reference = "box";
};

void cmd_train(TrainOptions o, Context& ctx) {
  const Regime regime = parse_regime(o.regime);
  if (regime == Regime::kBase) throw UsageError("the base regime has nothing to train");
  const Checkpoint ck = load_checkpoint_checked(o.checkpoint);
  const Corpus corpus = load_corpus_checked(o.corpus);
  const DatasetManifest& m = corpus.manifest;
  if (static_cast<int>(m.classes.size()) > ck.model.config.num_classes)
    throw DataError("corpus declares more classes than the checkpoint was trained on");

  Split split;
  if (o.split == "auto") split = has_split(m, Split::kFewShot) ? Split::kFewShot : Split::kTail;
  else split = parse_split_flag(o.split);
  const std::vector<int> classes = select_classes(m, o.classes, split);

  o.cfg.semantic_crop = !o.no_crop;
  o.cfg.jitter.reference = parse_reference(o.crop_reference);
  for (const auto& w : o.cfg.validate()) ctx.err << "warning: " << w << "\n";

  fs::create_directories(o.out);
  ojson per_class = ojson::array();
  int resolved_rank = o.rank;
  for (int c : classes) {
    const std::vector<LabeledImage> shots = corpus.labeled(split, c);
    if (shots.empty()) throw DataError("class '" + m.classes[static_cast<std::size_t>(c)] + "' has no items in the split");
    const int k = static_cast<int>(shots.size());
    // Class-wise adapters default to the budget-matched rank r * K.
    const int rank = o.rank > 0 ? o.rank : (regime == Regime::kClassWise ? 4 * k : 4);
    resolved_rank = rank;

    AdapterBank bank{regime, c, {}};
    ojson losses = ojson::array();
    TrainConfig tc = o.cfg;
    tc.seed = image_seed(ctx.manifest.seed, c, 0);
    const std::string name = m.classes[static_cast<std::size_t>(c)];
    auto record = [&](const AdapterTrainResult& r, const std::string& suffix) {
      write_loss_csv(o.out / (name + "." + std::string(to_string(regime)) + suffix + ".loss.csv"), r.curve);
      const auto sm = r.curve.smoothed(std::max(1, tc.steps / 10));
      if (!sm.empty()) losses.push_back({{"first", sm.front()}, {"last", sm.back()}});
    };
    if (regime == Regime::kMultiHead) {
      auto r = train_multi_head(ck.model, shots, rank, ck.schedule, tc);
      record(r, "");
      bank.sets.push_back(std::move(r.adapters));
    } else if (regime == Regime::kClassWise) {
      auto r = train_single_head(ck.model, shots, rank, ck.schedule, tc);
      record(r, "");
      bank.sets.push_back(std::move(r.adapters));
    } else {
      for (int i = 0; i < k; ++i) {
        TrainConfig ti = tc;
        ti.seed = image_seed(ctx.manifest.seed, c, i + 1);
        auto r = train_single_head(ck.model, std::span(shots).subspan(static_cast<std::size_t>(i), 1), rank,
                                   ck.schedule, ti);
        record(r, "." + std::to_string(i));
        bank.sets.push_back(std::move(r.adapters));
      }
    }
    const fs::path bank_path = o.out / bank_file_name(name, regime);
    save_bank(bank_path, bank);
    ctx.manifest.outputs.push_back(bank_path);
    per_class.push_back({{"class", name}, {"shots", k}, {"rank", rank}, {"smoothed_loss", losses}});
    ctx.out << "trained " << o.regime << " adapters for '" << name << "' (" << k << " shots, rank " << rank
            << ")\n";
  }

  auto& c = ctx.manifest.config;
  c["checkpoint"] = o.checkpoint.generic_string();
  c["corpus"] = o.corpus.generic_string();
  c["out"] = o.out.generic_string();
  c["regime"] = o.regime;
  c["rank"] = resolved_rank;
  c["split"] = std::string(to_string(split));
  c["train"] = train_config_json(o.cfg);
  c["classes"] = per_class;
  ctx.manifest.inputs = {o.checkpoint, o.corpus};
  if (ctx.manifest_path.empty()) ctx.manifest_path = o.out / ("run_manifest." + o.regime + ".json");
}

// ---------------------------------------------------------------- generate

struct GenerateOptions {
  fs::path checkpoint;
  fs::path adapters;
  fs::path corpus;
  fs::path out;
  std::string regime = "multi";
  std::vector<std::string> classes;
  int count = 500;
  double alpha = 1.0;
  std::string mode = "dirichlet";
  double guidance = 2.0;
  int steps = 50;
  int jobs = 1;
  fs::path replay;
};

std::string image_name(const std::string& class_name, int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "_%05d.pgm", index);
  return "images/" + class_name + buf;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

json record_json(const GenerationRecord& r, const std::string& class_name, const std::string& file,
                 const Image& img) {
  json j;
  j["file"] = file;
  j["class"] = class_name;
  j["class_id"] = r.class_id;
  j["index"] = r.index;
  j["seed"] = r.seed;
  j["regime"] = std::string(to_string(r.regime));
  j["weights"] = r.weights;
  j["adapter_index"] = r.adapter_index;
  j["guidance"] = r.guidance;
  j["steps"] = r.steps;
  j["pixel_digest"] = hex64(digest(img));
  return j;
}

class BankCache {
 public:
  BankCache(fs::path dir, const DatasetManifest& m) : dir_(std::move(dir)), m_(m) {}

  const AdapterBank& get(int class_id, Regime regime) {
    const auto key = std::make_pair(class_id, regime);
    auto it = banks_.find(key);
    if (it != banks_.end()) return it->second;
    AdapterBank bank{regime, class_id, {}};
    if (regime != Regime::kBase) {
      const fs::path p = dir_ / bank_file_name(m_.classes[static_cast<std::size_t>(class_id)], regime);
      require_file(p, "adapter bank");
      bank = load_bank(p);
      if (bank.class_id != class_id || bank.regime != regime)
        throw DataError("adapter bank " + p.string() + " does not match its file name");
      paths_.push_back(p);
    }
    return banks_.emplace(key, std::move(bank)).first->second;
  }

  const std::vector<fs::path>& paths() const { return paths_; }

 private:
  fs::path dir_;
  const DatasetManifest& m_;
  std::map<std::pair<int, Regime>, AdapterBank> banks_;
  std::vector<fs::path> paths_;
};

void cmd_replay(const GenerateOptions& o, const Checkpoint& ck, const DatasetManifest& m, Context& ctx) {
  require_file(o.replay, "weight log");
  std::istringstream lines(read_file(o.replay));
  BankCache banks(o.adapters, m);
  Corpus synth;
  synth.manifest.classes = m.classes;
  std::string line, log_out;
  int total = 0, mismatched = 0;
  for (int lineno = 1; std::getline(lines, line); ++lineno) {
    if (line.empty()) continue;
    json j;
    GenerationRecord rec;
    std::string file, expected;
    try {
      j = json::parse(line);
      rec.class_id = j.at("class_id").get<int>();
      rec.index = j.at("index").get<int>();
      rec.seed = j.at("seed").get<std::uint64_t>();
      rec.regime = parse_regime(j.at("regime").get<std::string>());
      rec.weights = j.at("weights").get<std::vector<double>>();
      rec.adapter_index = j.at("adapter_index").get<int>();
      rec.guidance = j.at("guidance").get<double>();
      rec.steps = j.at("steps").get<int>();
      file = j.at("file").get<std::string>();
      expected = j.value("pixel_digest", "");
    } catch (const json::exception& e) {
      throw FormatError("weight log line " + std::to_string(lineno) + ": " + e.what());
    }
    if (rec.class_id < 0 || rec.class_id >= static_cast<int>(m.classes.size()))
      throw DataError("weight log refers to an unknown class id");
    const Image img = replay(ck.model, ck.schedule, banks.get(rec.class_id, rec.regime), rec);
    if (!expected.empty() && hex64(digest(img)) != expected) ++mismatched;
    ++total;
    synth.manifest.items.push_back({file, rec.class_id, {}, Split::kUnassigned});
    synth.images.push_back(quantize_u8(img));
    log_out += record_json(rec, m.classes[static_cast<std::size_t>(rec.class_id)], file, img).dump() + "\n";
  }
  save_corpus(o.out, synth);
  write_file_atomic(o.out / "weights.jsonl", log_out);

  auto& c = ctx.manifest.config;
  c["checkpoint"] = o.checkpoint.generic_string();
  c["adapters"] = o.adapters.generic_string();
  c["corpus"] = o.corpus.generic_string();
  c["out"] = o.out.generic_string();
  c["replay"] = o.replay.generic_string();
  ctx.manifest.inputs = {o.checkpoint, o.corpus, o.replay};
  for (const auto& p : banks.paths()) ctx.manifest.inputs.push_back(p);
  ctx.manifest.outputs = {o.out / "manifest.json", o.out / "weights.jsonl", o.out / "images"};
  if (ctx.manifest_path.empty()) ctx.manifest_path = o.out / "run_manifest.json";
  ctx.out << "replayed " << total << " images, " << total - mismatched << " bitwise identical\n";
  if (mismatched > 0)
    throw DataError(std::to_string(mismatched) + " replayed images differ from the weight log");
}

void cmd_generate(const GenerateOptions& o, Context& ctx) {
  const Checkpoint ck = load_checkpoint_checked(o.checkpoint);
  const Corpus corpus = load_corpus_checked(o.corpus);
  const DatasetManifest& m = corpus.manifest;
  if (!o.replay.empty()) return cmd_replay(o, ck, m, ctx);

  const Regime regime = parse_regime(o.regime);
  const MixtureMode mode = parse_mixture_mode(o.mode);
  std::vector<int> classes;
  if (o.classes.empty() && regime != Regime::kBase) {
    for (int c = 0; c < static_cast<int>(m.classes.size()); ++c)
      if (fs::exists(o.adapters / bank_file_name(m.classes[static_cast<std::size_t>(c)], regime)))
        classes.push_back(c);
    if (classes.empty()) throw UsageError("no " + o.regime + " adapters found in '" + o.adapters.string() + "'");
  } else {
    classes = select_classes(m, o.classes, std::nullopt);
  }

  BankCache banks(o.adapters, m);
  Corpus synth;
  synth.manifest.classes = m.classes;
  std::string log;
  for (int c : classes) {
    const std::string& name = m.classes[static_cast<std::size_t>(c)];
    GenerationRequest req;
    req.count = o.count;
    req.mixture.alpha = o.alpha;
    req.mixture.mode = mode;
    req.sampler.guidance = o.guidance;
    req.sampler.steps = o.steps;
    req.seed = ctx.manifest.seed;
    req.jobs = o.jobs;
    GenerationResult res = generate_dataset(ck.model, ck.schedule, banks.get(c, regime), req);
    for (const auto& w : res.warnings) ctx.err << "warning: class '" << name << "': " << w << "\n";
    for (auto& g : res.images) {
      const std::string file = image_name(name, g.record.index);
      log += record_json(g.record, name, file, g.image).dump() + "\n";
      synth.manifest.items.push_back({file, c, {}, Split::kUnassigned});
      synth.images.push_back(quantize_u8(g.image));
    }
    ctx.out << "generated " << res.images.size() << " images for '" << name << "'\n";
  }
  save_corpus(o.out, synth);
  write_file_atomic(o.out / "weights.jsonl", log);

  auto& c = ctx.manifest.config;
  c["checkpoint"] = o.checkpoint.generic_string();
  c["adapters"] = o.adapters.generic_string();
  c["corpus"] = o.corpus.generic_string();
  c["out"] = o.out.generic_string();
  c["regime"] = o.regime;
  ojson names = ojson::array();
  for (int id : classes) names.push_back(m.classes[static_cast<std::size_t>(id)]);
  c["classes"] = names;
  c["count"] = o.count;
  c["alpha"] = o.alpha;
  c["mode"] = std::string(to_string(mode));
  c["guidance"] = o.guidance;
  c["steps"] = o.steps;
  c["jobs"] = o.jobs;
  ctx.manifest.inputs = {o.checkpoint, o.corpus};
  for (const auto& p : banks.paths()) ctx.manifest.inputs.push_back(p);
  ctx.manifest.outputs = {o.out / "manifest.json", o.out / "weights.jsonl", o.out / "images"};
  if (ctx.manifest_path.empty()) ctx.manifest_path = o.out / "run_manifest.json";
}

// ---------------------------------------------------------------- evaluate / probe inputs

struct LoadedSet {
  EmbeddingSet set;
  std::vector<std::string> class_names;  // empty for CSV inputs
};

bool is_csv(const fs::path& p) { return p.extension() == ".csv"; }

// Embeds the items of a manifest (restricted to `splits` when nonempty), or
// imports an embedding CSV.
LoadedSet load_set(const fs::path& path, const std::vector<Split>& splits, const ToyEmbedder& embedder) {
  require_file(path, "input");
  LoadedSet out;
  if (is_csv(path)) {
    out.set = import_embeddings(path);
    if (!out.set.labeled()) throw DataError("embedding file " + path.string() + " has no label column");
    return out;
  }
  const Corpus corpus = load_corpus(path);
  out.class_names = corpus.manifest.classes;
  std::vector<Image> images;
  for (std::size_t i = 0; i < corpus.images.size(); ++i) {
    const auto& it = corpus.manifest.items[i];
    if (!splits.empty() && std::find(splits.begin(), splits.end(), it.split) == splits.end()) continue;
    if (corpus.images[i].width != embedder.image_size() || corpus.images[i].height != embedder.image_size())
      throw DataError("image " + it.image + " does not match the embedder size");
    images.push_back(corpus.images[i]);
    out.set.labels.push_back(it.class_id);
  }
  out.set.vectors = embedder.embed_all(images);
  if (images.empty()) out.set.vectors.resize(0, embedder.dim());
  return out;
}

// Rewrites labels of `s` onto the class ids of `reference` by name.
void align_labels(LoadedSet& s, const std::vector<std::string>& reference) {
  if (s.class_names.empty() || reference.empty() || s.class_names == reference) return;
  for (int& l : s.set.labels) {
    const std::string& name = s.class_names[static_cast<std::size_t>(l)];
    const auto it = std::find(reference.begin(), reference.end(), name);
    if (it == reference.end()) throw DataError("class '" + name + "' is absent from the real set");
    l = static_cast<int>(it - reference.begin());
  }
  s.class_names = reference;
}

std::pair<std::string, fs::path> named_path(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos) {
    const fs::path p(spec);
    const std::string stem = p.stem() == "manifest" ? p.parent_path().filename().string() : p.stem().string();
    return {stem, p};
  }
  return {spec.substr(0, eq), fs::path(spec.substr(eq + 1))};
}

// ---------------------------------------------------------------- evaluate

struct EvaluateOptions {
  fs::path real;
  std::string real_split = "fewshot";
  std::vector<std::string> synth;
  fs::path checkpoint;
  fs::path out;
  int image_size = 16;
  bool export_embeddings = false;
};

void cmd_evaluate(const EvaluateOptions& o, Context& ctx) {
  if (o.synth.empty()) throw UsageError("at least one --synth set is required");
  const ToyEmbedder embedder(o.image_size);
  std::vector<Split> real_splits;
  if (o.real_split != "all") real_splits.push_back(parse_split_flag(o.real_split));
  const LoadedSet real = load_set(o.real, real_splits, embedder);
  if (real.set.size() == 0) throw DataError("the real set is empty");

  ReportOptions ropt;
  ropt.class_names = real.class_names;
  std::map<int, Eigen::VectorXd> class_vecs;
  if (!o.checkpoint.empty()) {
    const Checkpoint ck = load_checkpoint_checked(o.checkpoint);
    for (std::size_t c = 0; c < ck.model.class_directions.size(); ++c)
      class_vecs[static_cast<int>(c)] = ck.model.class_directions[c];
    ropt.has_scores = !class_vecs.empty();
    ctx.manifest.inputs.push_back(o.checkpoint);
  }
  if (ropt.class_names.empty()) {
    std::set<int> ids(real.set.labels.begin(), real.set.labels.end());
    const int hi = ids.empty() ? 0 : *ids.rbegin();
    for (int c = 0; c <= hi; ++c) ropt.class_names.push_back("class" + std::to_string(c));
  }

  std::vector<NamedReport> reports;
  ctx.manifest.inputs.push_back(o.real);
  fs::create_directories(o.out);
  if (o.export_embeddings) export_embeddings(o.out / "embeddings" / "real.csv", real.set);
  for (const auto& spec : o.synth) {
    auto [name, path] = named_path(spec);
    LoadedSet s = load_set(path, {}, embedder);
    align_labels(s, real.class_names);
    if (s.set.size() == 0) throw DataError("synthetic set '" + name + "' is empty");
    reports.push_back({name, build_report(real.set, s.set, class_vecs)});
    ctx.manifest.inputs.push_back(path);
    if (o.export_embeddings) export_embeddings(o.out / "embeddings" / (name + ".csv"), s.set);
  }

  write_file_atomic(o.out / "report.json", gap_reports_json(reports, ropt));
  write_file_atomic(o.out / "report.csv", gap_reports_csv(reports, ropt));
  write_file_atomic(o.out / "table.csv", gap_table_csv(reports, ropt));
  const std::pair<GapMetric, const char*> charts[] = {{GapMetric::kFrechet, "frechet.svg"},
                                                      {GapMetric::kCovRealBySynth, "cov_real_by_synth.svg"},
                                                      {GapMetric::kCovSynthByReal, "cov_synth_by_real.svg"},
                                                      {GapMetric::kCentroid, "centroid.svg"}};
  for (const auto& [metric, file] : charts) write_file_atomic(o.out / file, gap_chart_svg(reports, ropt, metric));
  ctx.out << gap_table_text(reports, ropt);

  auto& c = ctx.manifest.config;
  c["real"] = o.real.generic_string();
  c["real_split"] = o.real_split;
  c["synth"] = o.synth;
  c["checkpoint"] = o.checkpoint.generic_string();
  c["out"] = o.out.generic_string();
  c["image_size"] = o.image_size;
  c["embedder"] = {{"dim", embedder.dim()}, {"seed", ToyEmbedder::kDefaultSeed}};
  c["covariance_shrinkage"] = kCovarianceShrinkage;
  c["export_embeddings"] = o.export_embeddings;
  ctx.manifest.outputs = {o.out / "report.json", o.out / "report.csv", o.out / "table.csv"};
  for (const auto& [metric, file] : charts) ctx.manifest.outputs.push_back(o.out / file);
  if (ctx.manifest_path.empty()) ctx.manifest_path = o.out / "run_manifest.json";
}

// ---------------------------------------------------------------- probe

struct ProbeOptions {
  fs::path real;
  std::vector<std::string> synth;
  fs::path out;
  int image_size = 16;
  ProbeConfig cfg;
};

void cmd_probe(const ProbeOptions& o, Context& ctx) {
  const ToyEmbedder embedder(o.image_size);
  require_file(o.real, "corpus manifest");
  if (is_csv(o.real)) throw UsageError("probe needs a corpus manifest with split tags");
  const Corpus corpus = load_corpus(o.real);
  const DatasetManifest& m = corpus.manifest;
  if (!has_split(m, Split::kTest)) throw UsageError("corpus has no test split");
  const int num_classes = static_cast<int>(m.classes.size());

  const LoadedSet train = load_set(o.real, {Split::kFewShot, Split::kHead, Split::kTail}, embedder);
  const LoadedSet test = load_set(o.real, {Split::kTest}, embedder);
  if (train.set.size() == 0) throw DataError("corpus has no training items");
  std::vector<int> head;
  for (int c = 0; c < num_classes; ++c)
    if (m.count(c, Split::kHead) > 0) head.push_back(c);
  const bool long_tail = !head.empty();

  std::vector<ProbeRow> rows;
  auto evaluate = [&](const std::string& name, const EmbeddingSet& set) {
    LinearProbe probe;
    probe.fit(set, num_classes, o.cfg);
    rows.push_back({name, set.size(), score_probe(probe, test.set, head)});
  };
  evaluate("real", train.set);
  ctx.manifest.inputs.push_back(o.real);
  for (const auto& spec : o.synth) {
    auto [name, path] = named_path(spec);
    LoadedSet s = load_set(path, {}, embedder);
    align_labels(s, m.classes);
    evaluate("real+" + name, concatenate(train.set, s.set));
    ctx.manifest.inputs.push_back(path);
  }

  fs::create_directories(o.out);
  write_file_atomic(o.out / "probe.json", probe_json(rows, m.classes, long_tail));
  write_file_atomic(o.out / "probe.csv", probe_csv(rows, long_tail));
  ctx.out << probe_text(rows, long_tail);

  auto& c = ctx.manifest.config;
  c["real"] = o.real.generic_string();
  c["synth"] = o.synth;
  c["out"] = o.out.generic_string();
  c["image_size"] = o.image_size;
  c["l2"] = o.cfg.l2;
  c["iterations"] = o.cfg.iterations;
  c["learning_rate"] = o.cfg.learning_rate;
  c["standardize"] = o.cfg.standardize;
  c["long_tail"] = long_tail;
  ctx.manifest.outputs = {o.out / "probe.json", o.out / "probe.csv"};
  if (ctx.manifest_path.empty()) ctx.manifest_path = o.out / "run_manifest.json";
}

// ---------------------------------------------------------------- crop-preview

struct CropPreviewOptions {
  fs::path corpus;
  fs::path out;
  int index = 0;
  int count = 8;
  int size = 0;
  JitterParams jitter;
  std::string reference = "box";
};

void svg_pixels(std::ostringstream& os, const Image& img, int ox, int oy, int cell) {
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const int v = static_cast<int>(std::lround(255.0 * std::clamp(img.at(x, y), 0.0, 1.0)));
      os << "<rect x=\"" << ox + x * cell << "\" y=\"" << oy + y * cell << "\" width=\"" << cell
         << "\" height=\"" << cell << "\" fill=\"rgb(" << v << ',' << v << ',' << v << ")\"/>\n";
    }
  }
}

void svg_outline(std::ostringstream& os, double x0, double y0, double x1, double y1, const char* color) {
  os << "<rect x=\"" << x0 << "\" y=\"" << y0 << "\" width=\"" << x1 - x0 << "\" height=\"" << y1 - y0
     << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
}

void cmd_crop_preview(CropPreviewOptions o, Context& ctx) {
  const Corpus corpus = load_corpus_checked(o.corpus);
  if (o.index < 0 || o.index >= static_cast<int>(corpus.images.size()))
    throw UsageError("--index out of range");
  if (o.count < 1) throw UsageError("--count must be positive");
  o.jitter.reference = parse_reference(o.reference);
  const Image& src = corpus.images[static_cast<std::size_t>(o.index)];
  const ManifestItem& item = corpus.manifest.items[static_cast<std::size_t>(o.index)];
  const Box b_star = enclosing_box_or_full(item.boxes, src.width, src.height);
  const int tw = o.size > 0 ? o.size : src.width;
  const int th = o.size > 0 ? o.size : src.height;

  Rng rng(ctx.manifest.seed);
  const int cell = 10, margin = 20;
  const int panel = std::max(src.width, tw) * cell + margin;
  std::ostringstream svg;
  const int width = margin + panel * (o.count + 1);
  const int height = margin * 2 + std::max(src.height, th) * cell + 20;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg_pixels(svg, src, margin, margin, cell);
  svg_outline(svg, margin + b_star.x0() * cell, margin + b_star.y0() * cell, margin + b_star.x1() * cell,
              margin + b_star.y1() * cell, "lime");

  ojson crops = ojson::array();
  write_pgm(o.out / "source.pgm", src);
  ctx.manifest.outputs.push_back(o.out / "source.pgm");
  for (int i = 0; i < o.count; ++i) {
    const CropSpec spec = sample_crop(src.width, src.height, b_star, tw, th, o.jitter, rng);
    const Image view = apply_crop(src, spec);
    char name[32];
    std::snprintf(name, sizeof name, "crop_%02d.pgm", i);
    write_pgm(o.out / name, view);
    ctx.manifest.outputs.push_back(o.out / name);

    // Window outline on the source (canvas coordinates shifted by the padding).
    const double rx0 = spec.region.x0() - spec.pad_left, ry0 = spec.region.y0() - spec.pad_top;
    const double rx1 = spec.region.x1() - spec.pad_left, ry1 = spec.region.y1() - spec.pad_top;
    svg_outline(svg, margin + rx0 * cell, margin + ry0 * cell, margin + rx1 * cell, margin + ry1 * cell, "orange");
    const int ox = margin + panel * (i + 1);
    svg_pixels(svg, view, ox, margin, cell);
    const RectF mapped = map_box_to_output(spec, b_star);
    svg_outline(svg, ox + mapped.x0 * cell, margin + mapped.y0 * cell, ox + mapped.x1 * cell,
                margin + mapped.y1 * cell, "lime");
    svg << "<text x=\"" << ox << "\" y=\"" << height - 8 << "\">" << name << "</text>\n";
    crops.push_back({{"file", name},
                     {"region", {spec.region.x0(), spec.region.y0(), spec.region.x1(), spec.region.y1()}},
                     {"pad", {spec.pad_left, spec.pad_top, spec.pad_right, spec.pad_bottom}},
                     {"box_in_output", {mapped.x0, mapped.y0, mapped.x1, mapped.y1}}});
  }
  svg << "</svg>\n";
  write_file_atomic(o.out / "preview.svg", svg.str());
  write_file_atomic(o.out / "crops.json", crops.dump(2) + "\n");
  ctx.manifest.outputs.push_back(o.out / "preview.svg");
  ctx.manifest.outputs.push_back(o.out / "crops.json");

  auto& c = ctx.manifest.config;
  c["corpus"] = o.corpus.generic_string();
  c["out"] = o.out.generic_string();
  c["index"] = o.index;
  c["count"] = o.count;
  c["target"] = {tw, th};
  c["b_star"] = {b_star.x0(), b_star.y0(), b_star.x1(), b_star.y1()};
  c["scale_min"] = o.jitter.scale_min;
  c["scale_max"] = o.jitter.scale_max;
  c["max_translate"] = o.jitter.max_translate;
  c["isotropic"] = o.jitter.isotropic;
  c["reference"] = o.reference;
  ctx.manifest.inputs = {o.corpus};
  if (ctx.manifest_path.empty()) ctx.manifest_path = o.out / "run_manifest.json";
  ctx.out << "wrote " << o.count << " crops of " << item.image << " to " << o.out.string() << "\n";
}

// ---------------------------------------------------------------- dispatch

std::uint64_t parse_seed(const std::string& s) {
  std::uint64_t v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw UsageError("CHIMERA_SEED must be an unsigned integer, got '" + s + "'");
  return v;
}

int exit_code(std::ostream& err, const std::exception& e) {
  err << "error: " << e.what() << "\n";
  if (dynamic_cast<const NumericalError*>(&e)) return kExitNumerical;
  if (dynamic_cast<const DataError*>(&e) || dynamic_cast<const SampleSizeError*>(&e) ||
      dynamic_cast<const DimensionError*>(&e))
    return kExitData;
  return kExitUsage;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const RunOptions& ropts);

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const RunOptions& opts) {
  try {
    return dispatch(args, out, err, opts);
  } catch (const std::exception& e) {
    return exit_code(err, e);
  }
}

namespace {

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
             const RunOptions& ropts) {
  CLI::App app{"Multi-head low-rank adapters for a toy diffusion model", "mhlora"};
  app.require_subcommand(1);
  app.set_version_flag("--version", tool_version());

  std::uint64_t seed = 0;
  fs::path manifest_path;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "Random seed (CHIMERA_SEED overrides)")->capture_default_str();
    sub->add_option("--manifest", manifest_path, "Where to write the run manifest");
  };

  GenToyOptions gen;
  auto* s_gen = app.add_subcommand("gen-toy", "Render a procedural shape corpus");
  s_gen->add_option("--out", gen.out, "Output directory")->required();
  s_gen->add_option("--classes", gen.classes, "Number of shape classes (2-10)")->capture_default_str();
  s_gen->add_option("--per-class", gen.per_class, "Images per class")->capture_default_str();
  s_gen->add_option("--size", gen.size, "Image side in pixels")->capture_default_str();
  s_gen->add_option("--style", gen.style, "target or broad")->capture_default_str();
  s_gen->add_option("--split", gen.split, "none, pretrain, fewshot or longtail")->capture_default_str();
  s_gen->add_option("--shots", gen.shots, "Few-shot / tail images per class")->capture_default_str();
  s_gen->add_option("--test-per-class", gen.test_per_class, "Held-out items per class (longtail)")
      ->capture_default_str();
  s_gen->add_option("--head-budget", gen.head_budget, "Max items per head class (longtail)")->capture_default_str();
  common(s_gen);

  PretrainOptions pre;
  auto* s_pre = app.add_subcommand("pretrain", "Train the base denoiser");
  s_pre->add_option("--corpus", pre.corpus, "Corpus manifest.json")->required();
  s_pre->add_option("--out", pre.out, "Checkpoint path")->required();
  s_pre->add_option("--split", pre.split, "Split used for training")->capture_default_str();
  s_pre->add_option("--steps", pre.cfg.steps)->capture_default_str();
  s_pre->add_option("--batch", pre.cfg.batch)->capture_default_str();
  s_pre->add_option("--lr", pre.cfg.lr)->capture_default_str();
  s_pre->add_option("--weight-decay", pre.cfg.weight_decay)->capture_default_str();
  s_pre->add_option("--flip-prob", pre.cfg.flip_prob)->capture_default_str();
  s_pre->add_option("--cond-drop", pre.cfg.cond_drop_prob, "Classifier-free label dropout")->capture_default_str();
  s_pre->add_option("--channels", pre.model.channels)->capture_default_str();
  s_pre->add_option("--blocks", pre.model.blocks)->capture_default_str();
  s_pre->add_option("--time-dim", pre.model.time_dim)->capture_default_str();
  s_pre->add_option("--timesteps", pre.timesteps, "Diffusion steps T")->capture_default_str();
  s_pre->add_option("--loss-log", pre.loss_log, "Loss CSV (default <out>.loss.csv)");
  common(s_pre);

  TrainOptions tr;
  auto* s_tr = app.add_subcommand("train", "Fit per-class adapters on a frozen base");
  s_tr->add_option("--checkpoint", tr.checkpoint, "Base checkpoint")->required();
  s_tr->add_option("--corpus", tr.corpus, "Corpus manifest.json")->required();
  s_tr->add_option("--out", tr.out, "Adapter directory")->required();
  s_tr->add_option("--regime", tr.regime, "multi, image or class")->capture_default_str();
  s_tr->add_option("--rank", tr.rank, "Adapter rank (0: 4, or 4*K for class)")->capture_default_str();
  s_tr->add_option("--lr-a", tr.cfg.lr_A, "Learning rate of the shared A")->capture_default_str();
  s_tr->add_option("--lr-b", tr.cfg.lr_B, "Learning rate of the heads")->capture_default_str();
  s_tr->add_option("--steps", tr.cfg.steps, "Optimizer steps per adapter")->capture_default_str();
  s_tr->add_option("--batch", tr.cfg.batch)->capture_default_str();
  s_tr->add_option("--weight-decay", tr.cfg.weight_decay)->capture_default_str();
  s_tr->add_option("--flip-prob", tr.cfg.flip_prob)->capture_default_str();
  s_tr->add_option("--split", tr.split, "fewshot, tail or auto")->capture_default_str();
  s_tr->add_option("--classes", tr.classes, "Class names, 'all' or 'tail'");
  s_tr->add_flag("--no-crop", tr.no_crop, "Disable the box-preserving crop");
  s_tr->add_option("--crop-reference", tr.crop_reference, "box or image")->capture_default_str();
  s_tr->add_option("--scale-min", tr.cfg.jitter.scale_min)->capture_default_str();
  s_tr->add_option("--scale-max", tr.cfg.jitter.scale_max)->capture_default_str();
  s_tr->add_option("--max-translate", tr.cfg.jitter.max_translate)->capture_default_str();
  s_tr->add_flag("--isotropic", tr.cfg.jitter.isotropic);
  s_tr->add_option("--lora-scale", tr.cfg.lora_scale)->capture_default_str();
  s_tr->add_option("--init-std", tr.cfg.init_std, "Std of A at init (<= 0: 1/rank)")->capture_default_str();
  common(s_tr);

  GenerateOptions ge;
  auto* s_ge = app.add_subcommand("generate", "Synthesize images from merged adapters");
  s_ge->add_option("--checkpoint", ge.checkpoint, "Base checkpoint")->required();
  s_ge->add_option("--corpus", ge.corpus, "Corpus manifest.json (class names)")->required();
  s_ge->add_option("--adapters", ge.adapters, "Adapter directory");
  s_ge->add_option("--out", ge.out, "Output directory")->required();
  s_ge->add_option("--regime", ge.regime, "multi, image, class or base")->capture_default_str();
  s_ge->add_option("--classes", ge.classes, "Class names, 'all' or 'tail'");
  s_ge->add_option("--count", ge.count, "Images per class")->capture_default_str();
  s_ge->add_option("--alpha", ge.alpha, "Dirichlet concentration")->capture_default_str();
  s_ge->add_option("--mode", ge.mode, "dirichlet, uniform or reuse")->capture_default_str();
  s_ge->add_option("--guidance", ge.guidance, "Classifier-free guidance scale")->capture_default_str();
  s_ge->add_option("--steps", ge.steps, "Sampling steps")->capture_default_str();
  s_ge->add_option("--jobs", ge.jobs, "Worker threads")->capture_default_str();
  s_ge->add_option("--replay", ge.replay, "Re-render the images of a weights.jsonl log");
  common(s_ge);

  EvaluateOptions ev;
  auto* s_ev = app.add_subcommand("evaluate", "Synthetic-to-real gap report");
  s_ev->add_option("--real", ev.real, "Real manifest.json or embedding CSV")->required();
  s_ev->add_option("--real-split", ev.real_split, "Split of the real manifest, or 'all'")->capture_default_str();
  s_ev->add_option("--synth", ev.synth, "[name=]path of a synthetic manifest or CSV (repeatable)")->required();
  s_ev->add_option("--checkpoint", ev.checkpoint, "Checkpoint providing class directions for the score");
  s_ev->add_option("--out", ev.out, "Report directory")->required();
  s_ev->add_option("--image-size", ev.image_size)->capture_default_str();
  s_ev->add_flag("--export-embeddings", ev.export_embeddings, "Also write embedding CSVs");
  common(s_ev);

  CropPreviewOptions cp;
  auto* s_cp = app.add_subcommand("crop-preview", "Sample box-preserving crops of one image");
  s_cp->add_option("--corpus", cp.corpus, "Corpus manifest.json")->required();
  s_cp->add_option("--out", cp.out, "Output directory")->required();
  s_cp->add_option("--index", cp.index, "Item index in the manifest")->capture_default_str();
  s_cp->add_option("--count", cp.count)->capture_default_str();
  s_cp->add_option("--size", cp.size, "Output side (0: source size)")->capture_default_str();
  s_cp->add_option("--scale-min", cp.jitter.scale_min)->capture_default_str();
  s_cp->add_option("--scale-max", cp.jitter.scale_max)->capture_default_str();
  s_cp->add_option("--max-translate", cp.jitter.max_translate)->capture_default_str();
  s_cp->add_flag("--isotropic", cp.jitter.isotropic);
  s_cp->add_option("--reference", cp.reference, "box or image")->capture_default_str();
  common(s_cp);

  ProbeOptions pr;
  auto* s_pr = app.add_subcommand("probe", "Linear probe accuracy with and without synthetic data");
  s_pr->add_option("--real", pr.real, "Corpus manifest.json with train and test splits")->required();
  s_pr->add_option("--synth", pr.synth, "[name=]path of synthetic images (repeatable)");
  s_pr->add_option("--out", pr.out, "Output directory")->required();
  s_pr->add_option("--image-size", pr.image_size)->capture_default_str();
  s_pr->add_option("--l2", pr.cfg.l2)->capture_default_str();
  s_pr->add_option("--iterations", pr.cfg.iterations)->capture_default_str();
  s_pr->add_option("--learning-rate", pr.cfg.learning_rate)->capture_default_str();
  common(s_pr);

  fs::path rerun_path;
  auto* s_re = app.add_subcommand("rerun", "Repeat the command recorded in a run manifest");
  s_re->add_option("manifest", rerun_path, "run manifest JSON")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  if (name == "rerun") {
    const LoadedRunManifest m = read_run_manifest(rerun_path);
    std::vector<std::string> again;
    for (std::size_t i = 0; i < m.argv.size(); ++i) {
      if (m.argv[i] == "--seed") {
        ++i;
        continue;
      }
      if (m.argv[i].rfind("--seed=", 0) == 0) continue;
      again.push_back(m.argv[i]);
    }
    again.push_back("--seed");
    again.push_back(std::to_string(m.seed));
    RunOptions no_env = ropts;
    no_env.allow_env_seed = false;
    return run(again, out, err, no_env);
  }

  Context ctx{out, err, {}, manifest_path};
  ctx.manifest.command = name;
  ctx.manifest.argv = args;
  ctx.manifest.seed = seed;
  if (ropts.allow_env_seed) {
    if (const char* env = std::getenv("CHIMERA_SEED"); env && *env) {
      ctx.manifest.seed = parse_seed(env);
      ctx.manifest.seed_source = "CHIMERA_SEED";
    }
  }

  if (name == "gen-toy") cmd_gen_toy(gen, ctx);
  else if (name == "pretrain") cmd_pretrain(pre, ctx);
  else if (name == "train") cmd_train(tr, ctx);
  else if (name == "generate") cmd_generate(ge, ctx);
  else if (name == "evaluate") cmd_evaluate(ev, ctx);
  else if (name == "crop-preview") cmd_crop_preview(cp, ctx);
  else if (name == "probe") cmd_probe(pr, ctx);

  ctx.manifest.write(ctx.manifest_path);
  return kExitOk;
}

}  // namespace

int main_entry(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace mhlora::cli
