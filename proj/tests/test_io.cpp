// Copyright 2026 The mhlora Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <filesystem>
#include <map>
#include <random>

#include "mhlora/adapter_io.hpp"
#include "mhlora/checkpoint.hpp"
#include "mhlora/corpus.hpp"
#include "mhlora/embedding_io.hpp"
#include "mhlora/errors.hpp"
#include "mhlora/fileio.hpp"
#include "mhlora/pgm.hpp"
#include "oracles.hpp"

namespace mhlora {
namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = fs::temp_directory_path() / ("mhlora_io_" + std::string(info->test_suite_name()) + "_" + info->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

MultiHeadAdapter filled_adapter(int d1, int d2, int r, int k, std::uint64_t seed) {
  MultiHeadAdapter a = new_multi_head({d1, d2, r, k}, 0.3, seed, 0.75);
  Rng rng(seed);
  std::normal_distribution<float> n;
  for (auto& b : a.heads)
    for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = n(rng);
  return a;
}

TEST(AdapterRecord, RoundTripAndIndependentReader) {
  const MultiHeadAdapter a = filled_adapter(5, 3, 2, 4, 1);
  const std::string bytes = encode_adapter(a);
  EXPECT_EQ(bytes.size(), 4u + 2 + 16 + 8 + 4u * (2 * 3 + 4 * 5 * 2));

  const MultiHeadAdapter back = decode_adapter(bytes);
  EXPECT_EQ(back.A, a.A);
  EXPECT_EQ(back.heads, a.heads);
  EXPECT_EQ(back.lora_scale, a.lora_scale);

  const oracle::AdapterRecord rec = oracle::read_adapter_record(bytes);
  EXPECT_EQ(rec.version, kAdapterFormatVersion);
  EXPECT_EQ(rec.d1, 5u);
  EXPECT_EQ(rec.d2, 3u);
  EXPECT_EQ(rec.r, 2u);
  EXPECT_EQ(rec.k, 4u);
  EXPECT_EQ(rec.scale, 0.75);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_EQ(rec.a[static_cast<std::size_t>(i * 3 + j)], a.A(i, j));
  for (int h = 0; h < 4; ++h)
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 2; ++j)
        EXPECT_EQ(rec.b[static_cast<std::size_t>(h)][static_cast<std::size_t>(i * 2 + j)],
                  a.heads[static_cast<std::size_t>(h)](i, j));
}

TEST(AdapterRecord, FileRoundTrip) {
  TempDir dir;
  const MultiHeadAdapter a = filled_adapter(4, 4, 1, 2, 3);
  save_adapter(dir.path() / "a.chla", a);
  const MultiHeadAdapter b = load_adapter(dir.path() / "a.chla");
  EXPECT_EQ(b.A, a.A);
  EXPECT_EQ(b.heads, a.heads);
}

TEST(AdapterRecord, CorruptInputIsRejectedWithOffset) {
  const std::string bytes = encode_adapter(filled_adapter(3, 3, 1, 2, 2));
  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  try {
    decode_adapter(bad_magic);
    FAIL() << "bad magic accepted";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 0);
  }
  std::string bad_version = bytes;
  bad_version[4] = 9;
  EXPECT_THROW(decode_adapter(bad_version), FormatError);
  for (std::size_t cut : {std::size_t{3}, std::size_t{10}, bytes.size() - 1}) {
    try {
      decode_adapter(std::string_view(bytes).substr(0, cut));
      FAIL() << "truncation at " << cut << " accepted";
    } catch (const FormatError& e) {
      EXPECT_GE(e.offset(), 0);
    }
  }
  EXPECT_THROW(decode_adapter(bytes + "x"), FormatError);
}

TEST(AdapterRecord, ConsecutiveRecordsDecodeInOrder) {
  const MultiHeadAdapter a = filled_adapter(3, 2, 1, 1, 4), b = filled_adapter(2, 3, 2, 3, 5);
  const std::string both = encode_adapter(a) + encode_adapter(b);
  std::size_t off = 0;
  EXPECT_EQ(decode_adapter(both, off).A, a.A);
  EXPECT_EQ(decode_adapter(both, off).heads, b.heads);
  EXPECT_EQ(off, both.size());
}

TEST(AdapterBank, RoundTrip) {
  DenoiserConfig cfg;
  cfg.channels = 6;
  cfg.blocks = 2;
  AdapterBank bank;
  bank.regime = Regime::kImageWise;
  bank.class_id = 2;
  for (int i = 0; i < 3; ++i) bank.sets.push_back(new_class_adapters(cfg, 2, 2, 1, 0.5, 10 + i));
  const AdapterBank back = decode_bank(encode_bank(bank));
  EXPECT_EQ(back.regime, Regime::kImageWise);
  EXPECT_EQ(back.class_id, 2);
  ASSERT_EQ(back.sets.size(), 3u);
  for (std::size_t s = 0; s < 3; ++s) {
    EXPECT_EQ(back.sets[s].class_id, 2);
    ASSERT_EQ(back.sets[s].layers.size(), 4u);
    for (std::size_t l = 0; l < 4; ++l) EXPECT_EQ(back.sets[s].layers[l].A, bank.sets[s].layers[l].A);
  }
  std::string corrupt = encode_bank(bank);
  corrupt[0] = 'Z';
  EXPECT_THROW(decode_bank(corrupt), FormatError);
  bank.sets[1].class_id = 0;
  EXPECT_THROW(encode_bank(bank), DataError);
}

TEST(Checkpoint, RoundTripIsExact) {
  DenoiserConfig cfg;
  cfg.image_size = 8;
  cfg.channels = 4;
  cfg.blocks = 2;
  cfg.time_dim = 4;
  Rng rng(1);
  Checkpoint ck{{cfg, init_weights(cfg, rng), {Eigen::VectorXd::Unit(3, 0), Eigen::VectorXd::Unit(3, 2)}},
                NoiseSchedule::scaled_linear(30)};
  const Checkpoint back = decode_checkpoint(encode_checkpoint(ck));
  EXPECT_EQ(back.model.config, cfg);
  EXPECT_EQ(checksum(back.model.weights), checksum(ck.model.weights));
  EXPECT_EQ(back.schedule.betas(), ck.schedule.betas());
  EXPECT_EQ(back.model.class_directions, ck.model.class_directions);

  TempDir dir;
  save_checkpoint(dir.path() / "m.ckpt", ck);
  EXPECT_EQ(checksum(load_checkpoint(dir.path() / "m.ckpt").model.weights), checksum(ck.model.weights));
  EXPECT_THROW(load_checkpoint(dir.path() / "missing.ckpt"), DataError);
  const std::string bytes = encode_checkpoint(ck);
  EXPECT_THROW(decode_checkpoint(bytes.substr(0, bytes.size() / 2)), FormatError);
  EXPECT_THROW(decode_checkpoint("CHLA" + bytes.substr(4)), FormatError);
}

TEST(Graymap, QuantisedRoundTrip) {
  Image img(5, 3);
  for (std::size_t i = 0; i < img.size(); ++i) img.pixels[i] = static_cast<double>(i) / 14.0;
  img.pixels[0] = -0.3;
  img.pixels[1] = 1.7;
  const Image q = quantize_u8(img);
  EXPECT_EQ(q.pixels[0], 0.0);
  EXPECT_EQ(q.pixels[1], 1.0);
  EXPECT_EQ(decode_pgm(encode_pgm(img)), q);
  EXPECT_EQ(decode_pgm(encode_pgm(q)), q);
  EXPECT_EQ(encode_pgm(q).substr(0, 2), "P5");
  TempDir dir;
  write_pgm(dir.path() / "x.pgm", img);
  EXPECT_EQ(read_pgm(dir.path() / "x.pgm"), q);
}

TEST(Graymap, RejectsMalformed) {
  EXPECT_THROW(decode_pgm("P2\n1 1\n255\n\x01"), FormatError);
  EXPECT_THROW(decode_pgm("P5\n2 2\n255\n\x01"), FormatError);
  EXPECT_THROW(decode_pgm("P5\n1 1\n65535\n\x01\x02"), FormatError);
  EXPECT_THROW(encode_pgm(Image()), ShapeError);
}

TEST(EmbeddingCsv, RoundTripIsExact) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n;
  EmbeddingSet s{Eigen::MatrixXd(6, 5), {0, 1, 1, 2, 0, 2}};
  for (Eigen::Index i = 0; i < s.vectors.size(); ++i) s.vectors.data()[i] = n(rng);
  s.vectors.rowwise().normalize();
  const EmbeddingSet back = embeddings_from_csv(embeddings_to_csv(s));
  EXPECT_EQ(back.vectors, s.vectors);
  EXPECT_EQ(back.labels, s.labels);

  const EmbeddingSet unlabeled{s.vectors, {}};
  const EmbeddingSet back2 = embeddings_from_csv(embeddings_to_csv(unlabeled));
  EXPECT_FALSE(back2.labeled());
  EXPECT_EQ(back2.vectors, s.vectors);

  TempDir dir;
  export_embeddings(dir.path() / "e.csv", s);
  EXPECT_EQ(import_embeddings(dir.path() / "e.csv").vectors, s.vectors);
}

TEST(EmbeddingCsv, Errors) {
  EXPECT_THROW(embeddings_from_csv("label,d0,d1\n0,1,0\n1,0\n"), FormatError);
  EXPECT_THROW(embeddings_from_csv("d0,d1\n1,zero\n"), FormatError);
  EXPECT_THROW(embeddings_from_csv(""), FormatError);
  const EmbeddingSet a{Eigen::MatrixXd::Identity(2, 2), {0, 1}};
  const EmbeddingSet b{Eigen::MatrixXd::Identity(3, 3), {0, 1, 2}};
  const EmbeddingSet c{Eigen::MatrixXd::Identity(2, 2), {}};
  EXPECT_THROW(concatenate(a, b), DimensionError);
  EXPECT_THROW(concatenate(a, c), DataError);
  const EmbeddingSet ab = concatenate(a, a);
  EXPECT_EQ(ab.size(), 4);
  EXPECT_EQ(ab.labels, (std::vector<int>{0, 1, 0, 1}));
}

TEST(ToyCorpus, BoxesAreTightAroundInk) {
  for (ToyStyle style : {ToyStyle::kBroad, ToyStyle::kTarget}) {
    const Corpus c = generate_toy_corpus(10, 6, 16, 3, style);
    ASSERT_EQ(c.images.size(), 60u);
    for (std::size_t i = 0; i < c.images.size(); ++i) {
      const Image& img = c.images[i];
      int x0 = img.width, y0 = img.height, x1 = -1, y1 = -1;
      for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
          ASSERT_GE(img.at(x, y), 0.0);
          ASSERT_LE(img.at(x, y), 1.0);
          if (img.at(x, y) > 0.0) {
            x0 = std::min(x0, x);
            y0 = std::min(y0, y);
            x1 = std::max(x1, x);
            y1 = std::max(y1, y);
          }
        }
      }
      ASSERT_EQ(c.manifest.items[i].boxes.size(), 1u);
      EXPECT_EQ(c.manifest.items[i].boxes[0], Box(x0, y0, x1 + 1, y1 + 1)) << i;
      EXPECT_EQ(quantize_u8(img), img);
    }
  }
}

TEST(ToyCorpus, SeededAndStyled) {
  const Corpus a = generate_toy_corpus(3, 4, 16, 11), b = generate_toy_corpus(3, 4, 16, 11);
  EXPECT_EQ(a.images, b.images);
  EXPECT_NE(generate_toy_corpus(3, 4, 16, 12).images, a.images);
  EXPECT_NE(generate_toy_corpus(3, 4, 16, 11, ToyStyle::kBroad).images, a.images);
  EXPECT_EQ(a.manifest.classes[0], std::string(toy_class_name(0)));
  EXPECT_THROW(generate_toy_corpus(1, 4, 16, 1), ParameterError);
  EXPECT_THROW(generate_toy_corpus(3, 4, 4, 1), ShapeError);
}

TEST(Corpus, SaveLoadRoundTrip) {
  TempDir dir;
  Corpus c = generate_toy_corpus(3, 5, 16, 4);
  make_fewshot_split(c.manifest, 2);
  save_corpus(dir.path(), c);
  const Corpus back = load_corpus(dir.path() / "manifest.json");
  EXPECT_EQ(back.images, c.images);
  EXPECT_EQ(back.manifest.classes, c.manifest.classes);
  EXPECT_EQ(back.manifest.shots, 2);
  ASSERT_EQ(back.manifest.items.size(), c.manifest.items.size());
  for (std::size_t i = 0; i < c.manifest.items.size(); ++i) {
    EXPECT_EQ(back.manifest.items[i].boxes, c.manifest.items[i].boxes);
    EXPECT_EQ(back.manifest.items[i].split, c.manifest.items[i].split);
  }
  EXPECT_EQ(back.labeled(Split::kFewShot, 1).size(), 2u);
  EXPECT_EQ(back.labeled(Split::kTest).size(), 9u);
}

TEST(Corpus, LoadValidation) {
  TempDir dir;
  Corpus c = generate_toy_corpus(2, 3, 16, 4);
  make_fewshot_split(c.manifest, 2);
  save_corpus(dir.path(), c);
  const fs::path manifest = dir.path() / "manifest.json";
  const std::string good = read_file(manifest);

  // Missing image file.
  fs::remove(dir.path() / c.manifest.items[0].image);
  EXPECT_THROW(load_corpus(manifest), DataError);
  save_corpus(dir.path(), c);

  // Wrong K-shot count.
  DatasetManifest m = c.manifest;
  m.items[0].split = Split::kTest;
  write_file_atomic(manifest, manifest_to_json(m));
  EXPECT_THROW(load_corpus(manifest), DataError);

  write_file_atomic(manifest, "{not json");
  EXPECT_THROW(load_corpus(manifest), FormatError);
  write_file_atomic(manifest, good);
  EXPECT_NO_THROW(load_corpus(manifest));
  EXPECT_THROW(load_corpus(dir.path() / "nope.json"), DataError);
}

TEST(Splits, FewShotTakesFirstItems) {
  Corpus c = generate_toy_corpus(3, 5, 16, 4);
  make_fewshot_split(c.manifest, 3);
  for (int cls = 0; cls < 3; ++cls) {
    EXPECT_EQ(c.manifest.count(cls, Split::kFewShot), 3);
    EXPECT_EQ(c.manifest.count(cls, Split::kTest), 2);
  }
  EXPECT_THROW(make_fewshot_split(c.manifest, 6), SampleSizeError);
  EXPECT_THROW(parse_split("holdout"), FormatError);
  for (Split s : {Split::kUnassigned, Split::kPretrain, Split::kFewShot, Split::kHead, Split::kTail, Split::kTest})
    EXPECT_EQ(parse_split(to_string(s)), s);
}

TEST(Splits, LongTail) {
  Corpus c = generate_toy_corpus(10, 30, 16, 4);
  const DatasetManifest m = make_longtail_split(c.manifest, 20, 4, 9);
  int head = 0, tail = 0;
  for (int cls = 0; cls < 10; ++cls) {
    const int h = m.count(cls, Split::kHead), t = m.count(cls, Split::kTail);
    EXPECT_TRUE((h == 20 && t == 0) || (h == 0 && t == 4)) << cls;
    head += h > 0 ? 1 : 0;
    tail += t > 0 ? 1 : 0;
  }
  EXPECT_EQ(head, 5);
  EXPECT_EQ(tail, 5);
  EXPECT_EQ(m.shots, 4);
  EXPECT_NO_THROW(m.validate());

  const DatasetManifest again = make_longtail_split(c.manifest, 20, 4, 9);
  for (std::size_t i = 0; i < m.items.size(); ++i) EXPECT_EQ(m.items[i].split, again.items[i].split);

  // Odd class counts give the head the larger half; test items stay put.
  Corpus odd = generate_toy_corpus(3, 10, 16, 1);
  odd.manifest.items[0].split = Split::kTest;
  const DatasetManifest m3 = make_longtail_split(odd.manifest, 5, 2, 1);
  int heads3 = 0;
  for (int cls = 0; cls < 3; ++cls) heads3 += m3.count(cls, Split::kHead) > 0 ? 1 : 0;
  EXPECT_EQ(heads3, 2);
  EXPECT_EQ(m3.items[0].split, Split::kTest);
  EXPECT_THROW(make_longtail_split(odd.manifest, 5, 20, 1), SampleSizeError);
}

TEST(Manifest, JsonRoundTripAndValidation) {
  Corpus c = generate_toy_corpus(2, 3, 16, 4);
  make_fewshot_split(c.manifest, 1);
  const DatasetManifest back = manifest_from_json(manifest_to_json(c.manifest));
  EXPECT_EQ(back.classes, c.manifest.classes);
  EXPECT_EQ(back.items.size(), c.manifest.items.size());
  EXPECT_THROW(manifest_from_json("[]"), FormatError);
  EXPECT_THROW(manifest_from_json(R"({"schema_version": 99, "classes": [], "items": []})"), FormatError);
  DatasetManifest m = c.manifest;
  m.items[0].class_id = 7;
  EXPECT_THROW(m.validate(), DataError);
}

TEST(FileIo, AtomicWriteCreatesParents) {
  TempDir dir;
  const fs::path p = dir.path() / "a" / "b" / "c.txt";
  write_file_atomic(p, "hello");
  EXPECT_EQ(read_file(p), "hello");
  write_file_atomic(p, "bye");
  EXPECT_EQ(read_file(p), "bye");
  EXPECT_THROW(read_file(dir.path() / "missing"), DataError);
}

}  // namespace
}  // namespace mhlora
