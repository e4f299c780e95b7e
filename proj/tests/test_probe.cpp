// Copyright 2026 The mhlora Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "mhlora/corpus.hpp"
#include "mhlora/embedder.hpp"
#include "mhlora/errors.hpp"
#include "mhlora/probe.hpp"

namespace mhlora {
namespace {

EmbeddingSet embed_items(const Corpus& c, Split split) {
  const ToyEmbedder e(c.images.front().width);
  EmbeddingSet s;
  std::vector<Image> imgs;
  for (std::size_t i = 0; i < c.images.size(); ++i) {
    if (c.manifest.items[i].split != split) continue;
    imgs.push_back(c.images[i]);
    s.labels.push_back(c.manifest.items[i].class_id);
  }
  s.vectors = e.embed_all(imgs);
  return s;
}

TEST(Probe, SeparatesPlentifulRealData) {
  // With many real training images the toy classes are nearly separable.
  Corpus c = generate_toy_corpus(3, 150, 16, 21);
  make_fewshot_split(c.manifest, 100);
  LinearProbe probe;
  probe.fit(embed_items(c, Split::kFewShot), 3);
  const ProbeScores s = score_probe(probe, embed_items(c, Split::kTest));
  EXPECT_GT(s.accuracy, 0.95);
  EXPECT_EQ(s.per_class.size(), 3u);
  EXPECT_NEAR(s.average, s.accuracy, 1e-12);  // balanced test set
}

TEST(Probe, TailClassesTrailHeadClasses) {
  Corpus c = generate_toy_corpus(6, 150, 16, 5);
  // Last 50 per class are test, the rest go through the long-tail split.
  std::vector<int> seen(6, 0);
  for (auto& it : c.manifest.items)
    if (seen[static_cast<std::size_t>(it.class_id)]++ >= 100) it.split = Split::kTest;
  c.manifest = make_longtail_split(c.manifest, 100, 2, 3);
  EmbeddingSet train = embed_items(c, Split::kHead);
  const EmbeddingSet tail = embed_items(c, Split::kTail);
  train.vectors.conservativeResize(train.size() + tail.size(), Eigen::NoChange);
  train.vectors.bottomRows(tail.size()) = tail.vectors;
  train.labels.insert(train.labels.end(), tail.labels.begin(), tail.labels.end());

  std::vector<int> heads;
  for (int cls = 0; cls < 6; ++cls)
    if (c.manifest.count(cls, Split::kHead) > 0) heads.push_back(cls);
  ASSERT_EQ(heads.size(), 3u);

  LinearProbe probe;
  probe.fit(train, 6);
  const ProbeScores s = score_probe(probe, embed_items(c, Split::kTest), heads);
  EXPECT_LT(s.tail_accuracy, s.long_accuracy);
  EXPECT_NEAR(s.average, 0.5 * (s.long_accuracy + s.tail_accuracy), 1e-12);
}

TEST(Probe, DeterministicFit) {
  Corpus c = generate_toy_corpus(3, 20, 16, 2);
  make_fewshot_split(c.manifest, 10);
  const EmbeddingSet train = embed_items(c, Split::kFewShot), test = embed_items(c, Split::kTest);
  LinearProbe a, b;
  a.fit(train, 3);
  b.fit(train, 3);
  EXPECT_EQ(a.logits(test.vectors), b.logits(test.vectors));
  EXPECT_EQ(a.predict(test.vectors).size(), static_cast<std::size_t>(test.size()));
}

TEST(Probe, AbsentClassesScoreNaN) {
  EmbeddingSet train{Eigen::MatrixXd::Identity(3, 3), {0, 1, 2}};
  LinearProbe p;
  p.fit(train, 3);
  const ProbeScores s = score_probe(p, EmbeddingSet{Eigen::MatrixXd::Identity(3, 3).topRows(2), {0, 1}});
  EXPECT_TRUE(std::isnan(s.per_class[2]));
  EXPECT_EQ(s.accuracy, 1.0);
}

TEST(Probe, Errors) {
  EmbeddingSet train{Eigen::MatrixXd::Identity(2, 2), {0, 1}};
  LinearProbe p;
  EXPECT_THROW(p.fit(train, 1), ParameterError);
  EXPECT_THROW(p.predict(Eigen::MatrixXd::Identity(2, 2)), ParameterError);
  EXPECT_THROW(p.fit(EmbeddingSet{Eigen::MatrixXd::Identity(2, 2), {0, 4}}, 2), DataError);
  p.fit(train, 2);
  EXPECT_THROW(p.predict(Eigen::MatrixXd::Identity(3, 3)), DimensionError);
  EXPECT_THROW(score_probe(p, EmbeddingSet{Eigen::MatrixXd(0, 2), {}}), SampleSizeError);
}

}  // namespace
}  // namespace mhlora
