// Copyright 2026 The mhlora Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "mhlora/crop.hpp"
#include "mhlora/errors.hpp"

namespace mhlora {
namespace {

Image checkerboard(int w, int h) {
  Image img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img.at(x, y) = ((x + y) % 2 == 0) ? 1.0 : 0.5;
  return img;
}

Box random_box(int w, int h, Rng& rng) {
  std::uniform_int_distribution<int> xs(0, w - 1), ys(0, h - 1);
  int x0 = xs(rng), x1 = xs(rng), y0 = ys(rng), y1 = ys(rng);
  if (x0 > x1) std::swap(x0, x1);
  if (y0 > y1) std::swap(y0, y1);
  return {x0, y0, x1 + 1, y1 + 1};
}

// The window in source coordinates must contain b*.
bool window_contains(const CropSpec& s, const Box& b) {
  const Box src(s.region.x0() - s.pad_left, s.region.y0() - s.pad_top, s.region.x1() - s.pad_left,
                s.region.y1() - s.pad_top);
  return src.contains(b);
}

// The same crop taken from an explicitly zero-padded copy of the image.
Image crop_of_padded_canvas(const Image& img, const CropSpec& s) {
  Image canvas(s.canvas_w(), s.canvas_h(), 0.0);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) canvas.at(x + s.pad_left, y + s.pad_top) = img.at(x, y);
  CropSpec flat = s;
  flat.pad_left = flat.pad_right = flat.pad_top = flat.pad_bottom = 0;
  flat.image_w = canvas.width;
  flat.image_h = canvas.height;
  return apply_crop(canvas, flat);
}

TEST(Box, RejectsDegenerate) {
  EXPECT_THROW(Box(2, 2, 2, 5), ShapeError);
  EXPECT_THROW(Box(3, 1, 1, 4), ShapeError);
  EXPECT_NO_THROW(Box(0, 0, 1, 1));
}

TEST(EnclosingBox, UnionOfBoxes) {
  const std::vector<Box> boxes{{2, 3, 5, 6}, {1, 4, 3, 9}, {4, 0, 7, 2}};
  EXPECT_EQ(enclosing_box(boxes), Box(1, 0, 7, 9));
  EXPECT_EQ(enclosing_box(std::span(boxes).first(1)), boxes[0]);
  EXPECT_THROW(enclosing_box({}), DataError);
  EXPECT_EQ(enclosing_box_or_full({}, 16, 12), Box(0, 0, 16, 12));
}

TEST(SampleCrop, ContainsBoxOnRandomCases) {
  Rng rng(99);
  std::uniform_int_distribution<int> dim(4, 40);
  std::uniform_real_distribution<double> s_lo(0.2, 1.5), s_span(0.0, 1.5), tr(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const int w = dim(rng), h = dim(rng);
    const Box b = random_box(w, h, rng);
    JitterParams j;
    j.scale_min = s_lo(rng);
    j.scale_max = j.scale_min + s_span(rng);
    j.max_translate = tr(rng);
    j.isotropic = i % 3 == 0;
    j.reference = i % 2 == 0 ? CropReference::kBox : CropReference::kImage;
    const int tw = dim(rng), th = dim(rng);
    const CropSpec s = sample_crop(w, h, b, tw, th, j, rng);
    ASSERT_TRUE(window_contains(s, b)) << i;
    ASSERT_GE(s.region.x0(), 0);
    ASSERT_GE(s.region.y0(), 0);
    ASSERT_LE(s.region.x1(), s.canvas_w());
    ASSERT_LE(s.region.y1(), s.canvas_h());
    const Image out = apply_crop(checkerboard(w, h), s);
    ASSERT_EQ(out.width, tw);
    ASSERT_EQ(out.height, th);
    const RectF m = map_box_to_output(s, b);
    ASSERT_GE(m.x0, -1e-9);
    ASSERT_GE(m.y0, -1e-9);
    ASSERT_LE(m.x1, tw + 1e-9);
    ASSERT_LE(m.y1, th + 1e-9);
  }
}

TEST(SampleCrop, PaddingIsZero) {
  Rng rng(5);
  int padded = 0;
  for (int i = 0; i < 300; ++i) {
    const Image img = checkerboard(12, 9);
    const Box b = random_box(12, 9, rng);
    JitterParams j;
    j.scale_min = 1.2;
    j.scale_max = 2.5;
    const CropSpec s = sample_crop(12, 9, b, 10, 10, j, rng);
    padded += s.padded() ? 1 : 0;
    EXPECT_EQ(apply_crop(img, s), crop_of_padded_canvas(img, s)) << i;
    EXPECT_EQ(apply_crop(Image(12, 9, 0.0), s), Image(10, 10, 0.0));
  }
  EXPECT_GT(padded, 0);
}

TEST(SampleCrop, UnresampledCropCopiesPixels) {
  // A window as large as the target is copied pixel for pixel; outside the
  // source the copy reads zero.
  Rng rng(17);
  std::uniform_real_distribution<double> sc(0.5, 2.0);
  int padded = 0;
  for (int i = 0; i < 300; ++i) {
    const Image img = checkerboard(10, 10);
    const Box b = random_box(10, 10, rng);
    JitterParams j;
    j.scale_min = sc(rng);
    j.scale_max = j.scale_min + 0.5;
    j.reference = i % 2 ? CropReference::kImage : CropReference::kBox;
    CropSpec s = sample_crop(10, 10, b, 8, 8, j, rng);
    s.target_w = s.region.width();
    s.target_h = s.region.height();
    padded += s.padded() ? 1 : 0;
    const Image out = apply_crop(img, s);
    for (int v = 0; v < s.target_h; ++v) {
      for (int u = 0; u < s.target_w; ++u) {
        const int x = s.region.x0() + u - s.pad_left, y = s.region.y0() + v - s.pad_top;
        const bool inside = x >= 0 && y >= 0 && x < 10 && y < 10;
        ASSERT_EQ(out.at(u, v), inside ? ((x + y) % 2 == 0 ? 1.0 : 0.5) : 0.0);
      }
    }
  }
  EXPECT_GT(padded, 50);
}

TEST(SampleCrop, BoxReferenceScalesWithBox) {
  Rng rng(3);
  JitterParams j;
  j.scale_min = j.scale_max = 2.0;
  const CropSpec s = sample_crop(64, 64, Box(20, 20, 30, 25), 16, 16, j, rng);
  EXPECT_EQ(s.region.width(), 20);
  EXPECT_EQ(s.region.height(), 20);
  EXPECT_FALSE(s.padded());
}

TEST(SampleCrop, ImageReferenceScalesWithImage) {
  Rng rng(3);
  JitterParams j;
  j.scale_min = j.scale_max = 1.5;
  j.reference = CropReference::kImage;
  const CropSpec s = sample_crop(16, 16, Box(4, 4, 8, 8), 16, 16, j, rng);
  EXPECT_EQ(s.region.width(), 24);
  EXPECT_TRUE(s.padded());
}

TEST(SampleCrop, SmallScaleStillCoversBox) {
  Rng rng(1);
  JitterParams j;
  j.scale_min = 0.1;
  j.scale_max = 0.2;
  const Box b(3, 2, 13, 7);
  const CropSpec s = sample_crop(16, 16, b, 8, 8, j, rng);
  EXPECT_EQ(s.region.width(), b.width());
  EXPECT_EQ(s.region.height(), b.height());
  EXPECT_TRUE(window_contains(s, b));
}

TEST(SampleCrop, FullImageBoxNoJitter) {
  Rng rng(1);
  JitterParams j;
  j.scale_min = j.scale_max = 1.0;
  const CropSpec s = sample_crop(16, 16, Box(0, 0, 16, 16), 16, 16, j, rng);
  const Image img = checkerboard(16, 16);
  EXPECT_EQ(apply_crop(img, s), img);
}

TEST(SampleCrop, SeededDeterminism) {
  Rng a(42), b(42);
  JitterParams j;
  for (int i = 0; i < 20; ++i) {
    const CropSpec x = sample_crop(20, 20, Box(5, 6, 9, 12), 16, 16, j, a);
    const CropSpec y = sample_crop(20, 20, Box(5, 6, 9, 12), 16, 16, j, b);
    EXPECT_EQ(x.region, y.region);
    EXPECT_EQ(x.pad_left, y.pad_left);
  }
}

TEST(SampleCrop, Errors) {
  Rng rng(1);
  JitterParams bad;
  bad.scale_min = 2.0;
  bad.scale_max = 1.0;
  EXPECT_THROW(sample_crop(16, 16, Box(0, 0, 4, 4), 8, 8, bad, rng), ParameterError);
  EXPECT_THROW(sample_crop(16, 16, Box(10, 10, 20, 12), 8, 8, {}, rng), ShapeError);
  EXPECT_THROW(sample_crop(16, 16, Box(0, 0, 4, 4), 0, 8, {}, rng), ParameterError);
  const CropSpec s = sample_crop(16, 16, Box(0, 0, 4, 4), 8, 8, {}, rng);
  EXPECT_THROW(apply_crop(Image(15, 16), s), DimensionError);
}

}  // namespace
}  // namespace mhlora
