// Copyright 2026 The mhlora Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>

#include "mhlora/adapter.hpp"
#include "mhlora/image.hpp"

namespace mhlora {

// Half-open pixel rectangle [x0, x1) x [y0, y1) with positive area.
class Box {
 public:
  Box(int x0, int y0, int x1, int y1);  // throws ShapeError when degenerate

  int x0() const { return x0_; }
  int y0() const { return y0_; }
  int x1() const { return x1_; }
  int y1() const { return y1_; }
  int width() const { return x1_ - x0_; }
  int height() const { return y1_ - y0_; }

  bool contains(const Box& other) const {
    return x0_ <= other.x0_ && y0_ <= other.y0_ && other.x1_ <= x1_ && other.y1_ <= y1_;
  }
  bool within(int w, int h) const { return x0_ >= 0 && y0_ >= 0 && x1_ <= w && y1_ <= h; }
  Box translated(int dx, int dy) const { return {x0_ + dx, y0_ + dy, x1_ + dx, y1_ + dy}; }

  friend bool operator==(const Box&, const Box&) = default;

 private:
  int x0_, y0_, x1_, y1_;
};

std::string to_string(const Box& b);

// What the crop scale multiplies: the longer side of b* (tight, object-centred
// views) or the longer side of the image (whole-frame views that only shift
// and zoom out).
enum class CropReference { kBox, kImage };

struct JitterParams {
  double scale_min = 1.0;      // window extent relative to the reference extent
  double scale_max = 1.3;
  double max_translate = 1.0;  // fraction of the slack the window may shift
  bool isotropic = false;      // one scale for both axes
  CropReference reference = CropReference::kBox;

  void validate() const;  // throws ParameterError
};

// Crop window on the zero-padded canvas. The source image occupies
// [pad_left, pad_left + image_w) x [pad_top, pad_top + image_h) of that canvas.
struct CropSpec {
  Box region{0, 0, 1, 1};
  int pad_left = 0;
  int pad_right = 0;
  int pad_top = 0;
  int pad_bottom = 0;
  int target_w = 0;
  int target_h = 0;
  int image_w = 0;
  int image_h = 0;

  int canvas_w() const { return image_w + pad_left + pad_right; }
  int canvas_h() const { return image_h + pad_top + pad_bottom; }
  bool padded() const { return pad_left + pad_right + pad_top + pad_bottom > 0; }
};

// Minimal box enclosing every input box. Throws DataError on an empty list.
Box enclosing_box(std::span<const Box> boxes);

// enclosing_box, falling back to the full image when no boxes are available.
Box enclosing_box_or_full(std::span<const Box> boxes, int image_w, int image_h);

CropSpec sample_crop(int image_w, int image_h, const Box& b_star, int target_w, int target_h,
                     const JitterParams& jitter, Rng& rng);

// Cuts the region out of the zero-padded image and resamples it bilinearly to
// the target size (a plain copy when the region already has that size).
Image apply_crop(const Image& image, const CropSpec& spec);

struct RectF {
  double x0, y0, x1, y1;
  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
};

// Where a box of the source image lands in the cropped output.
RectF map_box_to_output(const CropSpec& spec, const Box& box);

}  // namespace mhlora
