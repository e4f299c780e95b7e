// Copyright 2026 The mhlora Authors
// SPDX-License-Identifier: Apache-2.0

#include "mhlora/crop.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "mhlora/errors.hpp"

namespace mhlora {

Box::Box(int x0, int y0, int x1, int y1) : x0_(x0), y0_(y0), x1_(x1), y1_(y1) {
  if (x0 >= x1 || y0 >= y1) throw ShapeError("degenerate box " + to_string(*this));
}

std::string to_string(const Box& b) {
  return "(" + std::to_string(b.x0()) + "," + std::to_string(b.y0()) + "," +
         std::to_string(b.x1()) + "," + std::to_string(b.y1()) + ")";
}

void JitterParams::validate() const {
  if (!(scale_min > 0.0) || scale_max < scale_min)
    throw ParameterError("crop scale bounds must satisfy 0 < scale_min <= scale_max");
  if (!(max_translate >= 0.0 && max_translate <= 1.0))
    throw ParameterError("max_translate must lie in [0, 1]");
}

Box enclosing_box(std::span<const Box> boxes) {
  if (boxes.empty()) throw DataError("missing box: no boxes to enclose");
  int x0 = boxes[0].x0(), y0 = boxes[0].y0(), x1 = boxes[0].x1(), y1 = boxes[0].y1();
  for (const Box& b : boxes.subspan(1)) {
    x0 = std::min(x0, b.x0());
    y0 = std::min(y0, b.y0());
    x1 = std::max(x1, b.x1());
    y1 = std::max(y1, b.y1());
  }
  return {x0, y0, x1, y1};
}

Box enclosing_box_or_full(std::span<const Box> boxes, int image_w, int image_h) {
  if (boxes.empty()) return {0, 0, image_w, image_h};
  return enclosing_box(boxes);
}

namespace {

struct AxisPlacement {
  int start = 0;  // window start in source coordinates (may be negative)
  int pad_before = 0;
  int pad_after = 0;
};

// Places a window of `extent` pixels along one axis so that it covers
// [lo, hi). Prefers positions fully inside [0, size) and pads only when the
// window cannot fit there.
AxisPlacement place_axis(int size, int lo, int hi, int extent, double max_translate,
                         Rng& rng) {
  const int slack = extent - (hi - lo);
  const double centred = lo - 0.5 * slack;
  double offset = 0.0;
  if (slack > 0 && max_translate > 0.0) {
    const double half = 0.5 * max_translate * slack;
    offset = std::uniform_real_distribution<double>(-half, half)(rng);
  }
  int start = static_cast<int>(std::lround(centred + offset));

  const int contain_lo = hi - extent;  // window must start at or before lo
  const int contain_hi = lo;
  const int inside_lo = std::max(contain_lo, 0);
  const int inside_hi = std::min(contain_hi, size - extent);
  if (inside_lo <= inside_hi)
    start = std::clamp(start, inside_lo, inside_hi);
  else
    start = std::clamp(start, contain_lo, contain_hi);

  AxisPlacement p;
  p.start = start;
  p.pad_before = std::max(0, -start);
  p.pad_after = std::max(0, start + extent - size);
  return p;
}

}  // namespace

CropSpec sample_crop(int image_w, int image_h, const Box& b_star, int target_w, int target_h,
                     const JitterParams& jitter, Rng& rng) {
  jitter.validate();
  if (target_w < 1 || target_h < 1) throw ParameterError("crop target must be positive");
  if (!b_star.within(image_w, image_h))
    throw ShapeError("enclosing box " + to_string(b_star) + " lies outside the image");

  const double base = jitter.reference == CropReference::kBox
                          ? std::max(b_star.width(), b_star.height())
                          : std::max(image_w, image_h);
  std::uniform_real_distribution<double> scale(jitter.scale_min, jitter.scale_max);
  const double sw = scale(rng);
  const double sh = jitter.isotropic ? sw : scale(rng);
  const int extent_w = std::max(b_star.width(), static_cast<int>(std::ceil(sw * base - 1e-9)));
  const int extent_h = std::max(b_star.height(), static_cast<int>(std::ceil(sh * base - 1e-9)));

  const AxisPlacement px =
      place_axis(image_w, b_star.x0(), b_star.x1(), extent_w, jitter.max_translate, rng);
  const AxisPlacement py =
      place_axis(image_h, b_star.y0(), b_star.y1(), extent_h, jitter.max_translate, rng);

  CropSpec spec;
  spec.pad_left = px.pad_before;
  spec.pad_right = px.pad_after;
  spec.pad_top = py.pad_before;
  spec.pad_bottom = py.pad_after;
  spec.region = Box(px.start + px.pad_before, py.start + py.pad_before,
                    px.start + px.pad_before + extent_w, py.start + py.pad_before + extent_h);
  spec.target_w = target_w;
  spec.target_h = target_h;
  spec.image_w = image_w;
  spec.image_h = image_h;
  return spec;
}

namespace {

// Pixel of the zero-padded canvas.
double canvas_pixel(const Image& image, const CropSpec& spec, int cx, int cy) {
  const int x = cx - spec.pad_left;
  const int y = cy - spec.pad_top;
  if (x < 0 || y < 0 || x >= image.width || y >= image.height) return 0.0;
  return image.at(x, y);
}

}  // namespace

Image apply_crop(const Image& image, const CropSpec& spec) {
  if (image.width != spec.image_w || image.height != spec.image_h)
    throw DimensionError("crop spec was sampled for a " + std::to_string(spec.image_w) + "x" +
                         std::to_string(spec.image_h) + " image, got " +
                         std::to_string(image.width) + "x" + std::to_string(image.height));
  const Box& r = spec.region;
  if (r.x0() < 0 || r.y0() < 0 || r.x1() > spec.canvas_w() || r.y1() > spec.canvas_h())
    throw DimensionError("crop region lies outside the padded canvas");

  Image out(spec.target_w, spec.target_h);
  if (r.width() == spec.target_w && r.height() == spec.target_h) {
    for (int v = 0; v < spec.target_h; ++v)
      for (int u = 0; u < spec.target_w; ++u)
        out.at(u, v) = canvas_pixel(image, spec, r.x0() + u, r.y0() + v);
    return out;
  }

  const double fx = static_cast<double>(r.width()) / spec.target_w;
  const double fy = static_cast<double>(r.height()) / spec.target_h;
  for (int v = 0; v < spec.target_h; ++v) {
    // Pixel-centre alignment, clamped to the region so no tap leaves it.
    const double sy = std::clamp(r.y0() + (v + 0.5) * fy - 0.5, static_cast<double>(r.y0()),
                                 static_cast<double>(r.y1() - 1));
    const int y0 = static_cast<int>(std::floor(sy));
    const int y1 = std::min(y0 + 1, r.y1() - 1);
    const double ty = sy - y0;
    for (int u = 0; u < spec.target_w; ++u) {
      const double sx = std::clamp(r.x0() + (u + 0.5) * fx - 0.5, static_cast<double>(r.x0()),
                                   static_cast<double>(r.x1() - 1));
      const int x0 = static_cast<int>(std::floor(sx));
      const int x1 = std::min(x0 + 1, r.x1() - 1);
      const double tx = sx - x0;
      const double top = (1 - tx) * canvas_pixel(image, spec, x0, y0) +
                         tx * canvas_pixel(image, spec, x1, y0);
      const double bottom = (1 - tx) * canvas_pixel(image, spec, x0, y1) +
                            tx * canvas_pixel(image, spec, x1, y1);
      out.at(u, v) = (1 - ty) * top + ty * bottom;
    }
  }
  return out;
}

RectF map_box_to_output(const CropSpec& spec, const Box& box) {
  const Box& r = spec.region;
  const double fx = static_cast<double>(spec.target_w) / r.width();
  const double fy = static_cast<double>(spec.target_h) / r.height();
  const double bx0 = box.x0() + spec.pad_left - r.x0();
  const double by0 = box.y0() + spec.pad_top - r.y0();
  return {bx0 * fx, by0 * fy, (bx0 + box.width()) * fx, (by0 + box.height()) * fy};
}

}  // namespace mhlora
