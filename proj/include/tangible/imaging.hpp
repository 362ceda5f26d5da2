#pragma once

// Raster types and pixel-level primitives shared by the whole pipeline.
//
// Coordinate convention: pixel (x, y) has its center at the real point
// (x, y). Rows are stored top to bottom, so +y points down in the image.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "tangible/error.hpp"

namespace tangible {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(Point2 a, double s) { return {a.x * s, a.y * s}; }
  friend bool operator==(Point2, Point2) = default;
};

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(Point3, Point3) = default;
};

double distance(Point2 a, Point2 b);

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(Rgb, Rgb) = default;
};

// h on the half-degree scale [0, 179]; s, v in [0, 255].
struct Hsv {
  std::uint8_t h = 0, s = 0, v = 0;
  friend bool operator==(Hsv, Hsv) = default;
};

// Dense row-major raster. Width and height are always >= 1.
template <class Pixel>
class Image {
 public:
  using value_type = Pixel;

  Image() : Image(1, 1) {}
  Image(int width, int height, Pixel fill = Pixel{})
      : width_(width), height_(height) {
    if (width < 1 || height < 1) {
      throw Error(ErrorCode::InvalidArgument, "image dimensions must be >= 1");
    }
    pixels_.assign(static_cast<std::size_t>(width) * height, fill);
  }
  Image(int width, int height, std::vector<Pixel> pixels)
      : width_(width), height_(height), pixels_(std::move(pixels)) {
    if (width < 1 || height < 1 ||
        pixels_.size() != static_cast<std::size_t>(width) * height) {
      throw Error(ErrorCode::InvalidArgument,
                  "pixel buffer does not match image dimensions");
    }
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return pixels_.size(); }

  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  Pixel& at(int x, int y) { return pixels_[index(x, y)]; }
  const Pixel& at(int x, int y) const { return pixels_[index(x, y)]; }

  std::span<Pixel> pixels() noexcept { return pixels_; }
  std::span<const Pixel> pixels() const noexcept { return pixels_; }

  template <class Other>
  bool same_size(const Image<Other>& other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  int width_;
  int height_;
  std::vector<Pixel> pixels_;
};

using RgbImage = Image<Rgb>;
using HsvImage = Image<Hsv>;
using GrayImage = Image<std::uint8_t>;
// 0 = unset, 1 = set. Any nonzero value is treated as set on input.
using BinaryMask = Image<std::uint8_t>;

// Raw 16-bit depth samples; 0 marks no return (IR shadow or out of view).
class DepthImage : public Image<std::uint16_t> {
 public:
  DepthImage() = default;
  DepthImage(int width, int height, double raw_to_mm = 1.0,
             std::uint16_t fill = 0);
  DepthImage(Image<std::uint16_t> raw, double raw_to_mm);

  double raw_to_mm() const noexcept { return raw_to_mm_; }

  friend bool operator==(const DepthImage&, const DepthImage&) = default;

 private:
  double raw_to_mm_ = 1.0;
};

// Maps depth-image pixel coordinates into RGB-image pixel coordinates:
//   x' = m[0] x + m[1] y + m[2],  y' = m[3] x + m[4] y + m[5]
struct AffineTransform {
  std::array<double, 6> m{1.0, 0.0, 0.0, 0.0, 1.0, 0.0};

  static AffineTransform identity() { return {}; }
  static AffineTransform translation(double dx, double dy) {
    return {{1.0, 0.0, dx, 0.0, 1.0, dy}};
  }

  double determinant() const noexcept { return m[0] * m[4] - m[1] * m[3]; }
  Point2 apply(Point2 p) const noexcept {
    return {m[0] * p.x + m[1] * p.y + m[2], m[3] * p.x + m[4] * p.y + m[5]};
  }
  // Throws SingularTransform when the linear part is not invertible.
  AffineTransform inverse() const;

  friend bool operator==(const AffineTransform&, const AffineTransform&) = default;
};

struct Rect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  Point2 center() const noexcept {
    return {x + (w - 1) / 2.0, y + (h - 1) / 2.0};
  }
  friend bool operator==(Rect, Rect) = default;
};

using Histogram256 = std::array<std::uint64_t, 256>;
using HueHistogram = std::array<std::uint64_t, 180>;

Hsv rgb_to_hsv(Rgb p) noexcept;
HsvImage rgb_to_hsv(const RgbImage& img);
// Inverse hexcone conversion for hue on the 0..179 scale.
Rgb hsv_to_rgb(Hsv p) noexcept;

// Per-pixel max over channels of |a - b|.
GrayImage abs_diff(const RgbImage& a, const RgbImage& b);

Histogram256 histogram(const GrayImage& img);

// Smallest t maximizing the between-class variance of {<= t} / {> t},
// searched over thresholds whose lower class is nonempty.
std::uint8_t otsu_threshold(const Histogram256& hist);

// Pixels strictly above the threshold are set.
BinaryMask threshold_above(const GrayImage& img, std::uint8_t t);

// 3x3 majority vote (>= 5 of 9) with zero padding.
BinaryMask smooth_binary(const BinaryMask& mask);

struct Component {
  std::size_t area = 0;
  Rect bbox;
  // Row-major index of the first set pixel met in a raster scan.
  std::size_t first_pixel = 0;
};

struct ComponentLabels {
  // 0 = background, otherwise component index + 1.
  Image<std::int32_t> labels;
  std::vector<Component> components;
};

// 8-connected labelling of set pixels, components ordered by first pixel.
ComponentLabels label_components(const BinaryMask& mask);

// Unset regions that do not touch the image border become set.
BinaryMask fill_holes(const BinaryMask& mask);

// The largest 8-connected component with its holes filled. Ties go to the
// component whose first set pixel comes first in row-major order.
// Throws EmptyMask when no pixel is set.
BinaryMask largest_component(const BinaryMask& mask);

std::size_t count_set(const BinaryMask& mask) noexcept;

// Nearest-neighbour resampling of `img` into the frame that `t` maps to.
// Destination pixels whose preimage falls outside the source are 0.
DepthImage warp_affine(const DepthImage& img, const AffineTransform& t);
DepthImage warp_affine(const DepthImage& img, const AffineTransform& t,
                       int out_width, int out_height);

HueHistogram hue_histogram(const HsvImage& img, const BinaryMask& mask);

// Smallest index of the maximum value.
template <class Array>
std::size_t argmax(const Array& values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

}  // namespace tangible
