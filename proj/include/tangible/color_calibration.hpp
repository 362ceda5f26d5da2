#pragma once

#include <cstdint>

#include "tangible/imaging.hpp"

namespace tangible {

inline constexpr int kHueBins = 180;
inline constexpr int kHueMargin = 15;

// Hue interval [lo, hi] on the 0..179 scale. When `wraps` is set the
// interval runs lo..179 then 0..hi.
struct HueBounds {
  int lo = 0;
  int hi = 0;
  bool wraps = false;
  std::uint8_t min_saturation = 60;
  std::uint8_t min_value = 40;

  // Interval of peak +/- kHueMargin taken modulo 180.
  static HueBounds around(int peak);

  friend bool operator==(const HueBounds&, const HueBounds&) = default;
};

bool hue_in_bounds(int h, int s, int v, const HueBounds& b) noexcept;
inline bool hue_in_bounds(Hsv p, const HueBounds& b) noexcept {
  return hue_in_bounds(p.h, p.s, p.v, b);
}

struct HueCalibration {
  HueBounds bounds;
  int peak = 0;
  BinaryMask mask;
};

// Calibrates the pointer colour from an image pair without / with the
// pointer. Only masked pixels with s >= min_saturation enter the histogram;
// LowSaturation is thrown when fewer than half of the masked pixels pass.
HueCalibration calibrate_hue(const RgbImage& background,
                             const RgbImage& with_pointer,
                             std::size_t min_area = 200);

HueBounds calibrate_hue_bounds(const RgbImage& background,
                               const RgbImage& with_pointer);

}  // namespace tangible
