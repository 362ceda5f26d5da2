#include "tangible/color_calibration.hpp"

#include "tangible/mask_extraction.hpp"

namespace tangible {

HueBounds HueBounds::around(int peak) {
  if (peak < 0 || peak >= kHueBins) {
    throw Error(ErrorCode::InvalidArgument, "hue peak outside 0..179");
  }
  HueBounds b;
  const int lo = peak - kHueMargin;
  const int hi = peak + kHueMargin;
  b.wraps = lo < 0 || hi >= kHueBins;
  b.lo = (lo + kHueBins) % kHueBins;
  b.hi = hi % kHueBins;
  return b;
}

bool hue_in_bounds(int h, int s, int v, const HueBounds& b) noexcept {
  if (s < b.min_saturation || v < b.min_value) return false;
  if (b.wraps) return h >= b.lo || h <= b.hi;
  return h >= b.lo && h <= b.hi;
}

HueCalibration calibrate_hue(const RgbImage& background,
                             const RgbImage& with_pointer,
                             std::size_t min_area) {
  HueCalibration out;
  out.mask = extract_mask(background, with_pointer, min_area);
  const HsvImage hsv = rgb_to_hsv(with_pointer);
  const HueBounds defaults;

  BinaryMask saturated(hsv.width(), hsv.height());
  std::size_t masked = 0, passing = 0;
  auto ph = hsv.pixels();
  auto pm = out.mask.pixels();
  auto ps = saturated.pixels();
  for (std::size_t i = 0; i < ph.size(); ++i) {
    if (!pm[i]) continue;
    ++masked;
    if (ph[i].s >= defaults.min_saturation) {
      ps[i] = 1;
      ++passing;
    }
  }
  if (2 * passing < masked || passing == 0) {
    throw Error(ErrorCode::LowSaturation,
                "object too gray to colour-key: " + std::to_string(passing) +
                    " of " + std::to_string(masked) + " pixels saturated");
  }

  out.peak = static_cast<int>(argmax(hue_histogram(hsv, saturated)));
  out.bounds = HueBounds::around(out.peak);
  return out;
}

HueBounds calibrate_hue_bounds(const RgbImage& background,
                               const RgbImage& with_pointer) {
  return calibrate_hue(background, with_pointer).bounds;
}

}  // namespace tangible
