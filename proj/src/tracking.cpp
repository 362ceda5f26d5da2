#include "tangible/tracking.hpp"

#include <cmath>

#include "json.hpp"

namespace tangible {

PointerDetection detect_pointer_2d(const RgbImage& rgb, const HueBounds& bounds) {
  BinaryMask keep(rgb.width(), rgb.height());
  auto pr = rgb.pixels();
  auto pk = keep.pixels();
  for (std::size_t i = 0; i < pr.size(); ++i) pk[i] = hue_in_bounds(rgb_to_hsv(pr[i]), bounds);

  const ComponentLabels cc = label_components(keep);
  if (cc.components.empty()) {
    throw Error(ErrorCode::NoPointer, "no pixel inside the hue bounds");
  }
  const Component* best = &cc.components[0];
  for (const Component& c : cc.components) {
    if (c.area > best->area) best = &c;
  }
  if (best->area < kMinPointerArea) {
    throw Error(ErrorCode::NoPointer, "largest in-bounds blob has only " +
                                          std::to_string(best->area) + " px");
  }
  return {best->bbox.center(), best->bbox};
}

double estimate_pointer_depth(const DepthImage& depth, const Rect& bbox) {
  if (bbox.w < 1 || bbox.h < 1 || !depth.contains(bbox.x, bbox.y) ||
      !depth.contains(bbox.x + bbox.w - 1, bbox.y + bbox.h - 1)) {
    throw Error(ErrorCode::InvalidArgument, "depth crop outside the image");
  }
  std::uint64_t sum = 0, count = 0;
  for (int y = bbox.y; y < bbox.y + bbox.h; ++y) {
    for (int x = bbox.x; x < bbox.x + bbox.w; ++x) {
      if (const std::uint16_t v = depth.at(x, y)) {
        sum += v;
        ++count;
      }
    }
  }
  if (count == 0) throw Error(ErrorCode::NoDepth, "depth crop is all shadow");

  // Keep v <= 1.1 * sum / count, compared exactly in integers.
  std::uint64_t kept_sum = 0, kept = 0;
  for (int y = bbox.y; y < bbox.y + bbox.h; ++y) {
    for (int x = bbox.x; x < bbox.x + bbox.w; ++x) {
      const std::uint64_t v = depth.at(x, y);
      if (v == 0 || 10 * v * count > 11 * sum) continue;
      kept_sum += v;
      ++kept;
    }
  }
  if (kept == 0) throw Error(ErrorCode::AllFiltered, "depth filter removed every sample");
  return static_cast<double>(kept_sum) / static_cast<double>(kept) * depth.raw_to_mm();
}

Point2 correct_parallax(Point2 b, Point2 o, double h, double camera_height) {
  if (!(camera_height > 0)) {
    throw Error(ErrorCode::InvalidArgument, "camera height must be positive");
  }
  if (!(h >= 0) || h >= camera_height) {
    throw Error(ErrorCode::InvalidHeight, "pointer height outside [0, H)");
  }
  if (h == 0) return b;
  return o + (b - o) * (1.0 - h / camera_height);
}

DepthImage align_depth(const DepthImage& depth, const CalibrationProfile& cal,
                       int rgb_width, int rgb_height) {
  const DepthImage scaled(static_cast<const Image<std::uint16_t>&>(depth), cal.raw_to_mm);
  return warp_affine(scaled, cal.depth_to_rgb, rgb_width, rgb_height);
}

PointerFix track_frame(const FramePair& frame, const CalibrationProfile& cal) {
  if (!frame.rgb.same_size(frame.depth)) {
    throw Error(ErrorCode::DimensionMismatch, "depth frame is not aligned to the RGB frame");
  }
  const PointerDetection det = detect_pointer_2d(frame.rgb, cal.hue_bounds);

  PointerFix fix;
  fix.pixel = det.center;
  fix.bbox = det.bbox;
  fix.depth_mm = estimate_pointer_depth(frame.depth, det.bbox);

  const double H = cal.camera_height_mm;
  double h = H - fix.depth_mm;
  if (h < 0) {
    if (-h > kHeightTolerance * H) {
      throw Error(ErrorCode::InvalidHeight, "pointer measured below the marker plane");
    }
    h = 0;
  }
  const Point2 a = correct_parallax(det.center, cal.principal_point, h, H);
  const Point2 v = cal.t_rv.apply(a);
  fix.real = {a.x, a.y, h};
  fix.virtual_pos = {v.x, v.y, cal.t_rv.rho_z * h};
  return fix;
}

std::string fix_to_json(std::size_t seq, std::size_t frame,
                        const std::optional<PointerFix>& fix,
                        std::string_view status) {
  using json = nlohmann::ordered_json;
  json j;
  j["seq"] = seq;
  j["frame"] = frame;
  if (fix) {
    j["px"] = {fix->pixel.x, fix->pixel.y};
    j["depth_mm"] = fix->depth_mm;
    j["real"] = {fix->real.x, fix->real.y, fix->real.z};
    j["virtual"] = {fix->virtual_pos.x, fix->virtual_pos.y, fix->virtual_pos.z};
  } else {
    j["px"] = nullptr;
    j["depth_mm"] = nullptr;
    j["real"] = nullptr;
    j["virtual"] = nullptr;
  }
  j["status"] = status;
  return j.dump();
}

}  // namespace tangible
