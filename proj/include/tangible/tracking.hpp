#pragma once

#include <optional>
#include <string>

#include "tangible/imaging.hpp"
#include "tangible/registration.hpp"

namespace tangible {

inline constexpr std::size_t kMinPointerArea = 20;
// Heights below the plane within this fraction of H are clamped to 0.
inline constexpr double kHeightTolerance = 0.02;

struct PointerFix {
  Point2 pixel;        // B: observed pointer position in the RGB image
  Rect bbox;
  double depth_mm = 0.0;
  Point3 real;         // (x_A, y_A) corrected image position, z = height in mm
  Point3 virtual_pos;  // T_RV (x_A, y_A), rho_z * height
};

// RGB frame plus a depth frame already aligned into RGB pixel coordinates.
struct FramePair {
  RgbImage rgb;
  DepthImage depth;
};

struct PointerDetection {
  Point2 center;
  Rect bbox;
};

// Largest 8-connected blob of in-bounds pixels; center = bbox center.
// Throws NoPointer when the blob is missing or smaller than kMinPointerArea.
PointerDetection detect_pointer_2d(const RgbImage& rgb, const HueBounds& bounds);

// Two-pass mean over the bbox crop: average the nonzero samples, discard
// samples above 1.1x that average, average again. Returns millimetres.
double estimate_pointer_depth(const DepthImage& depth, const Rect& bbox);

// Moves the observed position B towards O by the parallax of a point at
// height h under a camera at height H: A = O + (B - O)(1 - h / H).
Point2 correct_parallax(Point2 b, Point2 o, double h, double camera_height);

// Depth frame warped into the RGB frame with the profile's affine.
DepthImage align_depth(const DepthImage& depth, const CalibrationProfile& cal,
                       int rgb_width, int rgb_height);

PointerFix track_frame(const FramePair& frame, const CalibrationProfile& cal);

// One JSONL record; `fix` empty means an error frame with `status` as the
// error name and null coordinates.
std::string fix_to_json(std::size_t seq, std::size_t frame,
                        const std::optional<PointerFix>& fix,
                        std::string_view status);

}  // namespace tangible
