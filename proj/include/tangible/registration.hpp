#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "tangible/color_calibration.hpp"
#include "tangible/corner_detection.hpp"
#include "tangible/imaging.hpp"

namespace tangible {

// Projective map from corrected image coordinates to virtual coordinates,
// plus the scalar converting height above the marker plane (mm) to virtual z.
struct Homography {
  Eigen::Matrix3d matrix = Eigen::Matrix3d::Identity();
  double rho_z = 1.0;

  Point2 apply(Point2 p) const;
};

Point2 apply_homography(const Eigen::Matrix3d& m, Point2 p);

// Corners of the virtual marker and its centre, in virtual units.
struct VirtualMarker {
  static constexpr std::array<Point2, 4> corners{
      Point2{-0.5, -0.75}, Point2{0.5, -0.75}, Point2{0.5, 0.75}, Point2{-0.5, 0.75}};
  static constexpr Point2 centroid{0.0, 0.0};
};

struct HomographyFit {
  Eigen::Matrix3d matrix;
  // Mean Euclidean reprojection error in destination units.
  double residual = 0.0;
};

// Normalized DLT least-squares fit mapping src onto dst. Both sets are
// translated to zero mean and scaled to mean distance sqrt(2) first. The
// result has h33 = 1 when h33 is nonzero. Throws Degenerate when no 4 source
// points are free of collinear triples, or the system is rank-deficient.
HomographyFit estimate_homography(std::span<const Point2> src,
                                  std::span<const Point2> dst);

// Sorts 4 corners counter-clockwise on screen (decreasing atan2 angle in
// image coordinates) about the centroid, starting with the corner angularly
// nearest the top-left diagonal. For an upright rectangle the result is
// top-left, bottom-left, bottom-right, top-right.
std::array<Point2, 4> order_corners(std::span<const Point2> corners, Point2 centroid);

// Virtual targets paired with order_corners output, so an upright marker
// maps top-left to (-0.5, -0.75) and bottom-right to (0.5, 0.75).
std::array<Point2, 4> virtual_targets_for_ordered_corners();

// Rig parameters that are measured, not estimated.
struct RigConfig {
  AffineTransform depth_to_rgb;
  double camera_height_mm = 1000.0;
  Point2 principal_point{320.0, 240.0};
  double rho_z = 1.0;
  double raw_to_mm = 1.0;
};

struct CalibrationProfile {
  AffineTransform depth_to_rgb;
  HueBounds hue_bounds;
  Homography t_rv;
  double camera_height_mm = 1000.0;
  Point2 principal_point;
  double raw_to_mm = 1.0;

  // Throws SpecViolation when an invariant does not hold.
  void validate() const;
};

struct CalibrationReport {
  CalibrationProfile profile;
  CornerSet corner_set;
  std::array<Point2, 4> ordered_corners;
  Point2 marker_centroid;
  double residual = 0.0;
  int hue_peak = 0;
};

inline constexpr double kMaxCalibrationResidual = 2e-2;

// One-shot initialization from three captures: empty desk, desk with the
// marker, and desk with marker and pointer. The pointer's colour is keyed
// from the (with_marker, with_pointer) pair.
CalibrationReport build_calibration(const RgbImage& background,
                                    const RgbImage& with_marker,
                                    const RgbImage& with_pointer,
                                    const RigConfig& rig);

std::string profile_to_json(const CalibrationProfile& profile);
CalibrationProfile profile_from_json(std::string_view text);
void save_profile(const std::filesystem::path& path, const CalibrationProfile& profile);
CalibrationProfile load_profile(const std::filesystem::path& path);

}  // namespace tangible
