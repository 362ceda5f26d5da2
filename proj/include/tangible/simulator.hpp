#pragma once

// Synthetic RGB-D scenes with exact ground truth: a projectively warped
// marker rectangle on a desk plane, a coloured ball above the plane seen
// through a pinhole centred on the principal point, and the ball's IR
// shadow in the depth frame.

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "tangible/imaging.hpp"

namespace tangible {

struct BallSpec {
  double x_mm = 0.0;  // footprint on the marker plane
  double y_mm = 0.0;
  double height_mm = 0.0;
  double radius_mm = 20.0;
  Hsv color{20, 230, 240};
};

// Marker-plane (mm) to image (px) homography: rotation and scale about a
// centre, composed with a perspective term acting in plane coordinates.
Eigen::Matrix3d marker_pose(Point2 center_px, double px_per_mm, double rotation_rad,
                            double perspective_x = 0.0, double perspective_y = 0.0);

struct SceneSpec {
  int width = 640;
  int height = 480;
  double camera_height_mm = 1000.0;
  Point2 principal_point{320.0, 240.0};

  // Marker is the rectangle [-w/2, w/2] x [-0.75 w, 0.75 w] in plane mm,
  // matching the aspect of the virtual marker.
  double marker_width_mm = 200.0;
  Eigen::Matrix3d plane_to_image = marker_pose({320.0, 240.0}, 0.8, 0.0);
  bool show_marker = true;

  BallSpec ball;
  bool show_ball = true;

  Rgb background{150, 150, 140};
  Rgb marker_color{35, 35, 40};

  int hue_jitter = 0;    // max +/- bins on ball pixels (clipped normal)
  int depth_jitter = 0;  // uniform +/- raw units on nonzero depth samples
  double raw_to_mm = 1.0;
  Point2 shadow_offset_px{8.0, 0.0};
  AffineTransform depth_to_rgb;
  std::uint64_t seed = 0;

  // Throws SpecViolation.
  void validate() const;

  std::array<Point2, 4> marker_plane_corners() const;
};

struct GroundTruth {
  std::array<Point2, 4> marker_corners_px;
  Point2 marker_centroid_px;
  Point2 ball_center_px;  // B, where the ball appears
  Point2 ball_plane_px;   // A, its footprint on the plane
  Point3 ball_real_mm;
  Point3 expected_virtual;
  Eigen::Matrix3d t_rv_true;
  double rho_z_true = 0.0;
};

struct RenderedScene {
  RgbImage rgb;
  DepthImage depth;
  GroundTruth truth;
};

RenderedScene render_scene(const SceneSpec& spec);

// Rasters of the marker quadrangle and ball disc as the renderer draws them.
BinaryMask marker_raster(const SceneSpec& spec);
BinaryMask ball_raster(const SceneSpec& spec);

// Marker-only scene with a random pose (any rotation, scale, mild
// perspective) lying fully inside the frame. Deterministic in `seed`.
SceneSpec random_marker_scene(int width, int height, std::uint64_t seed);

struct TrajectoryPoint {
  double x_mm = 0.0;
  double y_mm = 0.0;
  double height_mm = 0.0;
};

std::vector<TrajectoryPoint> circular_trajectory(std::size_t frames, Point2 center_mm,
                                                 double radius_mm, double min_height_mm,
                                                 double max_height_mm);

// Seed used for frame `index` of a sequence rendered from `base`.
std::uint64_t frame_seed(std::uint64_t base, std::size_t index);

struct SequenceSummary {
  std::size_t frames = 0;
  std::vector<std::filesystem::path> files;
};

// Writes background.ppm, with_marker.ppm, with_pointer.ppm (ball resting on
// the plane at the scene's ball position), the oracle rasters marker_mask.pgm
// and pointer_mask.pgm, one rgb_%04d.ppm / depth_%04d.pgm pair per
// trajectory point, and truth.json. Validates everything before writing.
SequenceSummary render_sequence(const SceneSpec& spec,
                                const std::vector<TrajectoryPoint>& trajectory,
                                const std::filesystem::path& out_dir);

std::string truth_to_json(const SceneSpec& spec, const std::vector<GroundTruth>& frames);

// Scene spec JSON, with an optional "trajectory" array of [x, y, h] triples.
struct SceneFile {
  SceneSpec spec;
  std::vector<TrajectoryPoint> trajectory;
};
SceneFile scene_from_json(std::string_view text);
std::string scene_to_json(const SceneSpec& spec,
                          const std::vector<TrajectoryPoint>& trajectory = {});

}  // namespace tangible
