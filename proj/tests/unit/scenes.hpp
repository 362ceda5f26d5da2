#pragma once

#include "tangible/registration.hpp"
#include "tangible/simulator.hpp"

namespace testing {

struct CalibrationImages {
  tangible::RgbImage background;
  tangible::RgbImage with_marker;
  tangible::RgbImage with_pointer;
};

// The three captures for `spec`: empty desk, marker only, and marker plus
// the ball resting on the plane at its spec position.
inline CalibrationImages calibration_images(const tangible::SceneSpec& spec) {
  tangible::SceneSpec bg = spec;
  bg.show_marker = false;
  bg.show_ball = false;
  tangible::SceneSpec marker = spec;
  marker.show_ball = false;
  tangible::SceneSpec pointer = spec;
  pointer.show_ball = true;
  pointer.ball.height_mm = 0.0;
  return {tangible::render_scene(bg).rgb, tangible::render_scene(marker).rgb,
          tangible::render_scene(pointer).rgb};
}

inline tangible::RigConfig rig_for(const tangible::SceneSpec& spec) {
  tangible::RigConfig rig;
  rig.depth_to_rgb = spec.depth_to_rgb;
  rig.camera_height_mm = spec.camera_height_mm;
  rig.principal_point = spec.principal_point;
  rig.rho_z = 1.0 / spec.marker_width_mm;
  rig.raw_to_mm = spec.raw_to_mm;
  return rig;
}

inline tangible::CalibrationReport calibrate(const tangible::SceneSpec& spec) {
  const CalibrationImages img = calibration_images(spec);
  return tangible::build_calibration(img.background, img.with_marker, img.with_pointer,
                                     rig_for(spec));
}

// Mildly tilted poses inside the calibration envelope.
inline tangible::SceneSpec posed_scene(double cx, double cy, double px_per_mm, double rot,
                                       double persp_x, double persp_y) {
  tangible::SceneSpec spec;
  spec.plane_to_image = tangible::marker_pose({cx, cy}, px_per_mm, rot, persp_x, persp_y);
  spec.ball = {150.0, 40.0, 0.0, 20.0, {20, 230, 240}};
  return spec;
}

}  // namespace testing
