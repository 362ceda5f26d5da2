#include "tangible/simulator.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "json.hpp"
#include "tangible/image_io.hpp"
#include "tangible/registration.hpp"

namespace tangible {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void violation(const std::string& why) {
  throw Error(ErrorCode::SpecViolation, "scene spec: " + why);
}

double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }

bool inside_convex(const std::array<Point2, 4>& quad, Point2 p) {
  bool any_pos = false, any_neg = false;
  for (std::size_t i = 0; i < 4; ++i) {
    const double c = cross(quad[(i + 1) % 4] - quad[i], p - quad[i]);
    if (c > 1e-9) any_pos = true;
    if (c < -1e-9) any_neg = true;
  }
  return !(any_pos && any_neg);
}

// Pixels per millimetre of the plane mapping around a plane point.
double local_scale(const Eigen::Matrix3d& m, Point2 p) {
  const double d = 1e-3;
  const Point2 c = apply_homography(m, p);
  const Point2 ex = apply_homography(m, {p.x + d, p.y}) - c;
  const Point2 ey = apply_homography(m, {p.x, p.y + d}) - c;
  return std::sqrt(std::abs(cross(ex, ey))) / d;
}

struct BallGeometry {
  Point2 plane_px;  // A
  Point2 center_px;  // B
  double radius_px = 0.0;
};

BallGeometry ball_geometry(const SceneSpec& spec) {
  BallGeometry g;
  const double H = spec.camera_height_mm;
  const double h = spec.ball.height_mm;
  const Point2 o = spec.principal_point;
  g.plane_px = apply_homography(spec.plane_to_image, {spec.ball.x_mm, spec.ball.y_mm});
  const double magnify = H / (H - h);
  g.center_px = o + (g.plane_px - o) * magnify;
  g.radius_px = spec.ball.radius_mm * local_scale(spec.plane_to_image,
                                                  {spec.ball.x_mm, spec.ball.y_mm}) * magnify;
  return g;
}

std::array<Point2, 4> marker_image_corners(const SceneSpec& spec) {
  std::array<Point2, 4> out;
  const auto plane = spec.marker_plane_corners();
  for (std::size_t i = 0; i < 4; ++i) out[i] = apply_homography(spec.plane_to_image, plane[i]);
  return out;
}

bool in_disc(Point2 p, Point2 c, double r) {
  const double dx = p.x - c.x, dy = p.y - c.y;
  return dx * dx + dy * dy <= r * r;
}

std::uint16_t to_raw(double mm, double raw_to_mm) {
  return static_cast<std::uint16_t>(std::clamp(std::lround(mm / raw_to_mm), 1L, 65535L));
}

json point_json(Point2 p) { return json::array({p.x, p.y}); }
json point_json(Point3 p) { return json::array({p.x, p.y, p.z}); }

json matrix_json(const Eigen::Matrix3d& m) {
  json out = json::array();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) out.push_back(m(r, c));
  }
  return out;
}

Point2 read_point(const json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 2) throw Error(ErrorCode::ParseError, "expected [x, y]");
  return {v[0], v[1]};
}

Rgb read_rgb(const json& j) {
  const auto v = j.get<std::vector<int>>();
  if (v.size() != 3) throw Error(ErrorCode::ParseError, "expected [r, g, b]");
  auto c = [](int x) { return static_cast<std::uint8_t>(std::clamp(x, 0, 255)); };
  return {c(v[0]), c(v[1]), c(v[2])};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot create " + path.string());
  out << text;
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "write failed: " + path.string());
}

}  // namespace

Eigen::Matrix3d marker_pose(Point2 center_px, double px_per_mm, double rotation_rad,
                            double perspective_x, double perspective_y) {
  const double c = std::cos(rotation_rad) * px_per_mm;
  const double s = std::sin(rotation_rad) * px_per_mm;
  Eigen::Matrix3d similarity;
  similarity << c, -s, center_px.x,
                s, c, center_px.y,
                0, 0, 1;
  Eigen::Matrix3d perspective = Eigen::Matrix3d::Identity();
  perspective(2, 0) = perspective_x;
  perspective(2, 1) = perspective_y;
  return similarity * perspective;
}

std::array<Point2, 4> SceneSpec::marker_plane_corners() const {
  const double hw = 0.5 * marker_width_mm, hh = 0.75 * marker_width_mm;
  return {Point2{-hw, -hh}, Point2{hw, -hh}, Point2{hw, hh}, Point2{-hw, hh}};
}

void SceneSpec::validate() const {
  if (width < 1 || height < 1) violation("image size must be positive");
  if (!(camera_height_mm > 0) || !std::isfinite(camera_height_mm)) violation("camera height must be > 0");
  if (!std::isfinite(principal_point.x) || !std::isfinite(principal_point.y)) {
    violation("principal point must be finite");
  }
  if (!(ball.height_mm >= 0) || ball.height_mm >= camera_height_mm) {
    violation("ball height must satisfy 0 <= h < H");
  }
  if (!(ball.radius_mm > 0)) violation("ball radius must be > 0");
  if (ball.color.h >= 180) violation("ball hue must be < 180");
  if (!(raw_to_mm > 0)) violation("raw_to_mm must be > 0");
  if (camera_height_mm / raw_to_mm > 65535) violation("plane depth does not fit 16 bits");
  if (!(marker_width_mm > 0)) violation("marker width must be > 0");
  if (hue_jitter < 0 || depth_jitter < 0) violation("noise amplitudes must be >= 0");
  if (!plane_to_image.allFinite()) violation("plane_to_image must be finite");
  if (std::abs(depth_to_rgb.determinant()) < 1e-12) violation("depth_to_rgb is singular");

  const auto plane = marker_plane_corners();
  for (Point2 p : plane) {
    const Eigen::Vector3d q = plane_to_image * Eigen::Vector3d(p.x, p.y, 1.0);
    if (!(q.z() > 0)) violation("marker crosses the horizon of plane_to_image");
  }
  const auto quad = marker_image_corners(*this);
  int sign = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    const double c = cross(quad[(i + 1) % 4] - quad[i], quad[(i + 2) % 4] - quad[(i + 1) % 4]);
    const int s = c > 0 ? 1 : (c < 0 ? -1 : 0);
    if (s == 0 || (sign != 0 && s != sign)) violation("marker corners are not in convex position");
    sign = s;
  }
}

BinaryMask marker_raster(const SceneSpec& spec) {
  BinaryMask out(spec.width, spec.height);
  if (!spec.show_marker) return out;
  const auto quad = marker_image_corners(spec);
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      out.at(x, y) = inside_convex(quad, {static_cast<double>(x), static_cast<double>(y)});
    }
  }
  return out;
}

BinaryMask ball_raster(const SceneSpec& spec) {
  BinaryMask out(spec.width, spec.height);
  if (!spec.show_ball) return out;
  const BallGeometry g = ball_geometry(spec);
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      out.at(x, y) = in_disc({static_cast<double>(x), static_cast<double>(y)}, g.center_px,
                             g.radius_px);
    }
  }
  return out;
}

RenderedScene render_scene(const SceneSpec& spec) {
  spec.validate();
  const BallGeometry ball = ball_geometry(spec);
  const BinaryMask marker = marker_raster(spec);
  const BinaryMask disc = ball_raster(spec);

  std::mt19937_64 hue_rng(spec.seed);
  std::mt19937_64 depth_rng(spec.seed ^ 0x5DEECE66DULL);
  // Hue noise is a rounded normal (sigma = amplitude / 2) clipped to the
  // amplitude, so the injected hue stays the mode.
  std::normal_distribution<double> hue_normal(0.0, 0.5 * spec.hue_jitter);
  auto hue_noise = [&](std::mt19937_64& rng) {
    const long d = std::lround(hue_normal(rng));
    return static_cast<int>(std::clamp<long>(d, -spec.hue_jitter, spec.hue_jitter));
  };
  std::uniform_int_distribution<int> depth_noise(-spec.depth_jitter, spec.depth_jitter);

  RgbImage rgb(spec.width, spec.height, spec.background);
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      if (disc.at(x, y)) {
        Hsv c = spec.ball.color;
        if (spec.hue_jitter > 0) c.h = static_cast<std::uint8_t>((c.h + hue_noise(hue_rng) + 180) % 180);
        rgb.at(x, y) = hsv_to_rgb(c);
      } else if (marker.at(x, y)) {
        rgb.at(x, y) = spec.marker_color;
      }
    }
  }

  const double H = spec.camera_height_mm;
  const std::uint16_t plane_raw = to_raw(H, spec.raw_to_mm);
  const std::uint16_t ball_raw = to_raw(H - spec.ball.height_mm, spec.raw_to_mm);
  const Point2 shadow_center = ball.center_px + spec.shadow_offset_px;
  DepthImage depth(spec.width, spec.height, spec.raw_to_mm, 0);
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      // Sample the scene where this sensor pixel lands in the RGB frame.
      const Point2 p = spec.depth_to_rgb.apply({static_cast<double>(x), static_cast<double>(y)});
      std::uint16_t raw = plane_raw;
      if (spec.show_ball && in_disc(p, ball.center_px, ball.radius_px)) {
        raw = ball_raw;
      } else if (spec.show_ball && in_disc(p, shadow_center, ball.radius_px)) {
        raw = 0;
      }
      if (raw != 0 && spec.depth_jitter > 0) {
        raw = static_cast<std::uint16_t>(std::clamp(raw + depth_noise(depth_rng), 1, 65535));
      }
      depth.at(x, y) = raw;
    }
  }

  GroundTruth t;
  t.marker_corners_px = marker_image_corners(spec);
  t.marker_centroid_px = apply_homography(spec.plane_to_image, {0.0, 0.0});
  t.ball_center_px = ball.center_px;
  t.ball_plane_px = ball.plane_px;
  t.ball_real_mm = {spec.ball.x_mm, spec.ball.y_mm, spec.ball.height_mm};
  const double to_virtual = 1.0 / spec.marker_width_mm;
  t.rho_z_true = to_virtual;
  t.expected_virtual = {spec.ball.x_mm * to_virtual, spec.ball.y_mm * to_virtual,
                        spec.ball.height_mm * to_virtual};
  const Eigen::Matrix3d scale = Eigen::Vector3d(to_virtual, to_virtual, 1.0).asDiagonal();
  t.t_rv_true = scale * spec.plane_to_image.inverse();
  t.t_rv_true /= t.t_rv_true(2, 2);

  return {std::move(rgb), std::move(depth), t};
}

SceneSpec random_marker_scene(int width, int height, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SceneSpec spec;
  spec.width = width;
  spec.height = height;
  spec.principal_point = {0.5 * (width - 1), 0.5 * (height - 1)};
  spec.show_ball = false;
  const double short_side = std::min(width, height);
  for (;;) {
    const double px_per_mm = (0.2 + 0.2 * unit(rng)) * short_side / spec.marker_width_mm;
    const double rotation = (2.0 * unit(rng) - 1.0) * std::numbers::pi;
    const Point2 center{width * (0.3 + 0.4 * unit(rng)), height * (0.3 + 0.4 * unit(rng))};
    const double px = (2.0 * unit(rng) - 1.0) * 8e-4;
    const double py = (2.0 * unit(rng) - 1.0) * 8e-4;
    spec.plane_to_image = marker_pose(center, px_per_mm, rotation, px, py);
    const auto quad = marker_image_corners(spec);
    const bool inside = std::all_of(quad.begin(), quad.end(), [&](Point2 c) {
      return c.x >= 4 && c.y >= 4 && c.x <= width - 5 && c.y <= height - 5;
    });
    if (inside) return spec;
  }
}

std::vector<TrajectoryPoint> circular_trajectory(std::size_t frames, Point2 center_mm,
                                                 double radius_mm, double min_height_mm,
                                                 double max_height_mm) {
  std::vector<TrajectoryPoint> out;
  out.reserve(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    const double phase = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(frames);
    out.push_back({center_mm.x + radius_mm * std::cos(phase),
                   center_mm.y + radius_mm * std::sin(phase),
                   min_height_mm + (max_height_mm - min_height_mm) * 0.5 * (1.0 - std::cos(2.0 * phase))});
  }
  return out;
}

std::uint64_t frame_seed(std::uint64_t base, std::size_t index) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::string truth_to_json(const SceneSpec& spec, const std::vector<GroundTruth>& frames) {
  json j;
  j["h_mm"] = spec.camera_height_mm;
  j["principal_point"] = point_json(spec.principal_point);
  j["rho_z"] = 1.0 / spec.marker_width_mm;
  Eigen::Matrix3d t_rv = Eigen::Vector3d(1.0 / spec.marker_width_mm, 1.0 / spec.marker_width_mm, 1.0)
                             .asDiagonal() * spec.plane_to_image.inverse();
  t_rv /= t_rv(2, 2);
  j["t_rv"] = matrix_json(t_rv);
  json list = json::array();
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const GroundTruth& g = frames[i];
    json corners = json::array();
    for (Point2 c : g.marker_corners_px) corners.push_back(point_json(c));
    list.push_back({{"idx", i},
                    {"marker_corners", std::move(corners)},
                    {"ball_px", point_json(g.ball_center_px)},
                    {"ball_plane_px", point_json(g.ball_plane_px)},
                    {"ball_real", point_json(g.ball_real_mm)},
                    {"virtual", point_json(g.expected_virtual)}});
  }
  j["frames"] = std::move(list);
  return j.dump(2) + "\n";
}

SequenceSummary render_sequence(const SceneSpec& spec,
                                const std::vector<TrajectoryPoint>& trajectory,
                                const std::filesystem::path& out_dir) {
  spec.validate();
  std::vector<SceneSpec> frame_specs;
  frame_specs.reserve(trajectory.size());
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    SceneSpec f = spec;
    f.show_marker = true;
    f.show_ball = true;
    f.ball.x_mm = trajectory[i].x_mm;
    f.ball.y_mm = trajectory[i].y_mm;
    f.ball.height_mm = trajectory[i].height_mm;
    f.seed = frame_seed(spec.seed, i);
    try {
      f.validate();
    } catch (const Error& e) {
      violation("trajectory point " + std::to_string(i) + ": " + e.what());
    }
    frame_specs.push_back(f);
  }

  SceneSpec background = spec;
  background.show_marker = false;
  background.show_ball = false;
  SceneSpec with_marker = spec;
  with_marker.show_marker = true;
  with_marker.show_ball = false;
  SceneSpec with_pointer = spec;
  with_pointer.show_marker = true;
  with_pointer.show_ball = true;
  with_pointer.ball.height_mm = 0.0;

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + out_dir.string());

  SequenceSummary summary;
  auto record = [&](const std::filesystem::path& p) { summary.files.push_back(p); };

  const auto bg_path = out_dir / "background.ppm";
  write_ppm(bg_path, render_scene(background).rgb);
  record(bg_path);
  const auto marker_path = out_dir / "with_marker.ppm";
  write_ppm(marker_path, render_scene(with_marker).rgb);
  record(marker_path);
  const auto pointer_path = out_dir / "with_pointer.ppm";
  write_ppm(pointer_path, render_scene(with_pointer).rgb);
  record(pointer_path);
  const auto marker_mask_path = out_dir / "marker_mask.pgm";
  write_mask(marker_mask_path, marker_raster(with_marker));
  record(marker_mask_path);
  const auto pointer_mask_path = out_dir / "pointer_mask.pgm";
  write_mask(pointer_mask_path, ball_raster(with_pointer));
  record(pointer_mask_path);

  std::vector<GroundTruth> truths;
  truths.reserve(frame_specs.size());
  char name[32];
  for (std::size_t i = 0; i < frame_specs.size(); ++i) {
    RenderedScene scene = render_scene(frame_specs[i]);
    std::snprintf(name, sizeof(name), "rgb_%04zu.ppm", i);
    write_ppm(out_dir / name, scene.rgb);
    record(out_dir / name);
    std::snprintf(name, sizeof(name), "depth_%04zu.pgm", i);
    write_depth(out_dir / name, scene.depth);
    record(out_dir / name);
    truths.push_back(scene.truth);
  }

  const auto truth_path = out_dir / "truth.json";
  write_text(truth_path, truth_to_json(spec, truths));
  record(truth_path);
  summary.frames = truths.size();
  return summary;
}

SceneFile scene_from_json(std::string_view text) {
  SceneFile file;
  SceneSpec& s = file.spec;
  try {
    const json j = json::parse(text);
    s.width = j.value("width", s.width);
    s.height = j.value("height", s.height);
    s.camera_height_mm = j.value("camera_height_mm", s.camera_height_mm);
    if (j.contains("principal_point")) s.principal_point = read_point(j["principal_point"]);
    s.marker_width_mm = j.value("marker_width_mm", s.marker_width_mm);
    if (j.contains("plane_to_image")) {
      const auto m = j["plane_to_image"].get<std::vector<double>>();
      if (m.size() != 9) throw Error(ErrorCode::ParseError, "plane_to_image needs 9 numbers");
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) s.plane_to_image(r, c) = m[static_cast<std::size_t>(3 * r + c)];
      }
    } else if (j.contains("marker_pose")) {
      const json& p = j["marker_pose"];
      const auto persp = p.value("perspective", std::vector<double>{0.0, 0.0});
      if (persp.size() != 2) throw Error(ErrorCode::ParseError, "perspective needs 2 numbers");
      s.plane_to_image = marker_pose(read_point(p.at("center_px")), p.at("px_per_mm").get<double>(),
                                     p.value("rotation_deg", 0.0) * std::numbers::pi / 180.0,
                                     persp[0], persp[1]);
    }
    s.show_marker = j.value("show_marker", s.show_marker);
    s.show_ball = j.value("show_ball", s.show_ball);
    if (j.contains("ball")) {
      const json& b = j["ball"];
      s.ball.x_mm = b.value("x_mm", s.ball.x_mm);
      s.ball.y_mm = b.value("y_mm", s.ball.y_mm);
      s.ball.height_mm = b.value("height_mm", s.ball.height_mm);
      s.ball.radius_mm = b.value("radius_mm", s.ball.radius_mm);
      if (b.contains("hsv")) {
        const auto c = b["hsv"].get<std::vector<int>>();
        if (c.size() != 3) throw Error(ErrorCode::ParseError, "ball hsv needs 3 numbers");
        s.ball.color = {static_cast<std::uint8_t>(std::clamp(c[0], 0, 255)),
                        static_cast<std::uint8_t>(std::clamp(c[1], 0, 255)),
                        static_cast<std::uint8_t>(std::clamp(c[2], 0, 255))};
      }
    }
    if (j.contains("background")) s.background = read_rgb(j["background"]);
    if (j.contains("marker_color")) s.marker_color = read_rgb(j["marker_color"]);
    s.hue_jitter = j.value("hue_jitter", s.hue_jitter);
    s.depth_jitter = j.value("depth_jitter", s.depth_jitter);
    s.raw_to_mm = j.value("raw_to_mm", s.raw_to_mm);
    if (j.contains("shadow_offset_px")) s.shadow_offset_px = read_point(j["shadow_offset_px"]);
    if (j.contains("depth_to_rgb")) {
      const auto m = j["depth_to_rgb"].get<std::vector<double>>();
      if (m.size() != 6) throw Error(ErrorCode::ParseError, "depth_to_rgb needs 6 numbers");
      std::copy(m.begin(), m.end(), s.depth_to_rgb.m.begin());
    }
    s.seed = j.value("seed", s.seed);
    if (j.contains("trajectory")) {
      for (const json& p : j["trajectory"]) {
        const auto v = p.get<std::vector<double>>();
        if (v.size() != 3) throw Error(ErrorCode::ParseError, "trajectory points are [x, y, h]");
        file.trajectory.push_back({v[0], v[1], v[2]});
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("scene spec: ") + e.what());
  }
  return file;
}

std::string scene_to_json(const SceneSpec& s, const std::vector<TrajectoryPoint>& trajectory) {
  json j;
  j["width"] = s.width;
  j["height"] = s.height;
  j["camera_height_mm"] = s.camera_height_mm;
  j["principal_point"] = point_json(s.principal_point);
  j["marker_width_mm"] = s.marker_width_mm;
  j["plane_to_image"] = matrix_json(s.plane_to_image);
  j["show_marker"] = s.show_marker;
  j["show_ball"] = s.show_ball;
  j["ball"] = {{"x_mm", s.ball.x_mm},
               {"y_mm", s.ball.y_mm},
               {"height_mm", s.ball.height_mm},
               {"radius_mm", s.ball.radius_mm},
               {"hsv", {s.ball.color.h, s.ball.color.s, s.ball.color.v}}};
  j["background"] = {s.background.r, s.background.g, s.background.b};
  j["marker_color"] = {s.marker_color.r, s.marker_color.g, s.marker_color.b};
  j["hue_jitter"] = s.hue_jitter;
  j["depth_jitter"] = s.depth_jitter;
  j["raw_to_mm"] = s.raw_to_mm;
  j["shadow_offset_px"] = point_json(s.shadow_offset_px);
  j["depth_to_rgb"] = s.depth_to_rgb.m;
  j["seed"] = s.seed;
  json traj = json::array();
  for (const auto& p : trajectory) traj.push_back({p.x_mm, p.y_mm, p.height_mm});
  j["trajectory"] = std::move(traj);
  return j.dump(2) + "\n";
}

}  // namespace tangible
