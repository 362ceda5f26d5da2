#include "tangible/registration.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "json.hpp"
#include "tangible/mask_extraction.hpp"

namespace tangible {

namespace {

using json = nlohmann::ordered_json;

// Similarity taking the points to zero mean and mean distance sqrt(2).
Eigen::Matrix3d normalizing_transform(std::span<const Point2> pts) {
  Point2 mean{};
  for (Point2 p : pts) mean = mean + p;
  mean = mean * (1.0 / static_cast<double>(pts.size()));
  double spread = 0;
  for (Point2 p : pts) spread += distance(p, mean);
  spread /= static_cast<double>(pts.size());
  if (!(spread > 0) || !std::isfinite(spread)) {
    throw Error(ErrorCode::Degenerate, "homography: coincident points");
  }
  const double s = std::numbers::sqrt2 / spread;
  Eigen::Matrix3d t;
  t << s, 0, -s * mean.x,
       0, s, -s * mean.y,
       0, 0, 1;
  return t;
}

Point2 transform(const Eigen::Matrix3d& t, Point2 p) { return apply_homography(t, p); }

double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }

double angular_gap(double a, double b) {
  double d = std::fmod(std::abs(a - b), 2 * std::numbers::pi);
  return d > std::numbers::pi ? 2 * std::numbers::pi - d : d;
}

json point_json(Point2 p) { return json::array({p.x, p.y}); }

bool collinear(Point2 p, Point2 q, Point2 r) { return std::abs(cross(q - p, r - p)) < 1e-9; }

// A homography is pinned down once some 4 of the points have no collinear
// triple. An extra point on a diagonal (the marker centroid) is fine.
// Large sets are left to the rank check.
bool has_general_quad(const std::vector<Point2>& a) {
  const std::size_t n = a.size();
  if (n > 12) return true;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t k = j + 1; k < n; ++k) {
        if (collinear(a[i], a[j], a[k])) continue;
        for (std::size_t l = k + 1; l < n; ++l) {
          if (!collinear(a[i], a[j], a[l]) && !collinear(a[i], a[k], a[l]) &&
              !collinear(a[j], a[k], a[l])) {
            return true;
          }
        }
      }
  return false;
}

}  // namespace

Point2 apply_homography(const Eigen::Matrix3d& m, Point2 p) {
  const Eigen::Vector3d q = m * Eigen::Vector3d(p.x, p.y, 1.0);
  return {q.x() / q.z(), q.y() / q.z()};
}

Point2 Homography::apply(Point2 p) const { return apply_homography(matrix, p); }

HomographyFit estimate_homography(std::span<const Point2> src,
                                  std::span<const Point2> dst) {
  if (src.size() != dst.size()) {
    throw Error(ErrorCode::InvalidArgument, "homography: point counts differ");
  }
  if (src.size() < 4) {
    throw Error(ErrorCode::InvalidArgument, "homography: need at least 4 points");
  }
  const std::size_t n = src.size();
  const Eigen::Matrix3d ts = normalizing_transform(src);
  const Eigen::Matrix3d td = normalizing_transform(dst);

  std::vector<Point2> a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = transform(ts, src[i]);
    b[i] = transform(td, dst[i]);
  }
  if (!has_general_quad(a)) {
    throw Error(ErrorCode::Degenerate, "homography: collinear source points");
  }

  Eigen::Matrix<double, Eigen::Dynamic, 9> sys(2 * n, 9);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = a[i].x, y = a[i].y, u = b[i].x, v = b[i].y;
    sys.row(2 * i) << -x, -y, -1, 0, 0, 0, u * x, u * y, u;
    sys.row(2 * i + 1) << 0, 0, 0, -x, -y, -1, v * x, v * y, v;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  // Eight independent equations are needed for a one-dimensional null space.
  if (sv.size() < 8 || sv(7) < 1e-10 * sv(0)) {
    throw Error(ErrorCode::Degenerate, "homography: rank-deficient system");
  }
  const Eigen::Matrix<double, 9, 1> h = svd.matrixV().col(8);
  Eigen::Matrix3d hn;
  hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);

  HomographyFit fit;
  fit.matrix = td.inverse() * hn * ts;
  if (std::abs(fit.matrix(2, 2)) > 1e-12) fit.matrix /= fit.matrix(2, 2);

  double total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    total += distance(apply_homography(fit.matrix, src[i]), dst[i]);
  }
  fit.residual = total / static_cast<double>(n);
  return fit;
}

std::array<Point2, 4> order_corners(std::span<const Point2> corners, Point2 centroid) {
  if (corners.size() != 4) {
    throw Error(ErrorCode::InvalidArgument, "order_corners: exactly 4 corners required");
  }
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = i + 1; j < 4; ++j) {
      if (distance(corners[i], corners[j]) < 1e-9) {
        throw Error(ErrorCode::DuplicateCorners, "order_corners: duplicate corners");
      }
    }
  }

  struct Polar {
    Point2 p;
    double angle;
    double radius;
  };
  std::array<Polar, 4> polar;
  for (std::size_t i = 0; i < 4; ++i) {
    const Point2 d = corners[i] - centroid;
    polar[i] = {corners[i], std::atan2(d.y, d.x), std::hypot(d.x, d.y)};
  }
  std::sort(polar.begin(), polar.end(), [](const Polar& l, const Polar& r) {
    if (l.angle != r.angle) return l.angle > r.angle;
    return l.radius < r.radius;
  });

  const double top_left = -0.75 * std::numbers::pi;
  std::size_t start = 0;
  for (std::size_t i = 1; i < 4; ++i) {
    const double gi = angular_gap(polar[i].angle, top_left);
    const double gs = angular_gap(polar[start].angle, top_left);
    if (gi < gs || (gi == gs && std::pair(polar[i].p.y, polar[i].p.x) <
                                    std::pair(polar[start].p.y, polar[start].p.x))) {
      start = i;
    }
  }

  std::array<Point2, 4> out;
  for (std::size_t i = 0; i < 4; ++i) out[i] = polar[(start + i) % 4].p;

  int sign = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    const double c = cross(out[(i + 1) % 4] - out[i], centroid - out[i]);
    const int s = c > 1e-12 ? 1 : (c < -1e-12 ? -1 : 0);
    if (s == 0 || (sign != 0 && s != sign)) {
      throw Error(ErrorCode::CentroidOutsideHull,
                  "order_corners: centroid not strictly inside the corners' hull");
    }
    sign = s;
  }
  return out;
}

std::array<Point2, 4> virtual_targets_for_ordered_corners() {
  const auto& v = VirtualMarker::corners;
  return {v[0], v[3], v[2], v[1]};
}

void CalibrationProfile::validate() const {
  auto fail = [](const std::string& why) {
    throw Error(ErrorCode::SpecViolation, "calibration profile: " + why);
  };
  if (!(camera_height_mm > 0) || !std::isfinite(camera_height_mm)) fail("camera_height_mm must be > 0");
  if (!(t_rv.rho_z > 0) || !std::isfinite(t_rv.rho_z)) fail("rho_z must be > 0");
  if (!(raw_to_mm > 0) || !std::isfinite(raw_to_mm)) fail("raw_to_mm must be > 0");
  if (!std::isfinite(principal_point.x) || !std::isfinite(principal_point.y) ||
      principal_point.x < 0 || principal_point.y < 0) {
    fail("principal_point must be a finite in-image pixel");
  }
  if (!t_rv.matrix.allFinite() || std::abs(t_rv.matrix.determinant()) < 1e-15) {
    fail("t_rv must be finite and invertible");
  }
  if (std::abs(depth_to_rgb.determinant()) < 1e-12) fail("depth_to_rgb is singular");
  for (double v : depth_to_rgb.m) {
    if (!std::isfinite(v)) fail("depth_to_rgb must be finite");
  }
  const HueBounds& b = hue_bounds;
  if (b.lo < 0 || b.lo >= kHueBins || b.hi < 0 || b.hi >= kHueBins) {
    fail("hue bounds outside 0..179");
  }
  if (!b.wraps && b.lo > b.hi) fail("non-wrapping hue bounds need lo <= hi");
}

CalibrationReport build_calibration(const RgbImage& background,
                                    const RgbImage& with_marker,
                                    const RgbImage& with_pointer,
                                    const RigConfig& rig) {
  if (!background.same_size(with_marker) || !background.same_size(with_pointer)) {
    throw Error(ErrorCode::DimensionMismatch, "calibration images differ in size");
  }
  const Point2 o = rig.principal_point;
  if (!(o.x >= 0 && o.y >= 0 && o.x <= background.width() - 1 &&
        o.y <= background.height() - 1)) {
    throw Error(ErrorCode::SpecViolation, "principal point outside the image");
  }

  CalibrationReport report;
  const BinaryMask marker = extract_mask(background, with_marker);
  report.corner_set = cminmax_corners(marker, {.n = 4});
  if (report.corner_set.corners.size() != 4) {
    throw Error(ErrorCode::CornerShortfall,
                "marker yielded " + std::to_string(report.corner_set.corners.size()) +
                    " corners, expected 4");
  }
  report.marker_centroid = mask_centroid(marker);
  report.ordered_corners = order_corners(report.corner_set.corners, report.marker_centroid);

  const auto targets = virtual_targets_for_ordered_corners();
  std::array<Point2, 5> src, dst;
  std::copy(report.ordered_corners.begin(), report.ordered_corners.end(), src.begin());
  std::copy(targets.begin(), targets.end(), dst.begin());
  src[4] = report.marker_centroid;
  dst[4] = VirtualMarker::centroid;
  const HomographyFit fit = estimate_homography(src, dst);
  report.residual = fit.residual;
  if (fit.residual > kMaxCalibrationResidual) {
    throw Error(ErrorCode::ResidualTooHigh,
                "marker fit residual " + std::to_string(fit.residual) + " exceeds " +
                    std::to_string(kMaxCalibrationResidual));
  }

  const HueCalibration hue = calibrate_hue(with_marker, with_pointer);
  report.hue_peak = hue.peak;

  CalibrationProfile& p = report.profile;
  p.depth_to_rgb = rig.depth_to_rgb;
  p.hue_bounds = hue.bounds;
  p.t_rv = {fit.matrix, rig.rho_z};
  p.camera_height_mm = rig.camera_height_mm;
  p.principal_point = rig.principal_point;
  p.raw_to_mm = rig.raw_to_mm;
  p.validate();
  return report;
}

std::string profile_to_json(const CalibrationProfile& p) {
  json j;
  j["depth_to_rgb"] = p.depth_to_rgb.m;
  j["hue_bounds"] = {{"lo", p.hue_bounds.lo},
                     {"hi", p.hue_bounds.hi},
                     {"wraps", p.hue_bounds.wraps},
                     {"min_saturation", p.hue_bounds.min_saturation},
                     {"min_value", p.hue_bounds.min_value}};
  json t = json::array();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) t.push_back(p.t_rv.matrix(r, c));
  }
  j["t_rv"] = std::move(t);
  j["rho_z"] = p.t_rv.rho_z;
  j["camera_height_mm"] = p.camera_height_mm;
  j["principal_point"] = point_json(p.principal_point);
  j["raw_to_mm"] = p.raw_to_mm;
  return j.dump(2) + "\n";
}

CalibrationProfile profile_from_json(std::string_view text) {
  CalibrationProfile p;
  try {
    const json j = json::parse(text);
    const auto affine = j.at("depth_to_rgb").get<std::vector<double>>();
    const auto t = j.at("t_rv").get<std::vector<double>>();
    const auto o = j.at("principal_point").get<std::vector<double>>();
    if (affine.size() != 6 || t.size() != 9 || o.size() != 2) {
      throw Error(ErrorCode::ParseError, "calibration profile: wrong array length");
    }
    std::copy(affine.begin(), affine.end(), p.depth_to_rgb.m.begin());
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) p.t_rv.matrix(r, c) = t[static_cast<std::size_t>(3 * r + c)];
    }
    const json& hb = j.at("hue_bounds");
    p.hue_bounds.lo = hb.at("lo").get<int>();
    p.hue_bounds.hi = hb.at("hi").get<int>();
    p.hue_bounds.wraps = hb.at("wraps").get<bool>();
    p.hue_bounds.min_saturation = hb.at("min_saturation").get<std::uint8_t>();
    p.hue_bounds.min_value = hb.at("min_value").get<std::uint8_t>();
    p.t_rv.rho_z = j.at("rho_z").get<double>();
    p.camera_height_mm = j.at("camera_height_mm").get<double>();
    p.principal_point = {o[0], o[1]};
    p.raw_to_mm = j.at("raw_to_mm").get<double>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("calibration profile: ") + e.what());
  }
  p.validate();
  return p;
}

void save_profile(const std::filesystem::path& path, const CalibrationProfile& profile) {
  const std::string text = profile_to_json(profile);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot create " + tmp.string());
    out << text;
    out.flush();
    if (!out) throw Error(ErrorCode::IoError, "write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::IoError, "cannot write " + path.string());
  }
}

CalibrationProfile load_profile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return profile_from_json(buf.str());
}

}  // namespace tangible
