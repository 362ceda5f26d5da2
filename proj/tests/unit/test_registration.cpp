#include <algorithm>
#include <random>

#include "doctest.h"
#include "json.hpp"
#include <Eigen/LU>
#include "scenes.hpp"
#include "support.hpp"
#include "tangible/registration.hpp"

using namespace tangible;

namespace {

Point2 rotate(Point2 p, Point2 c, double a) {
  const double dx = p.x - c.x, dy = p.y - c.y;
  return {c.x + dx * std::cos(a) - dy * std::sin(a), c.y + dx * std::sin(a) + dy * std::cos(a)};
}

Eigen::Matrix3d normalized(Eigen::Matrix3d m) { return m / m(2, 2); }

double relative_error(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b) {
  return (normalized(a) - normalized(b)).norm() / normalized(b).norm();
}

Eigen::Matrix3d random_homography(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::Matrix3d h;
  h << 1.0 + 0.3 * u(rng), 0.3 * u(rng), 50 * u(rng),
       0.3 * u(rng), 1.0 + 0.3 * u(rng), 50 * u(rng),
       1e-3 * u(rng), 1e-3 * u(rng), 1.0;
  return h;
}

}  // namespace

TEST_CASE("order_corners on an upright rectangle") {
  const std::array<Point2, 4> tl_bl_br_tr{Point2{100, 50}, {100, 250}, {300, 250}, {300, 50}};
  std::array<Point2, 4> shuffled = tl_bl_br_tr;
  std::mt19937_64 rng(1);
  for (int i = 0; i < 10; ++i) {
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    CHECK(order_corners(shuffled, {200, 150}) == tl_bl_br_tr);
  }
}

TEST_CASE("order_corners on a rotated rectangle") {
  const std::array<Point2, 4> base{Point2{240, 120}, {240, 360}, {400, 360}, {400, 120}};
  const Point2 c{320, 240};
  for (double deg : {10.0, -10.0, 30.0}) {
    std::array<Point2, 4> turned;
    for (int i = 0; i < 4; ++i) turned[i] = rotate(base[i], c, deg * std::numbers::pi / 180);
    std::array<Point2, 4> input{turned[2], turned[0], turned[3], turned[1]};
    CHECK(order_corners(input, c) == turned);
  }
}

TEST_CASE("order_corners ignores input order") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-30.0, 30.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::array<Point2, 4> q{Point2{100 + u(rng), 100 + u(rng)}, {100 + u(rng), 300 + u(rng)},
                            {350 + u(rng), 300 + u(rng)}, {350 + u(rng), 100 + u(rng)}};
    const Point2 c{225, 200};
    const auto reference = order_corners(q, c);
    std::sort(q.begin(), q.end(), [](Point2 a, Point2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
    do {
      CHECK(order_corners(q, c) == reference);
    } while (std::next_permutation(q.begin(), q.end(), [](Point2 a, Point2 b) {
      return a.x < b.x || (a.x == b.x && a.y < b.y);
    }));
  }
}

TEST_CASE("order_corners errors") {
  const std::vector<Point2> three{{0, 0}, {10, 0}, {0, 10}};
  CHECK_THROWS_AS(order_corners(three, {3, 3}), Error);

  const std::array<Point2, 4> quad{Point2{0, 0}, {0, 10}, {10, 10}, {10, 0}};
  try {
    order_corners(quad, {50, 50});
    FAIL("expected CentroidOutsideHull");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CentroidOutsideHull);
  }
  const std::array<Point2, 4> dup{Point2{0, 0}, {0, 0}, {10, 10}, {10, 0}};
  try {
    order_corners(dup, {5, 3});
    FAIL("expected DuplicateCorners");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DuplicateCorners);
  }
}

TEST_CASE("estimate_homography") {
  SUBCASE("identity") {
    const std::vector<Point2> p{{0, 0}, {100, 10}, {90, 120}, {-5, 80}};
    const auto fit = estimate_homography(p, p);
    CHECK((fit.matrix - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(fit.residual < 1e-9);
  }
  SUBCASE("recovers a random homography from five points") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> coord(0.0, 640.0);
    for (int trial = 0; trial < 50; ++trial) {
      const Eigen::Matrix3d h = random_homography(rng);
      std::vector<Point2> src, dst;
      for (int i = 0; i < 5; ++i) {
        src.push_back({coord(rng), coord(rng) * 0.75});
        dst.push_back(apply_homography(h, src.back()));
      }
      CHECK(relative_error(estimate_homography(src, dst).matrix, h) < 1e-6);
    }
  }
  SUBCASE("collinear points") {
    const std::vector<Point2> line{{0, 0}, {1, 1}, {2, 2}, {3, 3}};
    const std::vector<Point2> any{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    try {
      estimate_homography(line, any);
      FAIL("expected Degenerate");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Degenerate);
    }
  }
  SUBCASE("three collinear among four") {
    const std::vector<Point2> src{{0, 0}, {1, 0}, {2, 0}, {0, 1}};
    CHECK_THROWS_AS(estimate_homography(src, src), Error);
  }
  SUBCASE("a centre point on a diagonal is allowed") {
    const std::vector<Point2> src{{0, 0}, {0, 2}, {2, 2}, {2, 0}, {1, 1}};
    const auto fit = estimate_homography(src, src);
    CHECK((fit.matrix - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-9);
  }
  SUBCASE("argument checks") {
    const std::vector<Point2> four{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    const std::vector<Point2> three{{0, 0}, {1, 0}, {1, 1}};
    CHECK_THROWS_AS(estimate_homography(four, three), Error);
    CHECK_THROWS_AS(estimate_homography(three, three), Error);
  }
}

TEST_CASE("homography fit is similarity invariant") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> coord(0.0, 500.0);
  std::normal_distribution<double> noise(0.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Matrix3d h = random_homography(rng);
    std::vector<Point2> src, dst;
    for (int i = 0; i < 7; ++i) {
      src.push_back({coord(rng), coord(rng)});
      const Point2 q = apply_homography(h, src.back());
      dst.push_back({q.x + noise(rng), q.y + noise(rng)});
    }
    const double a = 0.3 + trial * 0.1, s = 0.5 + 0.2 * trial;
    Eigen::Matrix3d sim;
    sim << s * std::cos(a), -s * std::sin(a), 17.0 * trial, s * std::sin(a), s * std::cos(a), -9.0, 0, 0, 1;
    std::vector<Point2> moved;
    for (Point2 p : src) moved.push_back(apply_homography(sim, p));
    const Eigen::Matrix3d direct = estimate_homography(src, dst).matrix;
    const Eigen::Matrix3d via = estimate_homography(moved, dst).matrix * sim;
    CHECK(relative_error(via, direct) < 1e-6);
  }
}

TEST_CASE("virtual targets pair with ordered corners") {
  const auto v = virtual_targets_for_ordered_corners();
  CHECK(v[0] == Point2{-0.5, -0.75});
  CHECK(v[1] == Point2{-0.5, 0.75});
  CHECK(v[2] == Point2{0.5, 0.75});
  CHECK(v[3] == Point2{0.5, -0.75});
}

TEST_CASE("build_calibration on an upright centred marker is a pure scale") {
  // 200 mm marker at 0.8 px/mm: 160 x 240 px centred on (320, 240).
  const tangible::SceneSpec spec = testing::posed_scene(320, 240, 0.8, 0.0, 0.0, 0.0);
  const auto report = testing::calibrate(spec);
  const Eigen::Matrix3d t = normalized(report.profile.t_rv.matrix);
  // Closed form: x_v = (x - 320) / 160, y_v = (y - 240) / 160. The fitted
  // scale may differ by the one-pixel corner clipping of the smoothed mask.
  CHECK(t(0, 0) == doctest::Approx(1.0 / 160).epsilon(0.01));
  CHECK(t(1, 1) == doctest::Approx(1.0 / 160).epsilon(0.01));
  CHECK(std::abs(t(0, 1)) < 1e-9);
  CHECK(std::abs(t(1, 0)) < 1e-9);
  CHECK(std::abs(t(2, 0)) < 1e-9);
  CHECK(std::abs(t(2, 1)) < 1e-9);
  const Point2 centre = report.profile.t_rv.apply({320, 240});
  CHECK(std::abs(centre.x) < 1e-9);
  CHECK(std::abs(centre.y) < 1e-9);
  CHECK(report.hue_peak == 20);
  CHECK(report.profile.hue_bounds == HueBounds::around(20));
}

TEST_CASE("build_calibration on posed markers") {
  const std::vector<tangible::SceneSpec> scenes{
      testing::posed_scene(320, 240, 0.8, 0.1, 2e-4, -1e-4),
      testing::posed_scene(300, 250, 1.0, -0.25, 0.0, 1e-4),
      testing::posed_scene(320, 240, 0.8, 0.3, 0.0, 0.0),
      testing::posed_scene(340, 230, 0.7, 0.6, -2e-4, 0.0),
      testing::posed_scene(320, 240, 1.2, 0.05, 1e-4, 1e-4),
  };
  for (const auto& spec : scenes) {
    const auto report = testing::calibrate(spec);
    const auto truth = render_scene(spec).truth;
    // Noise-free residual bound.
    CHECK(report.residual < 1e-2);
    // True corners land within the tracking tolerance of their virtual
    // targets. The majority filter shaves one to two pixels off each
    // raster corner, which keeps this well above 1e-3.
    for (Point2 c : truth.marker_corners_px) {
      const Point2 v = report.profile.t_rv.apply(c);
      double best = 1e300;
      for (Point2 target : VirtualMarker::corners) best = std::min(best, distance(v, target));
      CHECK(best < 0.02);
    }
    CHECK(distance(report.profile.t_rv.apply(truth.marker_centroid_px), {0, 0}) < 0.02);
    CHECK(report.corner_set.corners.size() == 4);
    CHECK(report.profile.camera_height_mm == spec.camera_height_mm);
    CHECK(report.profile.t_rv.rho_z == doctest::Approx(1.0 / spec.marker_width_mm));
  }
}

TEST_CASE("build_calibration failure modes") {
  const tangible::SceneSpec spec = testing::posed_scene(320, 240, 0.8, 0.0, 0.0, 0.0);
  const auto img = testing::calibration_images(spec);
  SUBCASE("blank marker capture") {
    try {
      build_calibration(img.background, img.background, img.with_pointer, testing::rig_for(spec));
      FAIL("expected EmptyMask");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::EmptyMask);
    }
  }
  SUBCASE("size mismatch") {
    CHECK_THROWS_AS(build_calibration(img.background, RgbImage(10, 10), img.with_pointer,
                                      testing::rig_for(spec)),
                    Error);
  }
  SUBCASE("principal point outside the frame") {
    RigConfig rig = testing::rig_for(spec);
    rig.principal_point = {900, 100};
    CHECK_THROWS_AS(build_calibration(img.background, img.with_marker, img.with_pointer, rig), Error);
  }
}

TEST_CASE("calibration profile JSON") {
  const auto report = testing::calibrate(testing::posed_scene(320, 240, 0.8, 0.1, 2e-4, -1e-4));
  const std::string first = profile_to_json(report.profile);

  SUBCASE("write, read, write is byte-identical") {
    const std::string second = profile_to_json(profile_from_json(first));
    CHECK(second == first);
  }
  SUBCASE("field names and order") {
    const auto j = nlohmann::ordered_json::parse(first);
    std::vector<std::string> keys;
    for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
    CHECK(keys == std::vector<std::string>{"depth_to_rgb", "hue_bounds", "t_rv", "rho_z",
                                           "camera_height_mm", "principal_point", "raw_to_mm"});
    CHECK(j["t_rv"].size() == 9);
    CHECK(j["depth_to_rgb"].size() == 6);
    CHECK(j["hue_bounds"].contains("wraps"));
  }
  SUBCASE("file round trip") {
    const auto dir = testing::scratch_dir("profile");
    save_profile(dir / "cal.json", report.profile);
    CHECK(profile_to_json(load_profile(dir / "cal.json")) == first);
  }
  SUBCASE("malformed documents") {
    auto code_of = [](const std::string& text) {
      try {
        profile_from_json(text);
      } catch (const Error& e) {
        return e.code();
      }
      return ErrorCode::InvalidArgument;
    };
    CHECK(code_of("{") == ErrorCode::ParseError);
    CHECK(code_of("{}") == ErrorCode::ParseError);
    auto j = nlohmann::ordered_json::parse(first);
    j["t_rv"] = {1, 2, 3};
    CHECK(code_of(j.dump()) == ErrorCode::ParseError);
    j = nlohmann::ordered_json::parse(first);
    j["camera_height_mm"] = -5.0;
    CHECK(code_of(j.dump()) == ErrorCode::SpecViolation);
    j = nlohmann::ordered_json::parse(first);
    j["hue_bounds"]["lo"] = 200;
    CHECK(code_of(j.dump()) == ErrorCode::SpecViolation);
  }
  SUBCASE("missing file") {
    try {
      load_profile("/nonexistent/cal.json");
      FAIL("expected IoError");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::IoError);
    }
  }
}
