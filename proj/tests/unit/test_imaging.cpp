#include <random>

#include "doctest.h"
#include "support.hpp"
#include "tangible/imaging.hpp"
#include "tangible/simulator.hpp"

using namespace tangible;

namespace {

int hue_gap(int a, int b) {
  const int d = std::abs(a - b) % 180;
  return std::min(d, 180 - d);
}

DepthImage ramp(int w, int h) {
  DepthImage d(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) d.at(x, y) = static_cast<std::uint16_t>(1 + x + 100 * y);
  return d;
}

}  // namespace

TEST_CASE("rgb_to_hsv on primary colours") {
  CHECK(rgb_to_hsv(Rgb{255, 0, 0}) == Hsv{0, 255, 255});
  CHECK(rgb_to_hsv(Rgb{255, 255, 0}) == Hsv{30, 255, 255});
  CHECK(rgb_to_hsv(Rgb{128, 128, 128}) == Hsv{0, 0, 128});
  CHECK(rgb_to_hsv(Rgb{0, 255, 0}).h == 60);
  CHECK(rgb_to_hsv(Rgb{0, 0, 255}).h == 120);
}

TEST_CASE("image conversion matches the per-pixel form") {
  RgbImage img(3, 2);
  img.at(0, 0) = {255, 0, 0};
  img.at(2, 1) = {10, 200, 30};
  const HsvImage hsv = rgb_to_hsv(img);
  for (int y = 0; y < 2; ++y)
    for (int x = 0; x < 3; ++x) CHECK(hsv.at(x, y) == rgb_to_hsv(img.at(x, y)));
}

TEST_CASE("hue survives intensity scaling") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> scale(0.0, 1.0);
  std::uniform_int_distribution<int> channel(0, 255);
  int tested = 0;
  while (tested < 2000) {
    const double c = 1.0 - scale(rng);  // (0, 1]
    const Rgb p{std::uint8_t(channel(rng)), std::uint8_t(channel(rng)), std::uint8_t(channel(rng))};
    const int chroma = std::max({p.r, p.g, p.b}) - std::min({p.r, p.g, p.b});
    // Below this the rounded channels no longer resolve a single hue bin.
    if (c * chroma < 64) continue;
    const Rgb q{std::uint8_t(std::lround(c * p.r)), std::uint8_t(std::lround(c * p.g)),
                std::uint8_t(std::lround(c * p.b))};
    INFO(int(p.r), ",", int(p.g), ",", int(p.b), " c=", c);
    CHECK(hue_gap(rgb_to_hsv(p).h, rgb_to_hsv(q).h) <= 1);
    ++tested;
  }
}

TEST_CASE("hsv_to_rgb inverts rgb_to_hsv for saturated colours") {
  for (int h = 0; h < 180; ++h) {
    const Hsv in{std::uint8_t(h), 230, 240};
    CHECK(hue_gap(rgb_to_hsv(hsv_to_rgb(in)).h, h) == 0);
  }
}

TEST_CASE("abs_diff") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> channel(0, 255);
  RgbImage a(17, 9);
  for (auto& p : a.pixels()) p = {std::uint8_t(channel(rng)), std::uint8_t(channel(rng)), std::uint8_t(channel(rng))};

  SUBCASE("identical inputs give a zero plane") {
    const GrayImage d = abs_diff(a, a);
    for (auto v : d.pixels()) CHECK(v == 0);
  }
  SUBCASE("black against white saturates") {
    const RgbImage black(4, 4, Rgb{0, 0, 0}), white(4, 4, Rgb{255, 255, 255});
    const GrayImage d = abs_diff(black, white);
    for (auto v : d.pixels()) CHECK(v == 255);
  }
  SUBCASE("channel max") {
    const RgbImage p(1, 1, Rgb{10, 50, 100}), q(1, 1, Rgb{20, 45, 40});
    CHECK(abs_diff(p, q).at(0, 0) == 60);
  }
  SUBCASE("size mismatch") {
    CHECK_THROWS_AS(abs_diff(a, RgbImage(3, 3)), Error);
  }
}

TEST_CASE("abs_diff of a pasted disc is nonzero exactly on the disc") {
  SceneSpec spec;
  spec.show_marker = false;
  spec.ball = {40.0, -30.0, 0.0, 25.0, {20, 230, 240}};
  SceneSpec empty = spec;
  empty.show_ball = false;
  const GrayImage d = abs_diff(render_scene(empty).rgb, render_scene(spec).rgb);
  const BinaryMask disc = ball_raster(spec);
  REQUIRE(testing::popcount(disc) > 100);
  for (std::size_t i = 0; i < d.size(); ++i) CHECK((d.pixels()[i] != 0) == (disc.pixels()[i] != 0));
}

TEST_CASE("otsu_threshold") {
  SUBCASE("two spikes") {
    Histogram256 h{};
    h[10] = 500;
    h[200] = 300;
    const int t = otsu_threshold(h);
    CHECK(t == testing::brute_force_otsu(h));
    CHECK(t == 10);
  }
  SUBCASE("single bin") {
    for (int v : {0, 77, 255}) {
      Histogram256 h{};
      h[v] = 42;
      CHECK(otsu_threshold(h) == v);
    }
  }
  SUBCASE("empty histogram") {
    CHECK_THROWS_AS(otsu_threshold(Histogram256{}), Error);
  }
  SUBCASE("random histograms match exhaustive search") {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> count(0, 1000);
    std::uniform_int_distribution<int> sparse(0, 3);
    for (int trial = 0; trial < 300; ++trial) {
      Histogram256 h{};
      for (auto& c : h) c = (trial % 2 == 0 || sparse(rng) == 0) ? count(rng) : 0;
      CHECK(otsu_threshold(h) == testing::brute_force_otsu(h));
    }
  }
  SUBCASE("bimodal image separates the modes") {
    GrayImage img(20, 10, 30);
    for (int y = 0; y < 10; ++y)
      for (int x = 10; x < 20; ++x) img.at(x, y) = 220;
    const auto t = otsu_threshold(histogram(img));
    CHECK(t >= 30);
    CHECK(t < 220);
    CHECK(testing::popcount(threshold_above(img, t)) == 100);
  }
}

TEST_CASE("smooth_binary") {
  SUBCASE("solid rectangle loses only its four corner pixels") {
    BinaryMask m(20, 15);
    for (int y = 3; y <= 10; ++y)
      for (int x = 4; x <= 16; ++x) m.at(x, y) = 1;
    // Direct vote count.
    BinaryMask expect(20, 15);
    for (int y = 0; y < 15; ++y)
      for (int x = 0; x < 20; ++x) {
        int votes = 0;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx)
            votes += m.contains(x + dx, y + dy) && m.at(x + dx, y + dy);
        expect.at(x, y) = votes >= 5;
      }
    const BinaryMask out = smooth_binary(m);
    CHECK(out == expect);
    CHECK(testing::popcount(out) == testing::popcount(m) - 4);
    for (auto [x, y] : {std::pair{4, 3}, {16, 3}, {4, 10}, {16, 10}}) CHECK(out.at(x, y) == 0);
  }
  SUBCASE("isolated pixel is cleared") {
    BinaryMask m(5, 5);
    m.at(2, 2) = 1;
    CHECK(testing::popcount(smooth_binary(m)) == 0);
  }
  SUBCASE("pinhole is filled") {
    BinaryMask m(7, 7, 1);
    m.at(3, 3) = 0;
    CHECK(smooth_binary(m).at(3, 3) == 1);
  }
  SUBCASE("image border counts as unset") {
    BinaryMask m(3, 3, 1);
    const BinaryMask out = smooth_binary(m);
    CHECK(out.at(1, 1) == 1);
    CHECK(out.at(0, 1) == 1);  // 6 of 9
    CHECK(out.at(0, 0) == 0);  // 4 of 9
  }
}

TEST_CASE("label_components uses 8-connectivity") {
  BinaryMask m(6, 4);
  m.at(0, 0) = 1;
  m.at(1, 1) = 1;  // diagonal neighbour
  m.at(4, 2) = 1;
  const auto labels = label_components(m);
  REQUIRE(labels.components.size() == 2);
  CHECK(labels.components[0].area == 2);
  CHECK(labels.components[0].bbox == Rect{0, 0, 2, 2});
  CHECK(labels.components[1].bbox == Rect{4, 2, 1, 1});
  CHECK(labels.labels.at(1, 1) == 1);
  CHECK(labels.labels.at(4, 2) == 2);
}

TEST_CASE("largest_component") {
  SUBCASE("two discs keep the bigger") {
    const BinaryMask big = testing::raster_disc(80, 60, {25, 30}, 10);
    const BinaryMask small = testing::raster_disc(80, 60, {60, 20}, 4);
    BinaryMask both(80, 60);
    for (std::size_t i = 0; i < both.size(); ++i) both.pixels()[i] = big.pixels()[i] | small.pixels()[i];
    const BinaryMask out = largest_component(both);
    CHECK(out == big);
    CHECK(count_set(out) == testing::popcount(big));
  }
  SUBCASE("ring is filled into a disc") {
    const BinaryMask outer = testing::raster_disc(50, 50, {25, 25}, 15);
    const BinaryMask inner = testing::raster_disc(50, 50, {25, 25}, 7);
    BinaryMask ring(50, 50);
    for (std::size_t i = 0; i < ring.size(); ++i) ring.pixels()[i] = outer.pixels()[i] && !inner.pixels()[i];
    CHECK(largest_component(ring) == outer);
  }
  SUBCASE("empty mask") {
    CHECK_THROWS_AS(largest_component(BinaryMask(8, 8)), Error);
  }
  SUBCASE("equal areas keep the first in raster order") {
    BinaryMask m(10, 10);
    for (int y = 6; y < 9; ++y)
      for (int x = 0; x < 3; ++x) m.at(x, y) = 1;
    for (int y = 1; y < 4; ++y)
      for (int x = 6; x < 9; ++x) m.at(x, y) = 1;
    const BinaryMask out = largest_component(m);
    CHECK(out.at(7, 2) == 1);
    CHECK(out.at(1, 7) == 0);
  }
  SUBCASE("idempotent on random masks") {
    std::mt19937_64 rng(21);
    std::bernoulli_distribution bit(0.45);
    for (int trial = 0; trial < 30; ++trial) {
      BinaryMask m(31, 23);
      for (auto& v : m.pixels()) v = bit(rng);
      const BinaryMask once = largest_component(m);
      CHECK(largest_component(once) == once);
    }
  }
}

TEST_CASE("warp_affine") {
  const DepthImage img = ramp(40, 30);

  SUBCASE("identity") {
    CHECK(warp_affine(img, AffineTransform::identity()) == img);
  }
  SUBCASE("integer translation") {
    const DepthImage out = warp_affine(img, AffineTransform::translation(3, 5));
    for (int y = 0; y < 30; ++y)
      for (int x = 0; x < 40; ++x) {
        if (x < 3 || y < 5) {
          CHECK(out.at(x, y) == 0);
        } else {
          CHECK(out.at(x, y) == img.at(x - 3, y - 5));
        }
      }
  }
  SUBCASE("round trip through scale 2 and a shift") {
    const AffineTransform t{{2.0, 0.0, 5.0, 0.0, 2.0, 3.0}};
    const DepthImage back = warp_affine(warp_affine(img, t), t.inverse());
    std::size_t common = 0;
    for (int y = 0; y < 30; ++y)
      for (int x = 0; x < 40; ++x) {
        const bool in_bounds = 2 * x + 5 < 40 && 2 * y + 3 < 30;
        if (in_bounds) {
          ++common;
          CHECK(back.at(x, y) == img.at(x, y));
        } else {
          CHECK(back.at(x, y) == 0);
        }
      }
    CHECK(common == 18 * 14);
  }
  SUBCASE("round trip through a quarter turn") {
    const DepthImage square = ramp(25, 25);
    const AffineTransform t{{0.0, -1.0, 24.0, 1.0, 0.0, 0.0}};
    CHECK(warp_affine(warp_affine(square, t), t.inverse()) == square);
  }
  SUBCASE("explicit output size and raw scale") {
    DepthImage scaled(4, 4, 2.5, 7);
    const DepthImage out = warp_affine(scaled, AffineTransform::identity(), 6, 3);
    CHECK(out.width() == 6);
    CHECK(out.height() == 3);
    CHECK(out.raw_to_mm() == 2.5);
    CHECK(out.at(3, 2) == 7);
    CHECK(out.at(5, 0) == 0);
  }
  SUBCASE("singular transform") {
    CHECK_THROWS_AS(warp_affine(img, AffineTransform{{1, 2, 0, 2, 4, 0}}), Error);
  }
}

TEST_CASE("hue_histogram") {
  SUBCASE("uniform hue object") {
    HsvImage img(10, 10, Hsv{90, 200, 200});
    BinaryMask mask(10, 10);
    for (int y = 2; y < 6; ++y)
      for (int x = 3; x < 8; ++x) {
        mask.at(x, y) = 1;
        img.at(x, y) = {20, 200, 200};
      }
    const HueHistogram h = hue_histogram(img, mask);
    CHECK(h[20] == 20);
    std::uint64_t total = 0;
    for (auto c : h) total += c;
    CHECK(total == 20);
  }
  SUBCASE("empty mask") {
    CHECK_THROWS_AS(hue_histogram(HsvImage(4, 4), BinaryMask(4, 4)), Error);
  }
  SUBCASE("mismatched sizes") {
    CHECK_THROWS_AS(hue_histogram(HsvImage(4, 4), BinaryMask(4, 5, 1)), Error);
  }
  SUBCASE("noisy simulator ball peaks at its hue") {
    for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
      SceneSpec spec;
      spec.show_marker = false;
      spec.ball = {0.0, 0.0, 0.0, 25.0, {20, 230, 240}};
      spec.hue_jitter = 3;
      spec.seed = seed;
      const auto scene = render_scene(spec);
      const auto hist = hue_histogram(rgb_to_hsv(scene.rgb), ball_raster(spec));
      const int peak = static_cast<int>(argmax(hist));
      CHECK(hue_gap(peak, 20) <= 1);
    }
  }
}

TEST_CASE("argmax breaks ties toward the smallest index") {
  CHECK(argmax(std::array<int, 5>{1, 7, 3, 7, 0}) == 1);
  CHECK(argmax(std::array<int, 3>{0, 0, 0}) == 0);
}

TEST_CASE("affine inverse") {
  const AffineTransform t{{0.9, -0.2, 12.0, 0.3, 1.1, -4.0}};
  const AffineTransform inv = t.inverse();
  for (Point2 p : {Point2{0, 0}, Point2{13.5, -2}, Point2{400, 300}}) {
    const Point2 q = inv.apply(t.apply(p));
    CHECK(q.x == doctest::Approx(p.x).epsilon(1e-12));
    CHECK(q.y == doctest::Approx(p.y).epsilon(1e-12));
  }
  CHECK_THROWS_AS(AffineTransform({{0, 0, 1, 0, 0, 1}}).inverse(), Error);
}

TEST_CASE("image construction rejects empty dimensions") {
  CHECK_THROWS_AS(GrayImage(0, 5), Error);
  CHECK_THROWS_AS(GrayImage(2, 2, std::vector<std::uint8_t>(3)), Error);
}
