#pragma once

// Test-only oracles and generators. Nothing here calls into the code paths
// it is used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "tangible/imaging.hpp"

namespace testing {

using tangible::BinaryMask;
using tangible::Point2;

inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }

// Point-in-convex-polygon by edge signs, boundary inclusive.
inline bool in_convex(const std::vector<Point2>& poly, Point2 p) {
  bool pos = false, neg = false;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point2 a = poly[i], b = poly[(i + 1) % poly.size()];
    const double c = cross(b - a, p - a);
    if (c > 1e-9) pos = true;
    if (c < -1e-9) neg = true;
  }
  return !(pos && neg);
}

inline BinaryMask raster_polygon(int w, int h, const std::vector<Point2>& poly) {
  BinaryMask m(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) m.at(x, y) = in_convex(poly, {double(x), double(y)});
  return m;
}

inline BinaryMask raster_disc(int w, int h, Point2 c, double r) {
  BinaryMask m(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double dx = x - c.x, dy = y - c.y;
      m.at(x, y) = dx * dx + dy * dy <= r * r;
    }
  return m;
}

inline std::vector<Point2> regular_polygon(Point2 c, double r, int n, double phase = 0.0) {
  std::vector<Point2> v;
  for (int i = 0; i < n; ++i) {
    const double a = phase + 2 * std::numbers::pi * i / n;
    v.push_back({c.x + r * std::cos(a), c.y + r * std::sin(a)});
  }
  return v;
}

// Largest distance from a truth vertex to its nearest detected corner.
inline double worst_match(const std::vector<Point2>& truth, const std::vector<Point2>& found) {
  double worst = 0.0;
  for (Point2 t : truth) {
    double best = 1e300;
    for (Point2 f : found) best = std::min(best, std::hypot(f.x - t.x, f.y - t.y));
    worst = std::max(worst, best);
  }
  return worst;
}

inline std::size_t popcount(const BinaryMask& m) {
  std::size_t n = 0;
  for (auto v : m.pixels()) n += v != 0;
  return n;
}

inline double iou(const BinaryMask& a, const BinaryMask& b) {
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool p = a.pixels()[i] != 0, q = b.pixels()[i] != 0;
    inter += p && q;
    uni += p || q;
  }
  return uni == 0 ? 1.0 : double(inter) / double(uni);
}

// Exhaustive Otsu with exact integer comparisons. Between-class variance
// w0 w1 (mu0 - mu1)^2 equals (S0 W - w0 S)^2 / (w0 w1), so candidates are
// compared as fractions without rounding.
inline int brute_force_otsu(const tangible::Histogram256& hist) {
  using i128 = __int128;
  i128 total = 0, sum = 0;
  for (int i = 0; i < 256; ++i) {
    total += hist[i];
    sum += i128(hist[i]) * i;
  }
  int best = -1;
  i128 best_num = 0, best_den = 1;
  i128 w0 = 0, s0 = 0;
  for (int t = 0; t < 256; ++t) {
    w0 += hist[t];
    s0 += i128(hist[t]) * t;
    if (w0 == 0) continue;
    const i128 w1 = total - w0;
    i128 num = 0, den = 1;
    if (w1 > 0) {
      const i128 d = s0 * total - w0 * sum;
      num = d * d;
      den = w0 * w1;
    }
    if (best < 0 || num * best_den > best_num * den) {
      best = t;
      best_num = num;
      best_den = den;
    }
  }
  return best;
}

// Walks the hue circle from lo until it reaches h or hi.
inline bool hue_member(int h, int lo, int hi) {
  for (int b = lo;; b = (b + 1) % 180) {
    if (b == h) return true;
    if (b == hi) return false;
  }
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("tangible_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing
