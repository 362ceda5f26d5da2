#include "tangible/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tangible {

namespace {

void require_same_size(int w0, int h0, int w1, int h1, const char* what) {
  if (w0 != w1 || h0 != h1) {
    throw Error(ErrorCode::DimensionMismatch, what);
  }
}

constexpr int kNeighbours8[8][2] = {{-1, -1}, {0, -1}, {1, -1}, {-1, 0},
                                    {1, 0},   {-1, 1}, {0, 1},  {1, 1}};
constexpr int kNeighbours4[4][2] = {{0, -1}, {-1, 0}, {1, 0}, {0, 1}};

}  // namespace

double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

DepthImage::DepthImage(int width, int height, double raw_to_mm,
                       std::uint16_t fill)
    : Image<std::uint16_t>(width, height, fill), raw_to_mm_(raw_to_mm) {
  if (!(raw_to_mm > 0.0) || !std::isfinite(raw_to_mm)) {
    throw Error(ErrorCode::InvalidArgument, "raw_to_mm must be positive");
  }
}

DepthImage::DepthImage(Image<std::uint16_t> raw, double raw_to_mm)
    : Image<std::uint16_t>(std::move(raw)), raw_to_mm_(raw_to_mm) {
  if (!(raw_to_mm > 0.0) || !std::isfinite(raw_to_mm)) {
    throw Error(ErrorCode::InvalidArgument, "raw_to_mm must be positive");
  }
}

AffineTransform AffineTransform::inverse() const {
  const double det = determinant();
  if (!std::isfinite(det) || std::abs(det) < 1e-12) {
    throw Error(ErrorCode::SingularTransform,
                "affine transform has a singular linear part");
  }
  const double a = m[4] / det, b = -m[1] / det;
  const double c = -m[3] / det, d = m[0] / det;
  return {{a, b, -(a * m[2] + b * m[5]), c, d, -(c * m[2] + d * m[5])}};
}

Hsv rgb_to_hsv(Rgb p) noexcept {
  const int r = p.r, g = p.g, b = p.b;
  const int v = std::max({r, g, b});
  const int diff = v - std::min({r, g, b});
  Hsv out;
  out.v = static_cast<std::uint8_t>(v);
  if (v == 0 || diff == 0) return out;
  out.s = static_cast<std::uint8_t>(std::lround(255.0 * diff / v));

  double hue;
  if (v == r) {
    hue = 60.0 * (g - b) / diff;
  } else if (v == g) {
    hue = 120.0 + 60.0 * (b - r) / diff;
  } else {
    hue = 240.0 + 60.0 * (r - g) / diff;
  }
  if (hue < 0.0) hue += 360.0;
  long half = std::lround(hue / 2.0);
  if (half >= 180) half -= 180;
  out.h = static_cast<std::uint8_t>(half);
  return out;
}

HsvImage rgb_to_hsv(const RgbImage& img) {
  HsvImage out(img.width(), img.height());
  std::transform(img.pixels().begin(), img.pixels().end(),
                 out.pixels().begin(), [](Rgb p) { return rgb_to_hsv(p); });
  return out;
}

Rgb hsv_to_rgb(Hsv p) noexcept {
  const double v = p.v;
  const double chroma = v * p.s / 255.0;
  const double sector = (p.h % 180) * 2.0 / 60.0;
  const double x = chroma * (1.0 - std::abs(std::fmod(sector, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(sector)) {
    case 0: r = chroma; g = x; break;
    case 1: r = x; g = chroma; break;
    case 2: g = chroma; b = x; break;
    case 3: g = x; b = chroma; break;
    case 4: r = x; b = chroma; break;
    default: r = chroma; b = x; break;
  }
  const double base = v - chroma;
  auto to8 = [](double c) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(c), 0L, 255L));
  };
  return {to8(r + base), to8(g + base), to8(b + base)};
}

GrayImage abs_diff(const RgbImage& a, const RgbImage& b) {
  require_same_size(a.width(), a.height(), b.width(), b.height(),
                    "abs_diff: image dimensions differ");
  GrayImage out(a.width(), a.height());
  auto pa = a.pixels();
  auto pb = b.pixels();
  auto po = out.pixels();
  for (std::size_t i = 0; i < pa.size(); ++i) {
    const int dr = std::abs(pa[i].r - pb[i].r);
    const int dg = std::abs(pa[i].g - pb[i].g);
    const int db = std::abs(pa[i].b - pb[i].b);
    po[i] = static_cast<std::uint8_t>(std::max({dr, dg, db}));
  }
  return out;
}

Histogram256 histogram(const GrayImage& img) {
  Histogram256 hist{};
  for (std::uint8_t v : img.pixels()) ++hist[v];
  return hist;
}

std::uint8_t otsu_threshold(const Histogram256& hist) {
  long double total = 0, total_sum = 0;
  for (int i = 0; i < 256; ++i) {
    total += hist[i];
    total_sum += static_cast<long double>(i) * hist[i];
  }
  if (total == 0) {
    throw Error(ErrorCode::EmptyHistogram, "otsu_threshold: empty histogram");
  }

  long double w0 = 0, sum0 = 0;
  long double best_var = -1;
  int best_t = 0;
  for (int t = 0; t < 256; ++t) {
    w0 += hist[t];
    sum0 += static_cast<long double>(t) * hist[t];
    if (w0 == 0) continue;
    const long double w1 = total - w0;
    long double var = 0;
    if (w1 > 0) {
      const long double mu0 = sum0 / w0;
      const long double mu1 = (total_sum - sum0) / w1;
      var = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
    }
    if (var > best_var) {
      best_var = var;
      best_t = t;
    }
  }
  return static_cast<std::uint8_t>(best_t);
}

BinaryMask threshold_above(const GrayImage& img, std::uint8_t t) {
  BinaryMask out(img.width(), img.height());
  std::transform(img.pixels().begin(), img.pixels().end(),
                 out.pixels().begin(),
                 [t](std::uint8_t v) { return std::uint8_t{v > t}; });
  return out;
}

BinaryMask smooth_binary(const BinaryMask& mask) {
  const int w = mask.width(), h = mask.height();
  BinaryMask out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      int votes = 0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = x + dx, ny = y + dy;
          if (mask.contains(nx, ny) && mask.at(nx, ny)) ++votes;
        }
      }
      out.at(x, y) = votes >= 5;
    }
  }
  return out;
}

ComponentLabels label_components(const BinaryMask& mask) {
  const int w = mask.width(), h = mask.height();
  ComponentLabels result{Image<std::int32_t>(w, h, 0), {}};
  auto& labels = result.labels;
  std::vector<std::pair<int, int>> stack;

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask.at(x, y) || labels.at(x, y) != 0) continue;
      const auto label = static_cast<std::int32_t>(result.components.size() + 1);
      Component comp;
      comp.first_pixel = static_cast<std::size_t>(y) * w + x;
      int min_x = x, max_x = x, min_y = y, max_y = y;

      labels.at(x, y) = label;
      stack.assign(1, {x, y});
      while (!stack.empty()) {
        auto [cx, cy] = stack.back();
        stack.pop_back();
        ++comp.area;
        min_x = std::min(min_x, cx);
        max_x = std::max(max_x, cx);
        min_y = std::min(min_y, cy);
        max_y = std::max(max_y, cy);
        for (const auto& d : kNeighbours8) {
          const int nx = cx + d[0], ny = cy + d[1];
          if (mask.contains(nx, ny) && mask.at(nx, ny) &&
              labels.at(nx, ny) == 0) {
            labels.at(nx, ny) = label;
            stack.emplace_back(nx, ny);
          }
        }
      }
      comp.bbox = {min_x, min_y, max_x - min_x + 1, max_y - min_y + 1};
      result.components.push_back(comp);
    }
  }
  return result;
}

BinaryMask fill_holes(const BinaryMask& mask) {
  const int w = mask.width(), h = mask.height();
  // Background reachable from the border through 4-connected unset pixels.
  BinaryMask outside(w, h, 0);
  std::vector<std::pair<int, int>> stack;
  auto seed = [&](int x, int y) {
    if (!mask.at(x, y) && !outside.at(x, y)) {
      outside.at(x, y) = 1;
      stack.emplace_back(x, y);
    }
  };
  for (int x = 0; x < w; ++x) {
    seed(x, 0);
    seed(x, h - 1);
  }
  for (int y = 0; y < h; ++y) {
    seed(0, y);
    seed(w - 1, y);
  }
  while (!stack.empty()) {
    auto [cx, cy] = stack.back();
    stack.pop_back();
    for (const auto& d : kNeighbours4) {
      const int nx = cx + d[0], ny = cy + d[1];
      if (mask.contains(nx, ny)) seed(nx, ny);
    }
  }

  BinaryMask out(w, h);
  auto po = out.pixels();
  auto pout = outside.pixels();
  for (std::size_t i = 0; i < po.size(); ++i) po[i] = !pout[i];
  return out;
}

BinaryMask largest_component(const BinaryMask& mask) {
  const ComponentLabels cc = label_components(mask);
  if (cc.components.empty()) {
    throw Error(ErrorCode::EmptyMask, "mask has no set pixels");
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < cc.components.size(); ++i) {
    if (cc.components[i].area > cc.components[best].area) best = i;
  }
  const auto keep = static_cast<std::int32_t>(best + 1);

  BinaryMask only(mask.width(), mask.height());
  auto po = only.pixels();
  auto pl = cc.labels.pixels();
  for (std::size_t i = 0; i < po.size(); ++i) po[i] = pl[i] == keep;
  return fill_holes(only);
}

std::size_t count_set(const BinaryMask& mask) noexcept {
  return static_cast<std::size_t>(
      std::count_if(mask.pixels().begin(), mask.pixels().end(),
                    [](std::uint8_t v) { return v != 0; }));
}

DepthImage warp_affine(const DepthImage& img, const AffineTransform& t) {
  return warp_affine(img, t, img.width(), img.height());
}

DepthImage warp_affine(const DepthImage& img, const AffineTransform& t,
                       int out_width, int out_height) {
  const AffineTransform inv = t.inverse();
  DepthImage out(out_width, out_height, img.raw_to_mm(), 0);
  for (int y = 0; y < out_height; ++y) {
    for (int x = 0; x < out_width; ++x) {
      const Point2 src = inv.apply({static_cast<double>(x), static_cast<double>(y)});
      const double sx = std::floor(src.x + 0.5);
      const double sy = std::floor(src.y + 0.5);
      if (sx < 0 || sy < 0 || sx >= img.width() || sy >= img.height()) continue;
      out.at(x, y) = img.at(static_cast<int>(sx), static_cast<int>(sy));
    }
  }
  return out;
}

HueHistogram hue_histogram(const HsvImage& img, const BinaryMask& mask) {
  require_same_size(img.width(), img.height(), mask.width(), mask.height(),
                    "hue_histogram: mask dimensions differ");
  HueHistogram hist{};
  std::uint64_t counted = 0;
  auto pi = img.pixels();
  auto pm = mask.pixels();
  for (std::size_t i = 0; i < pi.size(); ++i) {
    if (!pm[i]) continue;
    ++hist[pi[i].h % 180];
    ++counted;
  }
  if (counted == 0) {
    throw Error(ErrorCode::EmptyMask, "hue_histogram: mask selects no pixels");
  }
  return hist;
}

}  // namespace tangible
