#include "tangible/corner_detection.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace tangible {

namespace {

// Rotated integer coordinates pick up rounding noise; values this close are
// the same extreme.
constexpr double kTieTolerance = 1e-6;

struct TieRun {
  double best;
  std::size_t lo_index = 0;  // run endpoint with minimal orthogonal coordinate
  std::size_t hi_index = 0;
  double lo_ortho = 0.0;
  double hi_ortho = 0.0;
};

// Indices of the 8 tie-run endpoints for points given as (u, v) arrays.
std::array<std::size_t, 8> extreme_indices(std::span<const double> u,
                                           std::span<const double> v) {
  double u_min = u[0], u_max = u[0], v_min = v[0], v_max = v[0];
  for (std::size_t i = 1; i < u.size(); ++i) {
    u_min = std::min(u_min, u[i]);
    u_max = std::max(u_max, u[i]);
    v_min = std::min(v_min, v[i]);
    v_max = std::max(v_max, v[i]);
  }

  TieRun runs[4] = {{u_min}, {u_max}, {v_min}, {v_max}};
  bool seen[4] = {false, false, false, false};
  auto visit = [&](int r, std::size_t i, double value, double ortho) {
    if (std::abs(value - runs[r].best) > kTieTolerance) return;
    TieRun& run = runs[r];
    if (!seen[r]) {
      seen[r] = true;
      run.lo_index = run.hi_index = i;
      run.lo_ortho = run.hi_ortho = ortho;
      return;
    }
    if (ortho < run.lo_ortho) {
      run.lo_ortho = ortho;
      run.lo_index = i;
    }
    if (ortho > run.hi_ortho) {
      run.hi_ortho = ortho;
      run.hi_index = i;
    }
  };
  for (std::size_t i = 0; i < u.size(); ++i) {
    visit(0, i, u[i], v[i]);
    visit(1, i, u[i], v[i]);
    visit(2, i, v[i], u[i]);
    visit(3, i, v[i], u[i]);
  }
  return {runs[0].lo_index, runs[0].hi_index, runs[1].lo_index, runs[1].hi_index,
          runs[2].lo_index, runs[2].hi_index, runs[3].lo_index, runs[3].hi_index};
}

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }
  std::size_t find(std::size_t i) {
    while (parent_[i] != i) i = parent_[i] = parent_[parent_[i]];
    return i;
  }
  void join(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

// Single-linkage clusters, returned as centroids ordered by first member.
std::vector<Point2> cluster_centroids(std::span<const Point2> pts, double eps) {
  DisjointSets sets(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      if (distance(pts[i], pts[j]) <= eps) sets.join(i, j);
    }
  }
  std::vector<std::size_t> root_slot(pts.size(), pts.size());
  std::vector<Point2> sums;
  std::vector<double> counts;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const std::size_t root = sets.find(i);
    if (root_slot[root] == pts.size()) {
      root_slot[root] = sums.size();
      sums.push_back({});
      counts.push_back(0.0);
    }
    const std::size_t slot = root_slot[root];
    sums[slot] = sums[slot] + pts[i];
    counts[slot] += 1.0;
  }
  for (std::size_t s = 0; s < sums.size(); ++s) sums[s] = sums[s] * (1.0 / counts[s]);
  return sums;
}

// Drops the flattest corner (smallest turning angle around the polygon)
// until at most n remain.
void prune_to(std::vector<Point2>& corners, std::size_t n) {
  while (corners.size() > n) {
    Point2 mean{};
    for (Point2 c : corners) mean = mean + c;
    mean = mean * (1.0 / static_cast<double>(corners.size()));
    std::vector<std::size_t> order(corners.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return std::atan2(corners[a].y - mean.y, corners[a].x - mean.x) <
             std::atan2(corners[b].y - mean.y, corners[b].x - mean.x);
    });

    std::size_t flattest = order[0];
    double smallest_turn = std::numeric_limits<double>::infinity();
    const std::size_t m = order.size();
    for (std::size_t k = 0; k < m; ++k) {
      const Point2 prev = corners[order[(k + m - 1) % m]];
      const Point2 cur = corners[order[k]];
      const Point2 next = corners[order[(k + 1) % m]];
      const Point2 a = cur - prev, b = next - cur;
      const double turn = std::abs(std::atan2(a.x * b.y - a.y * b.x, a.x * b.x + a.y * b.y));
      if (turn < smallest_turn) {
        smallest_turn = turn;
        flattest = order[k];
      }
    }
    corners.erase(corners.begin() + static_cast<std::ptrdiff_t>(flattest));
  }
}

struct Attempt {
  std::vector<Point2> corners;
  int passes = 0;
};

Attempt run_passes(std::span<const Point2> pts, Point2 center, int n,
                   double phase, double eps) {
  const int passes = n / 2;
  std::vector<double> u(pts.size()), v(pts.size());
  std::vector<Point2> candidates;
  candidates.reserve(8 * static_cast<std::size_t>(passes));

  for (int k = 0; k < passes; ++k) {
    const double theta = k * std::numbers::pi / n + phase;
    const double c = std::cos(theta), s = std::sin(theta);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double dx = pts[i].x - center.x, dy = pts[i].y - center.y;
      u[i] = c * dx - s * dy;
      v[i] = s * dx + c * dy;
    }
    // Rotating a candidate back by -theta recovers the original pixel.
    for (std::size_t idx : extreme_indices(u, v)) candidates.push_back(pts[idx]);
  }

  Attempt out{cluster_centroids(candidates, eps), passes};
  prune_to(out.corners, static_cast<std::size_t>(n));
  return out;
}

// Largest distance of any point from the principal axis through `center`.
double max_off_axis(std::span<const Point2> pts, Point2 center) {
  double sxx = 0, syy = 0, sxy = 0;
  for (Point2 p : pts) {
    const double dx = p.x - center.x, dy = p.y - center.y;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  const double angle = 0.5 * std::atan2(2 * sxy, sxx - syy);
  const double nx = -std::sin(angle), ny = std::cos(angle);
  double worst = 0;
  for (Point2 p : pts) {
    worst = std::max(worst, std::abs((p.x - center.x) * nx + (p.y - center.y) * ny));
  }
  return worst;
}

std::vector<double> gaussian_kernel(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3 * sigma)));
  std::vector<double> k(2 * radius + 1);
  double sum = 0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-(i * i) / (2 * sigma * sigma));
    sum += k[i + radius];
  }
  for (double& w : k) w /= sum;
  return k;
}

// Separable convolution with replicated borders.
std::vector<double> blur(const std::vector<double>& src, int w, int h,
                         const std::vector<double>& kernel) {
  const int r = static_cast<int>(kernel.size() / 2);
  std::vector<double> tmp(src.size()), out(src.size());
  for (int y = 0; y < h; ++y) {
    const double* row = &src[static_cast<std::size_t>(y) * w];
    for (int x = 0; x < w; ++x) {
      double acc = 0;
      for (int i = -r; i <= r; ++i) acc += kernel[i + r] * row[std::clamp(x + i, 0, w - 1)];
      tmp[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0;
      for (int i = -r; i <= r; ++i) {
        acc += kernel[i + r] * tmp[static_cast<std::size_t>(std::clamp(y + i, 0, h - 1)) * w + x];
      }
      out[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
  return out;
}

}  // namespace

std::vector<Point2> extreme_candidates(std::span<const Point2> points) {
  if (points.empty()) {
    throw Error(ErrorCode::EmptyPointSet, "extreme_candidates: no points");
  }
  std::vector<double> u(points.size()), v(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    u[i] = points[i].x;
    v[i] = points[i].y;
  }
  std::vector<Point2> out;
  out.reserve(8);
  for (std::size_t idx : extreme_indices(u, v)) out.push_back(points[idx]);
  return out;
}

std::vector<Point2> mask_points(const BinaryMask& mask) {
  std::vector<Point2> pts;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (mask.at(x, y)) pts.push_back({static_cast<double>(x), static_cast<double>(y)});
    }
  }
  return pts;
}

Point2 mask_centroid(const BinaryMask& mask) {
  double sx = 0, sy = 0;
  std::size_t n = 0;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask.at(x, y)) continue;
      sx += x;
      sy += y;
      ++n;
    }
  }
  if (n == 0) throw Error(ErrorCode::EmptyMask, "mask_centroid: empty mask");
  return {sx / static_cast<double>(n), sy / static_cast<double>(n)};
}

CornerSet cminmax_corners(const BinaryMask& mask, const CMinMaxParams& params) {
  if (params.n < 3) throw Error(ErrorCode::InvalidArgument, "cminmax: n must be >= 3");
  if (params.cluster_epsilon < 0) {
    throw Error(ErrorCode::InvalidArgument, "cminmax: cluster_epsilon must be positive");
  }
  const std::vector<Point2> pts = mask_points(mask);
  if (pts.size() < static_cast<std::size_t>(params.n)) {
    throw Error(ErrorCode::DegenerateMask, "cminmax: fewer set pixels than corners");
  }

  Point2 center{};
  double min_x = pts[0].x, max_x = pts[0].x, min_y = pts[0].y, max_y = pts[0].y;
  for (Point2 p : pts) {
    center = center + p;
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  center = center * (1.0 / static_cast<double>(pts.size()));
  if (max_off_axis(pts, center) < 1.0) {
    throw Error(ErrorCode::DegenerateMask, "cminmax: set pixels are collinear");
  }

  const double eps = params.cluster_epsilon > 0
                         ? params.cluster_epsilon
                         : std::max(3.0, 0.01 * std::hypot(max_x - min_x, max_y - min_y));
  const int n = params.n;

  CornerSet result;
  result.n_requested = n;
  Attempt first = run_passes(pts, center, n, 0.0, eps);
  result.passes_used = first.passes;
  if (first.corners.size() < static_cast<std::size_t>(n)) {
    Attempt second = run_passes(pts, center, n, -std::numbers::pi / (2.0 * n), eps);
    result.passes_used += second.passes;
    result.fallback_used = true;
    if (second.corners.size() > first.corners.size()) first = std::move(second);
  }
  result.corners = std::move(first.corners);
  return result;
}

GrayImage mask_to_gray(const BinaryMask& mask) {
  GrayImage gray(mask.width(), mask.height());
  auto pg = gray.pixels();
  auto pm = mask.pixels();
  for (std::size_t i = 0; i < pg.size(); ++i) pg[i] = pm[i] ? 255 : 0;
  return gray;
}

std::vector<Point2> harris_corners(const GrayImage& gray, std::size_t max_corners,
                                   const HarrisParams& params) {
  const int w = gray.width(), h = gray.height();
  if (w < 5 || h < 5) {
    throw Error(ErrorCode::InvalidArgument, "harris_corners: image smaller than 5x5");
  }
  auto px = [&](int x, int y) -> double {
    return gray.at(std::clamp(x, 0, w - 1), std::clamp(y, 0, h - 1));
  };

  const std::size_t n = static_cast<std::size_t>(w) * h;
  std::vector<double> ixx(n), iyy(n), ixy(n);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double gx = (px(x + 1, y - 1) + 2 * px(x + 1, y) + px(x + 1, y + 1)) -
                        (px(x - 1, y - 1) + 2 * px(x - 1, y) + px(x - 1, y + 1));
      const double gy = (px(x - 1, y + 1) + 2 * px(x, y + 1) + px(x + 1, y + 1)) -
                        (px(x - 1, y - 1) + 2 * px(x, y - 1) + px(x + 1, y - 1));
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      ixx[i] = gx * gx;
      iyy[i] = gy * gy;
      ixy[i] = gx * gy;
    }
  }

  const std::vector<double> kernel = gaussian_kernel(params.sigma);
  ixx = blur(ixx, w, h, kernel);
  iyy = blur(iyy, w, h, kernel);
  ixy = blur(ixy, w, h, kernel);

  std::vector<double> response(n);
  double max_response = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double det = ixx[i] * iyy[i] - ixy[i] * ixy[i];
    const double trace = ixx[i] + iyy[i];
    response[i] = det - params.k * trace * trace;
    max_response = std::max(max_response, response[i]);
  }
  if (max_response <= 0) return {};
  const double floor = params.quality_level * max_response;

  struct Peak {
    double response;
    std::size_t index;
  };
  std::vector<Peak> peaks;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      const double r = response[i];
      if (r <= floor) continue;
      bool is_peak = true;
      for (int dy = -1; dy <= 1 && is_peak; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const int nx = x + dx, ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          const double other = response[static_cast<std::size_t>(ny) * w + nx];
          // Plateaus keep their first pixel in raster order.
          const bool earlier = dy < 0 || (dy == 0 && dx < 0);
          if (other > r || (earlier && other == r)) {
            is_peak = false;
            break;
          }
        }
      }
      if (is_peak) peaks.push_back({r, i});
    }
  }
  std::stable_sort(peaks.begin(), peaks.end(),
                   [](const Peak& a, const Peak& b) { return a.response > b.response; });
  if (peaks.size() > max_corners) peaks.resize(max_corners);

  std::vector<Point2> out;
  out.reserve(peaks.size());
  for (const Peak& p : peaks) {
    out.push_back({static_cast<double>(p.index % w), static_cast<double>(p.index / w)});
  }
  return out;
}

}  // namespace tangible
