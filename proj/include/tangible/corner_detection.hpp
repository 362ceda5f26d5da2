#pragma once

// cMinMax corner detection for convex polygon masks, plus a Harris
// baseline used for speed comparisons.

#include <cstddef>
#include <span>
#include <vector>

#include "tangible/imaging.hpp"

namespace tangible {

struct CMinMaxParams {
  // Expected maximum number of corners; at least 3.
  int n = 4;
  // Single-linkage clustering distance in pixels. Zero selects the default
  // max(3, 1% of the mask bounding-box diagonal).
  double cluster_epsilon = 0.0;
};

struct CornerSet {
  std::vector<Point2> corners;
  int n_requested = 0;
  // Rotation passes executed, including the fallback attempt if it ran.
  int passes_used = 0;
  bool fallback_used = false;
};

// For each of x_min, x_max, y_min, y_max: the two endpoints of the tie run
// attaining it (minimal and maximal orthogonal coordinate). Always returns
// 8 points in that order; duplicates are kept. Throws EmptyPointSet.
std::vector<Point2> extreme_candidates(std::span<const Point2> points);

CornerSet cminmax_corners(const BinaryMask& mask, const CMinMaxParams& params = {});

// Coordinates of all set pixels in row-major order.
std::vector<Point2> mask_points(const BinaryMask& mask);

// Mean of set-pixel coordinates. Throws EmptyMask.
Point2 mask_centroid(const BinaryMask& mask);

struct HarrisParams {
  double k = 0.04;
  double sigma = 1.0;
  // Responses below quality_level * max response are discarded.
  double quality_level = 0.01;
};

// Structure-tensor corner response on Sobel gradients with a Gaussian
// window, 3x3 non-maximum suppression; strongest first.
std::vector<Point2> harris_corners(const GrayImage& gray, std::size_t max_corners,
                                   const HarrisParams& params = {});

// Mask rendered as a 0 / 255 grayscale image.
GrayImage mask_to_gray(const BinaryMask& mask);

}  // namespace tangible
