#pragma once

#include <cstddef>

#include "tangible/imaging.hpp"

namespace tangible {

struct MaskRequest {
  RgbImage background;
  RgbImage with_object;
  std::size_t min_area = 200;
};

// Mask of the object present in `with_object` but not in `background`:
// abs_diff, Otsu threshold, 3x3 majority smoothing, then the largest filled
// component. Throws EmptyMask when nothing survives, TooSmall when the
// surviving component is below min_area.
BinaryMask extract_mask(const MaskRequest& req);
BinaryMask extract_mask(const RgbImage& background, const RgbImage& with_object,
                        std::size_t min_area = 200);

}  // namespace tangible
