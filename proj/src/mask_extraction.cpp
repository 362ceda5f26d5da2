#include "tangible/mask_extraction.hpp"

#include <string>

namespace tangible {

BinaryMask extract_mask(const MaskRequest& req) {
  if (req.min_area < 1) {
    throw Error(ErrorCode::InvalidArgument, "min_area must be >= 1");
  }
  const GrayImage diff = abs_diff(req.background, req.with_object);
  const std::uint8_t t = otsu_threshold(histogram(diff));
  const BinaryMask mask = largest_component(smooth_binary(threshold_above(diff, t)));
  const std::size_t area = count_set(mask);
  if (area < req.min_area) {
    throw Error(ErrorCode::TooSmall,
                "largest component has " + std::to_string(area) +
                    " px, below min_area " + std::to_string(req.min_area));
  }
  return mask;
}

BinaryMask extract_mask(const RgbImage& background, const RgbImage& with_object,
                        std::size_t min_area) {
  return extract_mask(MaskRequest{background, with_object, min_area});
}

}  // namespace tangible
