#pragma once

// Netpbm I/O: RGB as binary PPM (P6, maxval 255); grayscale and masks as
// binary PGM (P5, maxval 255; masks store 0 / 255); depth as binary PGM with
// maxval 65535 and big-endian samples.

#include <filesystem>

#include "tangible/imaging.hpp"

namespace tangible {

RgbImage read_ppm(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const RgbImage& img);

GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const GrayImage& img);

BinaryMask read_mask(const std::filesystem::path& path);
void write_mask(const std::filesystem::path& path, const BinaryMask& mask);

DepthImage read_depth(const std::filesystem::path& path, double raw_to_mm = 1.0);
void write_depth(const std::filesystem::path& path, const DepthImage& depth);

}  // namespace tangible
