#include "tangible/image_io.hpp"

#include <cctype>
#include <fstream>
#include <string>
#include <vector>

namespace tangible {

namespace {

struct Header {
  std::string magic;
  int width = 0;
  int height = 0;
  int maxval = 0;
};

[[noreturn]] void parse_fail(const std::filesystem::path& path, const std::string& why) {
  throw Error(ErrorCode::ParseError, path.string() + ": " + why);
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot create " + path.string());
  return out;
}

void skip_space_and_comments(std::istream& in) {
  for (;;) {
    const int c = in.peek();
    if (c == '#') {
      std::string ignored;
      std::getline(in, ignored);
    } else if (c != EOF && std::isspace(c)) {
      in.get();
    } else {
      return;
    }
  }
}

int read_int(std::istream& in, const std::filesystem::path& path) {
  skip_space_and_comments(in);
  int value = -1;
  if (!(in >> value) || value < 1) parse_fail(path, "bad header field");
  return value;
}

Header read_header(std::istream& in, const std::filesystem::path& path) {
  Header h;
  char magic[2];
  if (!in.read(magic, 2)) parse_fail(path, "truncated header");
  h.magic.assign(magic, 2);
  h.width = read_int(in, path);
  h.height = read_int(in, path);
  h.maxval = read_int(in, path);
  if (h.maxval > 65535) parse_fail(path, "maxval out of range");
  // Exactly one whitespace byte separates the header from the raster.
  if (!std::isspace(in.get())) parse_fail(path, "missing raster separator");
  return h;
}

std::vector<unsigned char> read_raster(std::istream& in, std::size_t bytes,
                                       const std::filesystem::path& path) {
  std::vector<unsigned char> data(bytes);
  if (!in.read(reinterpret_cast<char*>(data.data()),
               static_cast<std::streamsize>(bytes))) {
    parse_fail(path, "truncated raster");
  }
  return data;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "write failed: " + path.string());
}

}  // namespace

RgbImage read_ppm(const std::filesystem::path& path) {
  auto in = open_in(path);
  const Header h = read_header(in, path);
  if (h.magic != "P6") parse_fail(path, "expected P6");
  if (h.maxval != 255) parse_fail(path, "expected maxval 255");
  const auto n = static_cast<std::size_t>(h.width) * h.height;
  const auto data = read_raster(in, 3 * n, path);
  std::vector<Rgb> pixels(n);
  for (std::size_t i = 0; i < n; ++i) {
    pixels[i] = {data[3 * i], data[3 * i + 1], data[3 * i + 2]};
  }
  return RgbImage(h.width, h.height, std::move(pixels));
}

void write_ppm(const std::filesystem::path& path, const RgbImage& img) {
  auto out = open_out(path);
  out << "P6\n" << img.width() << ' ' << img.height() << "\n255\n";
  std::vector<unsigned char> data;
  data.reserve(img.size() * 3);
  for (Rgb p : img.pixels()) {
    data.push_back(p.r);
    data.push_back(p.g);
    data.push_back(p.b);
  }
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size()));
  finish(out, path);
}

GrayImage read_pgm(const std::filesystem::path& path) {
  auto in = open_in(path);
  const Header h = read_header(in, path);
  if (h.magic != "P5") parse_fail(path, "expected P5");
  if (h.maxval != 255) parse_fail(path, "expected maxval 255");
  const auto n = static_cast<std::size_t>(h.width) * h.height;
  const auto data = read_raster(in, n, path);
  return GrayImage(h.width, h.height,
                   std::vector<std::uint8_t>(data.begin(), data.end()));
}

void write_pgm(const std::filesystem::path& path, const GrayImage& img) {
  auto out = open_out(path);
  out << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels().data()),
            static_cast<std::streamsize>(img.size()));
  finish(out, path);
}

BinaryMask read_mask(const std::filesystem::path& path) {
  GrayImage gray = read_pgm(path);
  for (auto& v : gray.pixels()) v = v != 0;
  return gray;
}

void write_mask(const std::filesystem::path& path, const BinaryMask& mask) {
  GrayImage gray(mask.width(), mask.height());
  auto pg = gray.pixels();
  auto pm = mask.pixels();
  for (std::size_t i = 0; i < pg.size(); ++i) pg[i] = pm[i] ? 255 : 0;
  write_pgm(path, gray);
}

DepthImage read_depth(const std::filesystem::path& path, double raw_to_mm) {
  auto in = open_in(path);
  const Header h = read_header(in, path);
  if (h.magic != "P5") parse_fail(path, "expected P5");
  if (h.maxval < 256) parse_fail(path, "expected 16-bit maxval");
  const auto n = static_cast<std::size_t>(h.width) * h.height;
  const auto data = read_raster(in, 2 * n, path);
  std::vector<std::uint16_t> samples(n);
  for (std::size_t i = 0; i < n; ++i) {
    samples[i] = static_cast<std::uint16_t>((data[2 * i] << 8) | data[2 * i + 1]);
  }
  return DepthImage(Image<std::uint16_t>(h.width, h.height, std::move(samples)),
                    raw_to_mm);
}

void write_depth(const std::filesystem::path& path, const DepthImage& depth) {
  auto out = open_out(path);
  out << "P5\n" << depth.width() << ' ' << depth.height() << "\n65535\n";
  std::vector<unsigned char> data;
  data.reserve(depth.size() * 2);
  for (std::uint16_t v : depth.pixels()) {
    data.push_back(static_cast<unsigned char>(v >> 8));
    data.push_back(static_cast<unsigned char>(v & 0xff));
  }
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size()));
  finish(out, path);
}

}  // namespace tangible
