#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tangible/error.hpp"
#include "tangible/imaging.hpp"

namespace tangible::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,
  kExitCalibration = 3,
  kExitIo = 4,
  kExitValidation = 5,
};

int exit_code_for(ErrorCode code) noexcept;

// Writes {"error": name, "message": ...} as one line.
void report_error(std::ostream& err, const Error& e);

struct CalibrateOptions {
  std::filesystem::path background;
  std::filesystem::path with_marker;
  std::filesystem::path with_pointer;
  AffineTransform depth_to_rgb;
  double camera_height_mm = 1000.0;
  Point2 principal_point{320.0, 240.0};
  double rho_z = 1.0;
  double raw_to_mm = 1.0;
  std::filesystem::path out;
};

struct TrackOptions {
  std::filesystem::path calib;
  std::filesystem::path frames;
  std::optional<std::string> listen;
  bool fps_report = false;
  // Paces playback to a live-camera rate; 0 runs as fast as possible.
  double rate_fps = 0.0;
};

struct SimulateOptions {
  std::optional<std::filesystem::path> spec;
  std::filesystem::path out;
  std::size_t frames = 10;
  std::uint64_t seed = 7;
  std::optional<int> hue_jitter;
  std::optional<int> depth_jitter;
  double radius_mm = 60.0;
  double min_height_mm = 150.0;
  double max_height_mm = 400.0;
};

struct BenchSize {
  int width = 640;
  int height = 480;
};

struct BenchOptions {
  std::vector<BenchSize> sizes{{640, 480}};
  std::size_t iterations = 100;
  std::uint64_t seed = 1;
  bool json = false;
};

struct BenchRow {
  BenchSize size;
  std::size_t iterations = 0;
  double cminmax_median_ns = 0.0;
  double harris_median_ns = 0.0;
  double ratio = 0.0;  // harris / cminmax
};

int cmd_calibrate(const CalibrateOptions& opts, std::ostream& out, std::ostream& err);
int cmd_track(const TrackOptions& opts, std::ostream& out, std::ostream& err);
int cmd_simulate(const SimulateOptions& opts, std::ostream& out, std::ostream& err);
int cmd_bench(const BenchOptions& opts, std::ostream& out, std::ostream& err);

std::vector<BenchRow> run_bench(const BenchOptions& opts);
std::string bench_table(const std::vector<BenchRow>& rows);
std::string bench_json(const std::vector<BenchRow>& rows);

// Parsers for comma-separated flag values; throw Error(InvalidArgument).
AffineTransform parse_affine(const std::string& text);
Point2 parse_point(const std::string& text);
std::vector<BenchSize> parse_sizes(const std::string& text);

// Reads TT_LOG and configures diagnostics on standard error.
void init_logging();

}  // namespace tangible::cli
