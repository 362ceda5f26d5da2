#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <random>
#include <regex>
#include <sstream>
#include <thread>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "json.hpp"
#include "stream_server.hpp"
#include "tangible/corner_detection.hpp"
#include "tangible/image_io.hpp"
#include "tangible/registration.hpp"
#include "tangible/simulator.hpp"
#include "tangible/tracking.hpp"

namespace tangible::cli {

namespace {

using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

std::vector<double> parse_numbers(const std::string& text, std::size_t expected,
                                  const char* what) {
  std::vector<double> values;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, std::string(what) + ": bad number '" + item + "'");
    }
  }
  if (values.size() != expected) {
    throw Error(ErrorCode::InvalidArgument, std::string(what) + ": expected " +
                                                std::to_string(expected) + " comma-separated numbers");
  }
  return values;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string fmt_point(Point2 p) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(2) << '(' << p.x << ", " << p.y << ')';
  return s.str();
}

}  // namespace

int exit_code_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::IoError:
    case ErrorCode::ParseError:
      return kExitIo;
    case ErrorCode::InvalidArgument:
    case ErrorCode::SpecViolation:
    case ErrorCode::DimensionMismatch:
      return kExitValidation;
    default:
      return kExitCalibration;
  }
}

void report_error(std::ostream& err, const Error& e) {
  err << json{{"error", e.name()}, {"message", e.what()}}.dump() << '\n';
}

AffineTransform parse_affine(const std::string& text) {
  const auto v = parse_numbers(text, 6, "depth-to-rgb");
  AffineTransform t;
  std::copy(v.begin(), v.end(), t.m.begin());
  return t;
}

Point2 parse_point(const std::string& text) {
  const auto v = parse_numbers(text, 2, "point");
  return {v[0], v[1]};
}

std::vector<BenchSize> parse_sizes(const std::string& text) {
  static const std::regex pattern(R"((\d+)x(\d+))");
  std::vector<BenchSize> sizes;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::smatch m;
    if (!std::regex_match(item, m, pattern)) {
      throw Error(ErrorCode::InvalidArgument, "size '" + item + "' is not WIDTHxHEIGHT");
    }
    const int w = std::stoi(m[1]), h = std::stoi(m[2]);
    if (w < 32 || h < 32) throw Error(ErrorCode::InvalidArgument, "bench sizes must be >= 32x32");
    sizes.push_back({w, h});
  }
  if (sizes.empty()) throw Error(ErrorCode::InvalidArgument, "no sizes given");
  return sizes;
}

void init_logging() {
  auto logger = spdlog::stderr_color_mt("tangible");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  const char* env = std::getenv("TT_LOG");
  const std::string level = env ? env : "warn";
  if (level == "error") {
    spdlog::set_level(spdlog::level::err);
  } else if (level == "info") {
    spdlog::set_level(spdlog::level::info);
  } else if (level == "debug") {
    spdlog::set_level(spdlog::level::debug);
  } else {
    spdlog::set_level(spdlog::level::warn);
  }
}

int cmd_calibrate(const CalibrateOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    const RgbImage background = read_ppm(opts.background);
    const RgbImage with_marker = read_ppm(opts.with_marker);
    const RgbImage with_pointer = read_ppm(opts.with_pointer);
    RigConfig rig;
    rig.depth_to_rgb = opts.depth_to_rgb;
    rig.camera_height_mm = opts.camera_height_mm;
    rig.principal_point = opts.principal_point;
    rig.rho_z = opts.rho_z;
    rig.raw_to_mm = opts.raw_to_mm;

    const CalibrationReport report = build_calibration(background, with_marker, with_pointer, rig);
    save_profile(opts.out, report.profile);

    out << "corners:";
    for (Point2 c : report.ordered_corners) out << ' ' << fmt_point(c);
    out << "\ncentroid: " << fmt_point(report.marker_centroid) << '\n';
    const HueBounds& b = report.profile.hue_bounds;
    out << "hue_bounds: lo=" << b.lo << " hi=" << b.hi << " wraps=" << (b.wraps ? "true" : "false")
        << " peak=" << report.hue_peak << '\n';
    out << "residual: " << report.residual << '\n';
    out << "profile: " << opts.out.string() << '\n';
    return kExitOk;
  } catch (const Error& e) {
    report_error(err, e);
    return exit_code_for(e.code());
  }
}

int cmd_track(const TrackOptions& opts, std::ostream& out, std::ostream& err) {
  CalibrationProfile cal;
  std::unique_ptr<StreamServer> server;
  std::map<std::size_t, std::filesystem::path> frames;
  try {
    cal = load_profile(opts.calib);
    if (!std::filesystem::is_directory(opts.frames)) {
      throw Error(ErrorCode::IoError, "not a directory: " + opts.frames.string());
    }
    static const std::regex pattern(R"(rgb_(\d+)\.ppm)");
    for (const auto& entry : std::filesystem::directory_iterator(opts.frames)) {
      std::smatch m;
      const std::string name = entry.path().filename().string();
      if (std::regex_match(name, m, pattern)) frames[std::stoul(m[1])] = entry.path();
    }
    if (opts.listen) {
      const auto [host, port] = parse_endpoint(*opts.listen);
      server = std::make_unique<StreamServer>(host, port);
    }
  } catch (const Error& e) {
    report_error(err, e);
    return exit_code_for(e.code());
  }

  std::size_t seq = 0, ok = 0;
  double kernel_seconds = 0;
  const auto wall_start = Clock::now();
  const auto period = opts.rate_fps > 0 ? std::chrono::duration<double>(1.0 / opts.rate_fps)
                                        : std::chrono::duration<double>(0);
  auto next_due = wall_start;

  for (const auto& [index, rgb_path] : frames) {
    if (opts.rate_fps > 0) {
      std::this_thread::sleep_until(next_due);
      next_due += std::chrono::duration_cast<Clock::duration>(period);
    }
    std::optional<PointerFix> fix;
    std::string status = "ok";
    try {
      char depth_name[32];
      std::snprintf(depth_name, sizeof(depth_name), "depth_%04zu.pgm", index);
      FramePair frame;
      frame.rgb = read_ppm(rgb_path);
      const DepthImage raw = read_depth(opts.frames / depth_name, cal.raw_to_mm);
      frame.depth = align_depth(raw, cal, frame.rgb.width(), frame.rgb.height());

      const auto t0 = Clock::now();
      try {
        fix = track_frame(frame, cal);
      } catch (...) {
        kernel_seconds += std::chrono::duration<double>(Clock::now() - t0).count();
        throw;
      }
      kernel_seconds += std::chrono::duration<double>(Clock::now() - t0).count();
      ++ok;
    } catch (const Error& e) {
      status = std::string(e.name());
      spdlog::debug("frame {}: {}", index, e.what());
    }
    const std::string line = fix_to_json(seq++, index, fix, status);
    out << line << '\n';
    if (server) server->publish(line);
  }
  out.flush();

  const double wall_seconds = std::chrono::duration<double>(Clock::now() - wall_start).count();
  if (opts.fps_report) {
    const double n = static_cast<double>(frames.size());
    json report{{"frames", frames.size()},
                {"ok", ok},
                {"kernel_seconds", kernel_seconds},
                {"wall_seconds", wall_seconds},
                {"kernel_fps", kernel_seconds > 0 ? n / kernel_seconds : 0.0},
                {"wall_fps", wall_seconds > 0 ? n / wall_seconds : 0.0}};
    out << json{{"fps_report", report}}.dump() << '\n';
  }
  if (server) server->shutdown();
  spdlog::info("tracked {} frames, {} ok", frames.size(), ok);
  return kExitOk;
}

int cmd_simulate(const SimulateOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    SceneFile scene;
    if (opts.spec) {
      std::ifstream in(*opts.spec, std::ios::binary);
      if (!in) throw Error(ErrorCode::IoError, "cannot open " + opts.spec->string());
      std::stringstream buf;
      buf << in.rdbuf();
      scene = scene_from_json(buf.str());
    } else {
      scene.spec.ball = {180.0, 0.0, 0.0, 20.0, {20, 230, 240}};
      scene.spec.plane_to_image = marker_pose({320.0, 240.0}, 0.8, 0.1, 2e-4, -1e-4);
    }
    scene.spec.seed = opts.seed;
    if (opts.hue_jitter) scene.spec.hue_jitter = *opts.hue_jitter;
    if (opts.depth_jitter) scene.spec.depth_jitter = *opts.depth_jitter;
    if (scene.trajectory.empty()) {
      scene.trajectory = circular_trajectory(opts.frames, {0.0, 0.0}, opts.radius_mm,
                                             opts.min_height_mm, opts.max_height_mm);
    }
    const SequenceSummary summary = render_sequence(scene.spec, scene.trajectory, opts.out);
    out << "wrote " << summary.frames << " frames (" << summary.files.size() << " files) to "
        << opts.out.string() << '\n';
    out << "camera_height_mm=" << scene.spec.camera_height_mm
        << " principal_point=" << scene.spec.principal_point.x << ',' << scene.spec.principal_point.y
        << " rho_z=" << 1.0 / scene.spec.marker_width_mm << '\n';
    return kExitOk;
  } catch (const Error& e) {
    report_error(err, e);
    return exit_code_for(e.code());
  }
}

std::vector<BenchRow> run_bench(const BenchOptions& opts) {
  if (opts.iterations == 0) throw Error(ErrorCode::InvalidArgument, "iterations must be >= 1");
  std::vector<BenchRow> rows;
  for (const BenchSize& size : opts.sizes) {
    std::vector<double> cminmax_ns, harris_ns;
    cminmax_ns.reserve(opts.iterations);
    harris_ns.reserve(opts.iterations);
    std::size_t sink = 0;
    for (std::size_t i = 0; i < opts.iterations; ++i) {
      const SceneSpec scene = random_marker_scene(size.width, size.height, frame_seed(opts.seed, i));
      const BinaryMask mask = marker_raster(scene);
      const GrayImage gray = mask_to_gray(mask);

      auto t0 = Clock::now();
      sink += cminmax_corners(mask, {.n = 4}).corners.size();
      cminmax_ns.push_back(std::chrono::duration<double, std::nano>(Clock::now() - t0).count());

      t0 = Clock::now();
      sink += harris_corners(gray, 4).size();
      harris_ns.push_back(std::chrono::duration<double, std::nano>(Clock::now() - t0).count());
    }
    spdlog::debug("bench {}x{}: {} corners total", size.width, size.height, sink);
    BenchRow row;
    row.size = size;
    row.iterations = opts.iterations;
    row.cminmax_median_ns = median(cminmax_ns);
    row.harris_median_ns = median(harris_ns);
    row.ratio = row.harris_median_ns / row.cminmax_median_ns;
    rows.push_back(row);
  }
  return rows;
}

std::string bench_table(const std::vector<BenchRow>& rows) {
  std::ostringstream s;
  s << std::left << std::setw(12) << "size" << std::right << std::setw(8) << "iters"
    << std::setw(20) << "cminmax_median_ns" << std::setw(20) << "harris_median_ns"
    << std::setw(10) << "ratio" << '\n';
  for (const BenchRow& r : rows) {
    const std::string size = std::to_string(r.size.width) + "x" + std::to_string(r.size.height);
    s << std::left << std::setw(12) << size << std::right << std::setw(8) << r.iterations
      << std::fixed << std::setprecision(0) << std::setw(20) << r.cminmax_median_ns
      << std::setw(20) << r.harris_median_ns << std::setprecision(2) << std::setw(10) << r.ratio
      << '\n';
  }
  return s.str();
}

std::string bench_json(const std::vector<BenchRow>& rows) {
  json arr = json::array();
  for (const BenchRow& r : rows) {
    arr.push_back({{"width", r.size.width},
                   {"height", r.size.height},
                   {"iterations", r.iterations},
                   {"cminmax_median_ns", r.cminmax_median_ns},
                   {"harris_median_ns", r.harris_median_ns},
                   {"ratio", r.ratio}});
  }
  return arr.dump(2) + "\n";
}

int cmd_bench(const BenchOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    const auto rows = run_bench(opts);
    out << (opts.json ? bench_json(rows) : bench_table(rows));
    return kExitOk;
  } catch (const Error& e) {
    report_error(err, e);
    return exit_code_for(e.code());
  }
}

}  // namespace tangible::cli
