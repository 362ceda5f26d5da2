#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"

using namespace tangible;
using namespace tangible::cli;

int main(int argc, char** argv) {
  init_logging();

  CLI::App app{"Tangible pointer tracking toolkit"};
  app.require_subcommand(1);

  CalibrateOptions cal;
  std::string cal_affine = "1,0,0,0,1,0";
  std::string cal_center = "320,240";
  auto* calibrate = app.add_subcommand("calibrate", "Build a calibration profile from three captures");
  calibrate->add_option("--background", cal.background, "Empty desk (PPM)")->required();
  calibrate->add_option("--with-marker", cal.with_marker, "Desk with marker (PPM)")->required();
  calibrate->add_option("--with-pointer", cal.with_pointer, "Desk with marker and pointer (PPM)")->required();
  calibrate->add_option("--depth-to-rgb", cal_affine, "Row-major 2x3 affine, comma-separated");
  calibrate->add_option("--camera-height", cal.camera_height_mm, "Camera height above the marker plane, mm")->required();
  calibrate->add_option("--principal-point", cal_center, "x,y in RGB pixels");
  calibrate->add_option("--rho-z", cal.rho_z, "Virtual units per mm of height")->required();
  calibrate->add_option("--raw-to-mm", cal.raw_to_mm, "Depth raw unit in mm");
  calibrate->add_option("--out", cal.out, "Profile JSON path")->required();

  TrackOptions track;
  std::string listen;
  auto* track_cmd = app.add_subcommand("track", "Track the pointer over a frame directory, JSONL to stdout");
  track_cmd->add_option("--calib", track.calib, "Calibration profile JSON")->required();
  track_cmd->add_option("--frames", track.frames, "Directory with rgb_NNNN.ppm / depth_NNNN.pgm")->required();
  auto* listen_opt = track_cmd->add_option("--listen", listen, "Stream records to TCP clients at host:port");
  track_cmd->add_flag("--fps-report", track.fps_report, "Print a final throughput line");
  track_cmd->add_option("--rate", track.rate_fps, "Pace playback to this many frames per second");

  SimulateOptions sim;
  std::string spec_path;
  int hue_jitter = 0, depth_jitter = 0;
  auto* simulate = app.add_subcommand("simulate", "Render a synthetic calibration set and frame sequence");
  auto* spec_opt = simulate->add_option("--spec", spec_path, "Scene spec JSON (optional trajectory)");
  simulate->add_option("--out", sim.out, "Output directory")->required();
  simulate->add_option("--frames", sim.frames, "Frames on the default circular path");
  simulate->add_option("--seed", sim.seed, "Noise seed");
  auto* hue_opt = simulate->add_option("--hue-jitter", hue_jitter, "Ball hue noise, +/- bins");
  auto* depth_opt = simulate->add_option("--depth-jitter", depth_jitter, "Depth noise, +/- raw units");
  simulate->add_option("--radius-mm", sim.radius_mm, "Circular path radius");
  simulate->add_option("--min-height", sim.min_height_mm, "Lowest ball height, mm");
  simulate->add_option("--max-height", sim.max_height_mm, "Highest ball height, mm");

  BenchOptions bench;
  std::string sizes = "640x480";
  auto* bench_cmd = app.add_subcommand("bench", "Time cMinMax against Harris on random marker masks");
  bench_cmd->add_option("--sizes", sizes, "Comma-separated WIDTHxHEIGHT list");
  bench_cmd->add_option("--iterations", bench.iterations, "Masks per size");
  bench_cmd->add_option("--seed", bench.seed, "Scene seed");
  bench_cmd->add_flag("--json", bench.json, "Emit a JSON array instead of a table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*calibrate) {
      cal.depth_to_rgb = parse_affine(cal_affine);
      cal.principal_point = parse_point(cal_center);
      return cmd_calibrate(cal, std::cout, std::cerr);
    }
    if (*track_cmd) {
      if (*listen_opt) track.listen = listen;
      return cmd_track(track, std::cout, std::cerr);
    }
    if (*simulate) {
      if (*spec_opt) sim.spec = spec_path;
      if (*hue_opt) sim.hue_jitter = hue_jitter;
      if (*depth_opt) sim.depth_jitter = depth_jitter;
      return cmd_simulate(sim, std::cout, std::cerr);
    }
    if (*bench_cmd) {
      bench.sizes = parse_sizes(sizes);
      return cmd_bench(bench, std::cout, std::cerr);
    }
  } catch (const Error& e) {
    report_error(std::cerr, e);
    return e.code() == ErrorCode::InvalidArgument ? kExitUsage : exit_code_for(e.code());
  }
  return kExitUsage;
}
