#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tangible/color_calibration.hpp"
#include "tangible/corner_detection.hpp"
#include "tangible/mask_extraction.hpp"
#include "tangible/registration.hpp"
#include "tangible/simulator.hpp"
#include "tangible/tracking.hpp"

namespace py = pybind11;
using namespace tangible;

namespace {

using U8Array = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;
using U16Array = py::array_t<std::uint16_t, py::array::c_style | py::array::forcecast>;
using F64Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

PyObject* g_error_type = nullptr;

RgbImage rgb_from(const U8Array& a) {
  if (a.ndim() != 3 || a.shape(2) != 3) throw Error(ErrorCode::InvalidArgument, "expected an HxWx3 uint8 array");
  const int h = static_cast<int>(a.shape(0)), w = static_cast<int>(a.shape(1));
  std::vector<Rgb> px(static_cast<std::size_t>(w) * h);
  const std::uint8_t* p = a.data();
  for (auto& v : px) {
    v = {p[0], p[1], p[2]};
    p += 3;
  }
  return RgbImage(w, h, std::move(px));
}

BinaryMask mask_from(const U8Array& a) {
  if (a.ndim() != 2) throw Error(ErrorCode::InvalidArgument, "expected an HxW array");
  const int h = static_cast<int>(a.shape(0)), w = static_cast<int>(a.shape(1));
  return BinaryMask(w, h, std::vector<std::uint8_t>(a.data(), a.data() + a.size()));
}

DepthImage depth_from(const U16Array& a, double raw_to_mm) {
  if (a.ndim() != 2) throw Error(ErrorCode::InvalidArgument, "expected an HxW uint16 array");
  const int h = static_cast<int>(a.shape(0)), w = static_cast<int>(a.shape(1));
  return DepthImage(Image<std::uint16_t>(w, h, std::vector<std::uint16_t>(a.data(), a.data() + a.size())),
                    raw_to_mm);
}

std::vector<Point2> points_from(const F64Array& a) {
  if (a.ndim() != 2 || a.shape(1) != 2) throw Error(ErrorCode::InvalidArgument, "expected an Nx2 array");
  std::vector<Point2> out;
  for (py::ssize_t i = 0; i < a.shape(0); ++i) out.push_back({a.at(i, 0), a.at(i, 1)});
  return out;
}

template <class Range>
py::array_t<double> points_to(const Range& pts) {
  py::array_t<double> out({static_cast<py::ssize_t>(std::size(pts)), py::ssize_t{2}});
  auto r = out.mutable_unchecked<2>();
  py::ssize_t i = 0;
  for (Point2 p : pts) {
    r(i, 0) = p.x;
    r(i, 1) = p.y;
    ++i;
  }
  return out;
}

py::array_t<double> matrix_to(const Eigen::Matrix3d& m) {
  py::array_t<double> out({3, 3});
  auto r = out.mutable_unchecked<2>();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r(i, j) = m(i, j);
  return out;
}

py::array_t<std::uint8_t> mask_to(const BinaryMask& m) {
  py::array_t<std::uint8_t> out({m.height(), m.width()});
  std::copy(m.pixels().begin(), m.pixels().end(), out.mutable_data());
  return out;
}

py::array_t<std::uint8_t> rgb_to(const RgbImage& img) {
  py::array_t<std::uint8_t> out({img.height(), img.width(), 3});
  std::uint8_t* p = out.mutable_data();
  for (Rgb v : img.pixels()) {
    *p++ = v.r;
    *p++ = v.g;
    *p++ = v.b;
  }
  return out;
}

py::array_t<std::uint16_t> depth_to(const DepthImage& img) {
  py::array_t<std::uint16_t> out({img.height(), img.width()});
  std::copy(img.pixels().begin(), img.pixels().end(), out.mutable_data());
  return out;
}

py::tuple point_tuple(Point2 p) { return py::make_tuple(p.x, p.y); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Tangible pointer tracking core";

  g_error_type = PyErr_NewException("tangible._core.TangibleError", PyExc_RuntimeError, nullptr);
  m.add_object("TangibleError", py::handle(g_error_type));
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(g_error_type)(std::string(e.what()));
      exc.attr("code") = std::string(e.name());
      PyErr_SetObject(g_error_type, exc.ptr());
    }
  });

  m.def("otsu_threshold", [](const std::vector<std::uint64_t>& hist) {
    if (hist.size() != 256) throw Error(ErrorCode::InvalidArgument, "histogram needs 256 bins");
    Histogram256 h{};
    std::copy(hist.begin(), hist.end(), h.begin());
    return static_cast<int>(otsu_threshold(h));
  }, py::arg("hist"));

  m.def("extract_mask", [](const U8Array& background, const U8Array& with_object, std::size_t min_area) {
    return mask_to(extract_mask(rgb_from(background), rgb_from(with_object), min_area));
  }, py::arg("background"), py::arg("with_object"), py::arg("min_area") = 200);

  m.def("cminmax_corners", [](const U8Array& mask, int n, double cluster_epsilon) {
    return points_to(cminmax_corners(mask_from(mask), {.n = n, .cluster_epsilon = cluster_epsilon}).corners);
  }, py::arg("mask"), py::arg("n") = 4, py::arg("cluster_epsilon") = 0.0);

  m.def("harris_corners", [](const U8Array& gray, std::size_t max_corners) {
    return points_to(harris_corners(mask_from(gray), max_corners));
  }, py::arg("gray"), py::arg("max_corners"));

  m.def("estimate_homography", [](const F64Array& src, const F64Array& dst) {
    const auto s = points_from(src), d = points_from(dst);
    const HomographyFit fit = estimate_homography(s, d);
    return py::make_tuple(matrix_to(fit.matrix), fit.residual);
  }, py::arg("src"), py::arg("dst"));

  m.def("correct_parallax", [](std::pair<double, double> b, std::pair<double, double> o, double h,
                               double camera_height) {
    return point_tuple(correct_parallax({b.first, b.second}, {o.first, o.second}, h, camera_height));
  }, py::arg("b"), py::arg("o"), py::arg("h"), py::arg("camera_height"));

  m.def("build_calibration", [](const U8Array& background, const U8Array& with_marker,
                                const U8Array& with_pointer, double camera_height_mm,
                                std::pair<double, double> principal_point, double rho_z,
                                double raw_to_mm, std::array<double, 6> depth_to_rgb) {
    RigConfig rig;
    rig.camera_height_mm = camera_height_mm;
    rig.principal_point = {principal_point.first, principal_point.second};
    rig.rho_z = rho_z;
    rig.raw_to_mm = raw_to_mm;
    rig.depth_to_rgb.m = depth_to_rgb;
    const CalibrationReport rep =
        build_calibration(rgb_from(background), rgb_from(with_marker), rgb_from(with_pointer), rig);
    py::dict out;
    out["profile"] = profile_to_json(rep.profile);
    out["corners"] = points_to(rep.ordered_corners);
    out["centroid"] = point_tuple(rep.marker_centroid);
    out["residual"] = rep.residual;
    out["hue_peak"] = rep.hue_peak;
    out["t_rv"] = matrix_to(rep.profile.t_rv.matrix);
    return out;
  }, py::arg("background"), py::arg("with_marker"), py::arg("with_pointer"),
     py::arg("camera_height_mm") = 1000.0, py::arg("principal_point") = std::pair{320.0, 240.0},
     py::arg("rho_z") = 1.0, py::arg("raw_to_mm") = 1.0,
     py::arg("depth_to_rgb") = std::array<double, 6>{1, 0, 0, 0, 1, 0});

  m.def("track_frame", [](const U8Array& rgb, const U16Array& depth, const std::string& profile) {
    const CalibrationProfile cal = profile_from_json(profile);
    FramePair frame;
    frame.rgb = rgb_from(rgb);
    frame.depth = align_depth(depth_from(depth, cal.raw_to_mm), cal, frame.rgb.width(), frame.rgb.height());
    const PointerFix fix = track_frame(frame, cal);
    py::dict out;
    out["pixel"] = point_tuple(fix.pixel);
    out["depth_mm"] = fix.depth_mm;
    out["real"] = py::make_tuple(fix.real.x, fix.real.y, fix.real.z);
    out["virtual"] = py::make_tuple(fix.virtual_pos.x, fix.virtual_pos.y, fix.virtual_pos.z);
    return out;
  }, py::arg("rgb"), py::arg("depth"), py::arg("profile"));

  m.def("render_scene", [](const std::string& scene_json) {
    const SceneFile scene = scene_from_json(scene_json);
    scene.spec.validate();
    const RenderedScene r = render_scene(scene.spec);
    return py::make_tuple(rgb_to(r.rgb), depth_to(r.depth), truth_to_json(scene.spec, {r.truth}));
  }, py::arg("scene_json"));
}
