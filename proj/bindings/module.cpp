#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>

#include "gpcam/pipeline.hpp"
#include "gpcam/undistort.hpp"

namespace py = pybind11;
using namespace gpcam;

namespace {

CornerGrid grid_from_array(const geometry::Points2& points, int rows,
                           int cols, const std::string& board_id) {
  CornerGrid g;
  g.rows = rows;
  g.cols = cols;
  g.points = points;
  g.board_id = board_id;
  if (!g.valid()) throw Error("corner array does not match rows*cols");
  return g;
}

RasterImage image_from_array(
    const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>&
        arr) {
  if (arr.ndim() != 2 && arr.ndim() != 3)
    throw Error("image array must be HxW or HxWxC");
  const int ch = arr.ndim() == 3 ? static_cast<int>(arr.shape(2)) : 1;
  RasterImage img = RasterImage::create(static_cast<int>(arr.shape(1)),
                                        static_cast<int>(arr.shape(0)), ch);
  std::memcpy(img.data.data(), arr.data(), img.data.size());
  return img;
}

py::array_t<std::uint8_t> image_to_array(const RasterImage& img) {
  if (img.channels == 1) {
    py::array_t<std::uint8_t> arr({img.height, img.width});
    std::memcpy(arr.mutable_data(), img.data.data(), img.data.size());
    return arr;
  }
  py::array_t<std::uint8_t> arr({img.height, img.width, img.channels});
  std::memcpy(arr.mutable_data(), img.data.data(), img.data.size());
  return arr;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "GP-camera calibration toolkit";

  py::register_exception<Error>(m, "GpcamError");

  py::class_<gp::Hyperparams>(m, "Hyperparams")
      .def(py::init<>())
      .def(py::init<double, double, double>(), py::arg("signal_variance"),
           py::arg("length_scale"), py::arg("noise_variance"))
      .def_readwrite("signal_variance", &gp::Hyperparams::signal_variance)
      .def_readwrite("length_scale", &gp::Hyperparams::length_scale)
      .def_readwrite("noise_variance", &gp::Hyperparams::noise_variance);

  py::class_<gp::GpModel>(m, "GpModel")
      .def("predict_mean", &gp::GpModel::predict_mean)
      .def("predict_variance", &gp::GpModel::predict_variance)
      .def_property_readonly("hyperparams", &gp::GpModel::hyperparams)
      .def_property_readonly("target_mean", &gp::GpModel::target_mean);

  m.def("se_kernel", &gp::se_kernel);
  m.def("kernel_matrix", &gp::kernel_matrix);
  m.def(
      "gp_fit",
      [](const gp::Inputs& x, const Eigen::VectorXd& y,
         const gp::Hyperparams& init) { return gp::fit(x, y, init); },
      py::arg("x"), py::arg("y"), py::arg("init") = gp::Hyperparams{});
  m.def("log_marginal_likelihood", &gp::log_marginal_likelihood);

  py::class_<geometry::Homography>(m, "Homography")
      .def_readonly("H", &geometry::Homography::H);
  m.def("estimate_homography", &geometry::estimate_homography);
  m.def("apply_homography", &geometry::apply_homography);

  py::class_<calibration::Pose>(m, "Pose")
      .def_readonly("R", &calibration::Pose::R)
      .def_readonly("t", &calibration::Pose::t);

  py::class_<calibration::SimplifiedIntrinsics>(m, "SimplifiedIntrinsics")
      .def_readonly("f", &calibration::SimplifiedIntrinsics::f)
      .def_readonly("principal_point",
                    &calibration::SimplifiedIntrinsics::principal_point);

  py::class_<VirtualCameraMap>(m, "VirtualCameraMap")
      .def("map_points",
           [](const VirtualCameraMap& map, const geometry::Points2& uv) {
             const MappedPoints mp = map.map_points(uv);
             return py::make_tuple(mp.xy, mp.sigma);
           })
      .def_property_readonly("reference_rows",
                             &VirtualCameraMap::reference_rows)
      .def_property_readonly("reference_cols",
                             &VirtualCameraMap::reference_cols);

  m.def(
      "train_virtual_camera",
      [](const geometry::Points2& corners, int rows, int cols) {
        return train_virtual_camera(grid_from_array(corners, rows, cols,
                                                    "reference"));
      },
      py::arg("corners"), py::arg("rows"), py::arg("cols"));

  m.def("preset_names", &synth::preset_names);
  m.def(
      "generate_dataset",
      [](const std::string& preset_name, double noise_sigma,
         std::uint64_t seed) {
        synth::ScenarioSpec spec = synth::preset(preset_name);
        spec.noise_sigma = noise_sigma;
        spec.seed = seed;
        const synth::Dataset ds = synth::generate_dataset(spec);
        py::dict out;
        out["rows"] = spec.board_rows;
        out["cols"] = spec.board_cols;
        std::vector<geometry::Points2> boards;
        for (const auto& b : ds.boards) boards.push_back(b.points);
        out["boards"] = boards;
        out["true_virtual_f"] = ds.virtual_truth.f;
        out["true_virtual_pp"] = ds.virtual_truth.principal_point;
        return out;
      },
      py::arg("preset"), py::arg("noise_sigma") = 0.0, py::arg("seed") = 7);

  m.def(
      "calibrate",
      [](const std::vector<geometry::Points2>& boards, int rows, int cols,
         int reference_board, const std::string& method) {
        DatasetFile ds;
        ds.rows = rows;
        ds.cols = cols;
        ds.image_width = 0;
        ds.image_height = 0;
        int i = 0;
        for (const auto& pts : boards)
          ds.boards.push_back(
              grid_from_array(pts, rows, cols, "board_" + std::to_string(i++)));
        const CalibrationResult r =
            run_calibration(ds, reference_board, method);
        py::dict out;
        out["method"] = r.method;
        if (r.simplified) {
          out["f"] = r.simplified->intrinsics.f;
          out["principal_point"] = r.simplified->intrinsics.principal_point;
          out["sigma_min"] = r.simplified->sigma_min;
        }
        if (r.full) {
          out["fx"] = r.full->fx;
          out["fy"] = r.full->fy;
          out["skew"] = r.full->skew;
          out["principal_point"] = r.full->principal_point;
        }
        out["poses"] = r.poses;
        const EvaluationResult ev = run_evaluation(ds, r);
        out["collinearity_error"] = ev.collinearity.dataset_average;
        out["reprojection_error"] = ev.reprojection_error;
        out["max_ray_origin_distance"] = ev.ray_bundle.max_origin_distance;
        return out;
      },
      py::arg("boards"), py::arg("rows"), py::arg("cols"),
      py::arg("reference_board") = 0, py::arg("method") = "simplified");

  m.def(
      "undistort_image",
      [](const VirtualCameraMap& map,
         const py::array_t<std::uint8_t,
                           py::array::c_style | py::array::forcecast>& image,
         double scale) {
        UndistortOptions opts;
        opts.scale = scale;
        const UndistortResult r =
            undistort_image(map, image_from_array(image), opts);
        return py::make_tuple(image_to_array(r.image),
                              image_to_array(r.coverage_mask));
      },
      py::arg("map"), py::arg("image"), py::arg("scale") = 40.0);
}
