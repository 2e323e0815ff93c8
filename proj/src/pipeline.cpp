#include "gpcam/pipeline.hpp"

#include <iostream>

namespace gpcam {

CalibrationResult run_calibration(const DatasetFile& dataset,
                                  int reference_board,
                                  const std::string& method) {
  if (reference_board < 0 ||
      reference_board >= static_cast<int>(dataset.boards.size()))
    throw Error("run_calibration: reference board index out of range");
  if (method != "simplified" && method != "full-linear")
    throw Error("run_calibration: unknown method '" + method + "'");

  TrainReport report;
  const VirtualCameraMap map = train_virtual_camera(
      dataset.boards[static_cast<size_t>(reference_board)],
      Eigen::Vector2i(dataset.image_width, dataset.image_height), &report);
  if (report.small_footprint_warning)
    std::cerr << "warning: reference board covers less than half of the "
                 "image; GP predictions will extrapolate near the borders\n";

  std::vector<CornerGrid> mapped;
  mapped.reserve(dataset.boards.size());
  for (const CornerGrid& b : dataset.boards) mapped.push_back(map.map_board(b));

  const CornerGrid model = make_model_grid(dataset.rows, dataset.cols);

  CalibrationResult result;
  result.method = method;
  result.reference_board = reference_board;
  result.homographies = calibration::extract_board_homographies(mapped, model);

  Eigen::Matrix3d k;
  if (method == "simplified") {
    result.simplified = calibration::calibrate_simplified(result.homographies);
    k = result.simplified->intrinsics.matrix();
  } else {
    result.full = calibration::calibrate_full_linear(result.homographies);
    k = result.full->matrix();
  }
  for (const auto& h : result.homographies)
    result.poses.push_back(calibration::recover_extrinsics(k, h));
  result.virtual_camera = map;
  return result;
}

EvaluationResult run_evaluation(const DatasetFile& dataset,
                                const CalibrationResult& calibration) {
  if (!calibration.virtual_camera)
    throw Error("run_evaluation: calibration lacks the GP-camera map");
  if (calibration.poses.size() != dataset.boards.size())
    throw Error("run_evaluation: board count mismatch between dataset (" +
                std::to_string(dataset.boards.size()) + ") and calibration (" +
                std::to_string(calibration.poses.size()) + ")");

  std::vector<CornerGrid> mapped;
  mapped.reserve(dataset.boards.size());
  for (const CornerGrid& b : dataset.boards)
    mapped.push_back(calibration.virtual_camera->map_board(b));

  EvaluationResult result;
  result.collinearity = metrics::collinearity_error(mapped);

  calibration::SimplifiedIntrinsics k;
  if (calibration.simplified) {
    k = calibration.simplified->intrinsics;
  } else if (calibration.full) {
    // Square-pixel view of a full calibration; skew is dropped.
    k.f = 0.5 * (calibration.full->fx + calibration.full->fy);
    k.principal_point = calibration.full->principal_point;
  } else {
    throw Error("run_evaluation: calibration lacks intrinsics");
  }

  const CornerGrid model = make_model_grid(dataset.rows, dataset.cols);
  result.reprojection_error =
      metrics::reprojection_error(k, calibration.poses, model, mapped);
  result.ray_bundle = metrics::pinhole_bundle_check(
      k, calibration.poses, calibration.homographies,
      metrics::make_pixel_grid(dataset.rows, dataset.cols));
  return result;
}

}  // namespace gpcam
