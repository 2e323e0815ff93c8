#pragma once

#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <string>
#include <vector>

#include "gpcam/calibration.hpp"
#include "gpcam/corner_grid.hpp"
#include "gpcam/metrics.hpp"
#include "gpcam/synth.hpp"
#include "gpcam/virtual_camera.hpp"

namespace gpcam {

struct GroundTruth {
  calibration::FullIntrinsics intrinsics;
  std::vector<calibration::Pose> poses;
  synth::VirtualGroundTruth virtual_truth;
  std::vector<CornerGrid> undistorted_boards;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
  std::string scenario = "custom";
};

// On-disk dataset: detected (or synthesized) corners per board plus the
// board geometry, with an optional ground-truth block for scoring.
struct DatasetFile {
  int rows = 0;
  int cols = 0;
  double square_size = 1.0;
  int image_width = 0;
  int image_height = 0;
  std::vector<CornerGrid> boards;
  std::optional<GroundTruth> ground_truth;

  static DatasetFile from_synthetic(const synth::Dataset& ds);
};

nlohmann::json to_json(const DatasetFile& ds);
DatasetFile dataset_from_json(const nlohmann::json& doc);

void save_dataset(const std::string& path, const DatasetFile& ds);
// Validates schema, corner counts and row-major monotonic ordering.
DatasetFile load_dataset(const std::string& path);

struct CalibrationResult {
  std::string method;  // "simplified" | "full-linear"
  int reference_board = 0;
  std::optional<calibration::SimplifiedCalibration> simplified;
  std::optional<calibration::FullIntrinsics> full;
  std::vector<calibration::Pose> poses;
  std::vector<geometry::Homography> homographies;
  std::optional<VirtualCameraMap> virtual_camera;

  Eigen::Matrix3d intrinsic_matrix() const;
};

nlohmann::json to_json(const CalibrationResult& result);
CalibrationResult calibration_from_json(const nlohmann::json& doc);
void save_calibration(const std::string& path, const CalibrationResult& r);
CalibrationResult load_calibration(const std::string& path);

struct EvaluationResult {
  metrics::DatasetCollinearity collinearity;
  double reprojection_error = 0.0;
  metrics::RayBundleReport ray_bundle;
};

nlohmann::json to_json(const EvaluationResult& result);
void save_evaluation(const std::string& json_path,
                     const std::string& csv_path,
                     const EvaluationResult& result,
                     const std::vector<std::string>& board_ids);

// Scenario description consumed by the generate command: either
// {"preset": name, overrides...} or a full inline specification.
synth::ScenarioSpec scenario_from_json(const nlohmann::json& doc);

nlohmann::json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const nlohmann::json& doc);

}  // namespace gpcam
