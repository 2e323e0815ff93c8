#pragma once

#include "gpcam/dataset.hpp"

namespace gpcam {

// End-to-end calibration: trains the GP-camera on the reference board,
// maps all boards to the virtual plane, estimates per-board homographies
// and recovers intrinsics and poses.
CalibrationResult run_calibration(const DatasetFile& dataset,
                                  int reference_board = 0,
                                  const std::string& method = "simplified");

// Maps all dataset boards through the stored GP-camera and scores them:
// collinearity, reprojection error and the 10x10 ray-bundle check.
EvaluationResult run_evaluation(const DatasetFile& dataset,
                                const CalibrationResult& calibration);

}  // namespace gpcam
