#pragma once

#include <vector>

#include "gpcam/calibration.hpp"
#include "gpcam/corner_grid.hpp"

namespace gpcam::metrics {

// Scaled RMS perpendicular distances of grid rows/columns to their
// best-fit lines.
struct CollinearityReport {
  std::vector<double> per_row;
  std::vector<double> per_col;
  double board_average = 0.0;
};

struct DatasetCollinearity {
  std::vector<CollinearityReport> boards;
  double dataset_average = 0.0;  // mean of board averages ("GP CE")
};

CollinearityReport collinearity_error(const CornerGrid& board);
DatasetCollinearity collinearity_error(const std::vector<CornerGrid>& boards);

// Scaled RMS distance between projected model corners and observations.
// The divisor is the grid-square edge length in the observation's units
// (1 for virtual-plane boards).
double reprojection_error(const calibration::SimplifiedIntrinsics& K,
                          const std::vector<calibration::Pose>& poses,
                          const CornerGrid& model_grid,
                          const std::vector<CornerGrid>& observed,
                          double edge_length = 1.0);

struct PixelRay {
  Eigen::Vector2d pixel;
  geometry::Line3D line;
  double origin_distance = 0.0;
  int inlier_count = 0;
  bool valid = false;  // false when RANSAC found no consensus
};

struct RayBundleReport {
  std::vector<PixelRay> rays;
  double max_origin_distance = 0.0;
  double rms_origin_distance = 0.0;
};

// Evenly spaced grid over [0, cols-1] x [0, rows-1] in virtual pixels.
geometry::Points2 make_pixel_grid(int rows, int cols, int n = 10);

// Back-projects each virtual pixel onto every board plane via the
// board's homography inverse, fits a 3D line per pixel and reports the
// distances of the fitted rays to the camera origin.
RayBundleReport pinhole_bundle_check(
    const calibration::SimplifiedIntrinsics& K,
    const std::vector<calibration::Pose>& poses,
    const std::vector<geometry::Homography>& board_homographies,
    const geometry::Points2& pixel_grid, double ransac_threshold = 1e-3,
    int ransac_iterations = 500, std::uint64_t seed = 42);

}  // namespace gpcam::metrics
