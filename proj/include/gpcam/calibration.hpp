#pragma once

#include <Eigen/Dense>
#include <vector>

#include "gpcam/corner_grid.hpp"
#include "gpcam/geometry.hpp"

namespace gpcam::calibration {

using geometry::Homography;

struct FullIntrinsics {
  double fx = 1.0;  // f * s_x
  double fy = 1.0;  // f * s_y
  double skew = 0.0;
  Eigen::Vector2d principal_point = Eigen::Vector2d::Zero();

  Eigen::Matrix3d matrix() const;
};

// Square pixels, no skew: the GP-camera intrinsics.
struct SimplifiedIntrinsics {
  double f = 1.0;  // virtual-pixel units
  Eigen::Vector2d principal_point = Eigen::Vector2d::Zero();

  Eigen::Matrix3d matrix() const;
};

struct Pose {
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  Eigen::Vector3d t = Eigen::Vector3d::Zero();
};

// Two rows of the Zhang linear system per homography:
// h1^T B h2 = 0 and h1^T B h1 - h2^T B h2 = 0.
// Full parameterization b = (B11, B12, B22, B13, B23, B33); simplified
// b = (B11, B13, B23, B33) with B22 = B11 and B12 = 0.
Eigen::Matrix<double, 2, 6> constraint_rows_full(const Homography& H);
Eigen::Matrix<double, 2, 4> constraint_rows_simplified(const Homography& H);

// Appendix-A style linear Zhang: needs >= 3 boards with distinct
// orientations. Recovers K from B = K^-T K^-1 via triangular
// factorization.
FullIntrinsics calibrate_full_linear(const std::vector<Homography>& hs);

struct SimplifiedCalibration {
  SimplifiedIntrinsics intrinsics;
  double sigma_min = 0.0;     // smallest singular value of the stacked system
  double sigma_second = 0.0;  // second smallest, degeneracy diagnostic
};

// Square-pixel variant: 4 unknowns, >= 2 boards, closed-form extraction
// of (f, u_c, v_c) with no triangular factorization.
SimplifiedCalibration calibrate_simplified(const std::vector<Homography>& hs);

// H ~ K [r1 | r2 | t]; scale from the mean of |K^-1 h1|, |K^-1 h2|,
// rotation projected to SO(3), sign fixed so t_z > 0.
Pose recover_extrinsics(const Eigen::Matrix3d& K, const Homography& H);
Pose recover_extrinsics(const SimplifiedIntrinsics& K, const Homography& H);
Pose recover_extrinsics(const FullIntrinsics& K, const Homography& H);

// Per-board homography from the planar model grid to the observed
// (virtual-plane) corners. Estimation errors are rethrown with the
// offending board_id in the message.
std::vector<Homography> extract_board_homographies(
    const std::vector<CornerGrid>& boards, const CornerGrid& model_grid);

}  // namespace gpcam::calibration
