#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "gpcam/errors.hpp"

namespace gpcam::geometry {

using Points2 = Eigen::Matrix<double, Eigen::Dynamic, 2>;
using Points3 = Eigen::Matrix<double, Eigen::Dynamic, 3>;

// 3x3 projective map between planes, defined up to scale.
// Stored in canonical form: unit Frobenius norm, last nonzero entry
// (row-major scan from the end) positive.
struct Homography {
  Eigen::Matrix3d H = Eigen::Matrix3d::Identity();

  static Homography from_matrix(const Eigen::Matrix3d& m);
  Homography inverse() const;
};

struct Line2D {
  Eigen::Vector2d direction;  // unit norm
  Eigen::Vector2d point;
};

struct Line3D {
  Eigen::Vector3d direction;  // unit norm
  Eigen::Vector3d point;

  double distance_to(const Eigen::Vector3d& p) const {
    return ((p - point) - (p - point).dot(direction) * direction).norm();
  }
};

// Right singular vector of the smallest singular value, unit norm,
// sign fixed so the first entry above 1e-14 in magnitude is positive.
std::pair<Eigen::VectorXd, double> smallest_singular_vector(
    const Eigen::MatrixXd& A);

// DLT with Hartley normalization of both point sets.
// Throws DegenerateConfiguration when the correspondences do not
// determine a homography (second-smallest singular value ~ 0).
Homography estimate_homography(const Points2& src, const Points2& dst);

// De-homogenized images of p under H. Throws PointAtInfinity when a
// third homogeneous coordinate falls below 1e-12 in magnitude.
Points2 apply_homography(const Homography& H, const Points2& p);

// Total-least-squares line plus unsigned perpendicular distances.
std::pair<Line2D, Eigen::VectorXd> fit_line_2d(const Points2& points);

struct RansacLineResult {
  Line3D line;
  std::vector<bool> inlier_mask;
  int inlier_count = 0;
};

// RANSAC over 2-point samples, TLS refit on the consensus set.
// Deterministic given the seed.
RansacLineResult fit_line_3d_ransac(const Points3& points,
                                    double inlier_threshold = 1e-3,
                                    int iterations = 500,
                                    std::uint64_t seed = 42);

// TLS line through 3D points (used for the RANSAC refit and tests).
Line3D fit_line_3d(const Points3& points);

}  // namespace gpcam::geometry
