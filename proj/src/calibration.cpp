#include "gpcam/calibration.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>
#include <cmath>

namespace gpcam::calibration {

Eigen::Matrix3d FullIntrinsics::matrix() const {
  Eigen::Matrix3d k;
  k << fx, skew, principal_point.x(), 0, fy, principal_point.y(), 0, 0, 1;
  return k;
}

Eigen::Matrix3d SimplifiedIntrinsics::matrix() const {
  Eigen::Matrix3d k;
  k << f, 0, principal_point.x(), 0, f, principal_point.y(), 0, 0, 1;
  return k;
}

namespace {

// Coefficient row of h_i^T B h_j in the 6-entry parameterization
// (B11, B12, B22, B13, B23, B33).
Eigen::Matrix<double, 1, 6> v_full(const Eigen::Vector3d& hi,
                                   const Eigen::Vector3d& hj) {
  Eigen::Matrix<double, 1, 6> v;
  v << hi.x() * hj.x(), hi.x() * hj.y() + hi.y() * hj.x(), hi.y() * hj.y(),
      hi.x() * hj.z() + hi.z() * hj.x(), hi.y() * hj.z() + hi.z() * hj.y(),
      hi.z() * hj.z();
  return v;
}

// Same with B22 = B11 and B12 = 0: parameterization (B11, B13, B23, B33).
Eigen::Matrix<double, 1, 4> v_simplified(const Eigen::Vector3d& hi,
                                         const Eigen::Vector3d& hj) {
  Eigen::Matrix<double, 1, 4> v;
  v << hi.x() * hj.x() + hi.y() * hj.y(),
      hi.x() * hj.z() + hi.z() * hj.x(),
      hi.y() * hj.z() + hi.z() * hj.y(), hi.z() * hj.z();
  return v;
}

}  // namespace

Eigen::Matrix<double, 2, 6> constraint_rows_full(const Homography& H) {
  const Eigen::Vector3d h1 = H.H.col(0), h2 = H.H.col(1);
  Eigen::Matrix<double, 2, 6> rows;
  rows.row(0) = v_full(h1, h2);
  rows.row(1) = v_full(h1, h1) - v_full(h2, h2);
  return rows;
}

Eigen::Matrix<double, 2, 4> constraint_rows_simplified(const Homography& H) {
  const Eigen::Vector3d h1 = H.H.col(0), h2 = H.H.col(1);
  Eigen::Matrix<double, 2, 4> rows;
  rows.row(0) = v_simplified(h1, h2);
  rows.row(1) = v_simplified(h1, h1) - v_simplified(h2, h2);
  return rows;
}

FullIntrinsics calibrate_full_linear(const std::vector<Homography>& hs) {
  const int n = static_cast<int>(hs.size());
  if (n < 3)
    throw InsufficientBoards("calibrate_full_linear: need >= 3 boards, got " +
                             std::to_string(n));
  Eigen::MatrixXd a(2 * n, 6);
  for (int i = 0; i < n; ++i)
    a.middleRows<2>(2 * i) = constraint_rows_full(hs[static_cast<size_t>(i)]);

  auto [b, sigma_min] = geometry::smallest_singular_vector(a);
  if (b[0] < 0) b = -b;

  Eigen::Matrix3d bm;
  bm << b[0], b[1], b[3], b[1], b[2], b[4], b[3], b[4], b[5];
  Eigen::LLT<Eigen::Matrix3d> llt(bm);
  if (llt.info() != Eigen::Success)
    throw NotPositiveDefinite(
        "calibrate_full_linear: B not positive definite (degenerate board "
        "set, sigma_min=" +
        std::to_string(sigma_min) + ")");

  // B = L L^T = K^-T K^-1, so K^-1 = L^T and K = L^-T.
  const Eigen::Matrix3d l = llt.matrixL();
  Eigen::Matrix3d k = l.transpose().inverse();
  k /= k(2, 2);

  FullIntrinsics out;
  out.fx = k(0, 0);
  out.skew = k(0, 1);
  out.fy = k(1, 1);
  out.principal_point = {k(0, 2), k(1, 2)};
  if (!(out.fx > 0) || !(out.fy > 0))
    throw NonPhysicalSolution("calibrate_full_linear: negative focal length");
  return out;
}

SimplifiedCalibration calibrate_simplified(const std::vector<Homography>& hs) {
  const int n = static_cast<int>(hs.size());
  if (n < 2)
    throw InsufficientBoards("calibrate_simplified: need >= 2 boards, got " +
                             std::to_string(n));
  Eigen::MatrixXd a(2 * n, 4);
  for (int i = 0; i < n; ++i)
    a.middleRows<2>(2 * i) =
        constraint_rows_simplified(hs[static_cast<size_t>(i)]);

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  Eigen::Vector4d b = svd.matrixV().col(3);
  if (b[0] < 0) b = -b;
  const auto& sv = svd.singularValues();

  // b = kappa (1/f^2, -u_c/f^2, -v_c/f^2, (u_c^2 + v_c^2)/f^2 + 1)
  if (!(b[0] > 0))
    throw NonPhysicalSolution("calibrate_simplified: B11 vanished");
  const double uc = -b[1] / b[0];
  const double vc = -b[2] / b[0];
  const double f2 = b[3] / b[0] - uc * uc - vc * vc;
  if (!(f2 > 0))
    throw NonPhysicalSolution("calibrate_simplified: recovered f^2 <= 0");

  SimplifiedCalibration out;
  out.intrinsics.f = std::sqrt(f2);
  out.intrinsics.principal_point = {uc, vc};
  out.sigma_min = sv[3];
  out.sigma_second = sv[2];
  return out;
}

Pose recover_extrinsics(const Eigen::Matrix3d& K, const Homography& H) {
  const Eigen::Matrix3d kinv = K.inverse();
  Eigen::Vector3d r1 = kinv * H.H.col(0);
  Eigen::Vector3d r2 = kinv * H.H.col(1);
  const double lambda = 2.0 / (r1.norm() + r2.norm());
  r1 *= lambda;
  r2 *= lambda;
  Eigen::Vector3d t = lambda * (kinv * H.H.col(2));
  if (t.z() < 0) {
    r1 = -r1;
    r2 = -r2;
    t = -t;
  }
  if (!(t.z() > 0))
    throw BehindCamera("recover_extrinsics: board at zero depth");

  Eigen::Matrix3d r0;
  r0.col(0) = r1;
  r0.col(1) = r2;
  r0.col(2) = r1.cross(r2);

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(
      r0, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0) {
    Eigen::Matrix3d u = svd.matrixU();
    u.col(2) = -u.col(2);
    r = u * svd.matrixV().transpose();
  }

  Pose pose;
  pose.R = r;
  pose.t = t;
  return pose;
}

Pose recover_extrinsics(const SimplifiedIntrinsics& K, const Homography& H) {
  return recover_extrinsics(K.matrix(), H);
}

Pose recover_extrinsics(const FullIntrinsics& K, const Homography& H) {
  return recover_extrinsics(K.matrix(), H);
}

std::vector<Homography> extract_board_homographies(
    const std::vector<CornerGrid>& boards, const CornerGrid& model_grid) {
  std::vector<Homography> hs;
  hs.reserve(boards.size());
  for (const CornerGrid& board : boards) {
    if (board.rows != model_grid.rows || board.cols != model_grid.cols)
      throw Error("extract_board_homographies: board '" + board.board_id +
                  "' dims do not match the model grid");
    try {
      hs.push_back(
          geometry::estimate_homography(model_grid.points, board.points));
    } catch (const Error& e) {
      throw DegenerateConfiguration("board '" + board.board_id +
                                    "': " + e.what());
    }
  }
  return hs;
}

}  // namespace gpcam::calibration
