#include "gpcam/geometry.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <random>

namespace gpcam::geometry {

namespace {

void fix_sign(Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > 1e-14) {
      if (v[i] < 0) v = -v;
      return;
    }
  }
}

// Similarity moving the centroid to the origin and the mean distance to
// sqrt(2) (Hartley conditioning).
Eigen::Matrix3d hartley_transform(const Points2& pts) {
  const Eigen::RowVector2d c = pts.colwise().mean();
  const double mean_dist = (pts.rowwise() - c).rowwise().norm().mean();
  const double s = mean_dist > 1e-300 ? std::sqrt(2.0) / mean_dist : 1.0;
  Eigen::Matrix3d T = Eigen::Matrix3d::Identity();
  T(0, 0) = s;
  T(1, 1) = s;
  T(0, 2) = -s * c.x();
  T(1, 2) = -s * c.y();
  return T;
}

}  // namespace

Homography Homography::from_matrix(const Eigen::Matrix3d& m) {
  Homography h;
  h.H = m / m.norm();
  // Row-major scan from the end for the last nonzero entry.
  for (int i = 8; i >= 0; --i) {
    const double e = h.H(i / 3, i % 3);
    if (std::abs(e) > 1e-14) {
      if (e < 0) h.H = -h.H;
      break;
    }
  }
  return h;
}

Homography Homography::inverse() const { return from_matrix(H.inverse()); }

std::pair<Eigen::VectorXd, double> smallest_singular_vector(
    const Eigen::MatrixXd& A) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      A, Eigen::ComputeThinU | Eigen::ComputeFullV);
  const Eigen::Index k = A.cols();
  Eigen::VectorXd v = svd.matrixV().col(k - 1);
  v.normalize();
  fix_sign(v);
  // Thin SVD of an m x k matrix with m >= k-1 always yields min(m, k)
  // singular values; a wide-by-one matrix has a free null direction.
  double sigma_min = 0.0;
  if (svd.singularValues().size() >= k) sigma_min = svd.singularValues()[k - 1];
  return {v, sigma_min};
}

Homography estimate_homography(const Points2& src, const Points2& dst) {
  const Eigen::Index m = src.rows();
  if (m < 4 || dst.rows() != m)
    throw DegenerateConfiguration(
        "estimate_homography: need >= 4 correspondences");

  const Eigen::Matrix3d Ts = hartley_transform(src);
  const Eigen::Matrix3d Td = hartley_transform(dst);

  Eigen::MatrixXd A(2 * m, 9);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Vector3d s = Ts * Eigen::Vector3d(src(i, 0), src(i, 1), 1.0);
    const Eigen::Vector3d d = Td * Eigen::Vector3d(dst(i, 0), dst(i, 1), 1.0);
    A.row(2 * i) << -s.x(), -s.y(), -1, 0, 0, 0, d.x() * s.x(), d.x() * s.y(),
        d.x();
    A.row(2 * i + 1) << 0, 0, 0, -s.x(), -s.y(), -1, d.y() * s.x(),
        d.y() * s.y(), d.y();
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double second_smallest = sv[7];
  if (second_smallest < 1e-10 * std::max(1.0, sv[0]))
    throw DegenerateConfiguration(
        "estimate_homography: degenerate correspondences (second-smallest "
        "singular value " +
        std::to_string(second_smallest) + ")");

  Eigen::VectorXd h = svd.matrixV().col(8);
  Eigen::Matrix3d Hn;
  Hn << h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], h[8];
  return Homography::from_matrix(Td.inverse() * Hn * Ts);
}

Points2 apply_homography(const Homography& H, const Points2& p) {
  Points2 out(p.rows(), 2);
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    const Eigen::Vector3d q = H.H * Eigen::Vector3d(p(i, 0), p(i, 1), 1.0);
    if (std::abs(q.z()) <= 1e-12)
      throw PointAtInfinity("apply_homography: point maps to infinity");
    out(i, 0) = q.x() / q.z();
    out(i, 1) = q.y() / q.z();
  }
  return out;
}

std::pair<Line2D, Eigen::VectorXd> fit_line_2d(const Points2& points) {
  const Eigen::Index m = points.rows();
  if (m < 2) throw DegeneratePoints("fit_line_2d: need >= 2 points");
  const Eigen::RowVector2d c = points.colwise().mean();
  const Points2 centered = points.rowwise() - c;
  if (centered.rowwise().norm().maxCoeff() <
      1e-15 * std::max(1.0, c.norm()))
    throw DegeneratePoints("fit_line_2d: all points coincide");

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeFullV);
  Line2D line;
  line.direction = svd.matrixV().col(0);
  line.point = c.transpose();
  const Eigen::Vector2d normal(-line.direction.y(), line.direction.x());
  Eigen::VectorXd dist = (centered * normal).cwiseAbs();
  return {line, dist};
}

Line3D fit_line_3d(const Points3& points) {
  const Eigen::RowVector3d c = points.colwise().mean();
  const Points3 centered = points.rowwise() - c;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeFullV);
  Line3D line;
  line.direction = svd.matrixV().col(0);
  line.point = c.transpose();
  for (int i = 0; i < 3; ++i) {
    if (std::abs(line.direction[i]) > 1e-14) {
      if (line.direction[i] < 0) line.direction = -line.direction;
      break;
    }
  }
  return line;
}

RansacLineResult fit_line_3d_ransac(const Points3& points,
                                    double inlier_threshold, int iterations,
                                    std::uint64_t seed) {
  const Eigen::Index m = points.rows();
  if (m < 2) throw NoConsensus("fit_line_3d_ransac: need >= 2 points");

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Eigen::Index> pick(0, m - 1);

  int best_count = 0;
  std::vector<bool> best_mask;
  for (int it = 0; it < iterations; ++it) {
    const Eigen::Index a = pick(rng);
    const Eigen::Index b = pick(rng);
    if (a == b) continue;
    Eigen::Vector3d d = points.row(b) - points.row(a);
    const double len = d.norm();
    if (len < 1e-14) continue;
    d /= len;
    const Eigen::Vector3d p0 = points.row(a);

    int count = 0;
    std::vector<bool> mask(static_cast<size_t>(m), false);
    for (Eigen::Index i = 0; i < m; ++i) {
      const Eigen::Vector3d r = points.row(i).transpose() - p0;
      if ((r - r.dot(d) * d).norm() < inlier_threshold) {
        mask[static_cast<size_t>(i)] = true;
        ++count;
      }
    }
    if (count > best_count) {
      best_count = count;
      best_mask = std::move(mask);
    }
  }
  if (best_count < 2)
    throw NoConsensus("fit_line_3d_ransac: no consensus set of size >= 2");

  Points3 inliers(best_count, 3);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < m; ++i)
    if (best_mask[static_cast<size_t>(i)]) inliers.row(k++) = points.row(i);

  RansacLineResult res;
  res.line = fit_line_3d(inliers);
  res.inlier_mask = std::move(best_mask);
  res.inlier_count = best_count;
  return res;
}

}  // namespace gpcam::geometry
