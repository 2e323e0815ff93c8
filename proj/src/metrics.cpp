#include "gpcam/metrics.hpp"

#include <cmath>

namespace gpcam::metrics {

namespace {

double scaled_line_rms(const geometry::Points2& pts) {
  auto [line, dist] = geometry::fit_line_2d(pts);
  const double rms = std::sqrt(dist.squaredNorm() / dist.size());
  const double span = (pts.row(pts.rows() - 1) - pts.row(0)).norm();
  if (span < 1e-300)
    throw DegeneratePoints("collinearity_error: zero-length row/column");
  return rms / span;
}

}  // namespace

CollinearityReport collinearity_error(const CornerGrid& board) {
  if (board.rows < 2 || board.cols < 2)
    throw Error("collinearity_error: need at least a 2x2 grid");

  CollinearityReport report;
  for (int r = 0; r < board.rows; ++r) {
    geometry::Points2 pts(board.cols, 2);
    for (int c = 0; c < board.cols; ++c)
      pts.row(c) = board.at(r, c).transpose();
    report.per_row.push_back(scaled_line_rms(pts));
  }
  for (int c = 0; c < board.cols; ++c) {
    geometry::Points2 pts(board.rows, 2);
    for (int r = 0; r < board.rows; ++r)
      pts.row(r) = board.at(r, c).transpose();
    report.per_col.push_back(scaled_line_rms(pts));
  }

  double sum = 0.0;
  for (double v : report.per_row) sum += v;
  for (double v : report.per_col) sum += v;
  report.board_average = sum / (board.rows + board.cols);
  return report;
}

DatasetCollinearity collinearity_error(const std::vector<CornerGrid>& boards) {
  DatasetCollinearity out;
  double sum = 0.0;
  for (const CornerGrid& b : boards) {
    out.boards.push_back(collinearity_error(b));
    sum += out.boards.back().board_average;
  }
  out.dataset_average = boards.empty() ? 0.0 : sum / boards.size();
  return out;
}

double reprojection_error(const calibration::SimplifiedIntrinsics& K,
                          const std::vector<calibration::Pose>& poses,
                          const CornerGrid& model_grid,
                          const std::vector<CornerGrid>& observed,
                          double edge_length) {
  if (poses.size() != observed.size())
    throw Error("reprojection_error: poses/observations count mismatch");
  const Eigen::Matrix3d k = K.matrix();

  double sq_sum = 0.0;
  Eigen::Index count = 0;
  for (size_t b = 0; b < poses.size(); ++b) {
    const CornerGrid& obs = observed[b];
    if (obs.points.rows() != model_grid.points.rows())
      throw Error("reprojection_error: board '" + obs.board_id +
                  "' corner count mismatch");
    const calibration::Pose& pose = poses[b];
    for (Eigen::Index i = 0; i < model_grid.points.rows(); ++i) {
      const Eigen::Vector3d pw(model_grid.points(i, 0),
                               model_grid.points(i, 1), 0.0);
      const Eigen::Vector3d pc = pose.R * pw + pose.t;
      const Eigen::Vector3d q = k * pc;
      const Eigen::Vector2d proj(q.x() / q.z(), q.y() / q.z());
      sq_sum += (proj - obs.points.row(i).transpose()).squaredNorm();
      ++count;
    }
  }
  return std::sqrt(sq_sum / count) / edge_length;
}

geometry::Points2 make_pixel_grid(int rows, int cols, int n) {
  geometry::Points2 grid(static_cast<Eigen::Index>(n) * n, 2);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      grid(static_cast<Eigen::Index>(i) * n + j, 0) =
          (cols - 1) * static_cast<double>(j) / (n - 1);
      grid(static_cast<Eigen::Index>(i) * n + j, 1) =
          (rows - 1) * static_cast<double>(i) / (n - 1);
    }
  return grid;
}

RayBundleReport pinhole_bundle_check(
    const calibration::SimplifiedIntrinsics& K,
    const std::vector<calibration::Pose>& poses,
    const std::vector<geometry::Homography>& board_homographies,
    const geometry::Points2& pixel_grid, double ransac_threshold,
    int ransac_iterations, std::uint64_t seed) {
  (void)K;  // the frame the poses live in; kept for interface symmetry
  if (poses.size() < 2)
    throw Error("pinhole_bundle_check: need >= 2 boards");
  if (poses.size() != board_homographies.size())
    throw Error("pinhole_bundle_check: poses/homographies count mismatch");

  std::vector<geometry::Homography> inv;
  inv.reserve(board_homographies.size());
  for (const auto& h : board_homographies) inv.push_back(h.inverse());

  RayBundleReport report;
  double sq_sum = 0.0;
  int valid = 0;
  for (Eigen::Index p = 0; p < pixel_grid.rows(); ++p) {
    geometry::Points3 pts(static_cast<Eigen::Index>(poses.size()), 3);
    for (size_t b = 0; b < poses.size(); ++b) {
      const geometry::Points2 board_pt =
          geometry::apply_homography(inv[b], pixel_grid.row(p));
      const Eigen::Vector3d pw(board_pt(0, 0), board_pt(0, 1), 0.0);
      pts.row(static_cast<Eigen::Index>(b)) =
          (poses[b].R * pw + poses[b].t).transpose();
    }

    PixelRay ray;
    ray.pixel = pixel_grid.row(p).transpose();
    try {
      const geometry::RansacLineResult fit = geometry::fit_line_3d_ransac(
          pts, ransac_threshold, ransac_iterations, seed);
      ray.line = fit.line;
      ray.inlier_count = fit.inlier_count;
      ray.origin_distance = fit.line.distance_to(Eigen::Vector3d::Zero());
      ray.valid = true;
      sq_sum += ray.origin_distance * ray.origin_distance;
      report.max_origin_distance =
          std::max(report.max_origin_distance, ray.origin_distance);
      ++valid;
    } catch (const NoConsensus&) {
      ray.valid = false;
    }
    report.rays.push_back(std::move(ray));
  }
  if (valid == 0)
    throw NoConsensus("pinhole_bundle_check: no pixel produced a ray");
  report.rms_origin_distance = std::sqrt(sq_sum / valid);
  return report;
}

}  // namespace gpcam::metrics
