#include "gpcam/virtual_camera.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <nlohmann/json.hpp>

namespace gpcam {

CornerGrid make_model_grid(int rows, int cols) {
  CornerGrid g;
  g.rows = rows;
  g.cols = cols;
  g.board_id = "model";
  g.points.resize(static_cast<Eigen::Index>(rows) * cols, 2);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      g.points(static_cast<Eigen::Index>(r) * cols + c, 0) = c;
      g.points(static_cast<Eigen::Index>(r) * cols + c, 1) = r;
    }
  return g;
}

VirtualCameraMap::VirtualCameraMap(gp::GpModel gp_x, gp::GpModel gp_y,
                                   int reference_rows, int reference_cols)
    : gp_x_(std::make_shared<const gp::GpModel>(std::move(gp_x))),
      gp_y_(std::make_shared<const gp::GpModel>(std::move(gp_y))),
      reference_rows_(reference_rows),
      reference_cols_(reference_cols) {}

MappedPoints VirtualCameraMap::map_points(const geometry::Points2& uv) const {
  MappedPoints out;
  out.xy.resize(uv.rows(), 2);
  out.xy.col(0) = gp_x_->predict_mean(uv);
  out.xy.col(1) = gp_y_->predict_mean(uv);
  out.sigma = (gp_x_->predict_variance(uv) + gp_y_->predict_variance(uv))
                  .cwiseSqrt();
  return out;
}

CornerGrid VirtualCameraMap::map_board(const CornerGrid& board) const {
  CornerGrid mapped = board;
  mapped.points = map_points(board.points).xy;
  return mapped;
}

VirtualCameraMap train_virtual_camera(const CornerGrid& reference,
                                      std::optional<Eigen::Vector2i> image_size,
                                      TrainReport* report) {
  if (!reference.valid())
    throw Error("train_virtual_camera: malformed reference grid");
  if (reference.rows < 4 || reference.cols < 4)
    throw InsufficientCorners("train_virtual_camera: need at least 4x4 corners, got " +
                              std::to_string(reference.rows) + "x" +
                              std::to_string(reference.cols));

  // Rank check: collinear corners cannot constrain a 2D warp.
  const Eigen::RowVector2d c = reference.points.colwise().mean();
  const geometry::Points2 centered = reference.points.rowwise() - c;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered);
  if (svd.singularValues()[1] < 1e-9 * std::max(1.0, svd.singularValues()[0]))
    throw DegenerateGrid("train_virtual_camera: reference corners are collinear");

  TrainReport local;
  if (image_size) {
    const double bw = reference.points.col(0).maxCoeff() -
                      reference.points.col(0).minCoeff();
    const double bh = reference.points.col(1).maxCoeff() -
                      reference.points.col(1).minCoeff();
    const double image_area =
        static_cast<double>(image_size->x()) * image_size->y();
    local.small_footprint_warning = bw * bh < 0.5 * image_area;
  }

  const Eigen::Index n = reference.points.rows();
  Eigen::VectorXd tx(n), ty(n);
  for (int r = 0; r < reference.rows; ++r)
    for (int col = 0; col < reference.cols; ++col) {
      const Eigen::Index i =
          static_cast<Eigen::Index>(r) * reference.cols + col;
      tx[i] = col;
      ty[i] = r;
    }

  const gp::Hyperparams init{1.0, 1.0, 1e-6};
  gp::GpModel gx = gp::fit(reference.points, tx, init);
  gp::GpModel gy = gp::fit(reference.points, ty, init);
  local.hyperparams_x = gx.hyperparams();
  local.hyperparams_y = gy.hyperparams();
  if (report) *report = local;

  return VirtualCameraMap(std::move(gx), std::move(gy), reference.rows,
                          reference.cols);
}

nlohmann::json VirtualCameraMap::to_json() const {
  nlohmann::json doc;
  doc["schema"] = "gpcam-virtual-camera/1";
  doc["reference_rows"] = reference_rows_;
  doc["reference_cols"] = reference_cols_;
  doc["gp_x"] = gp_x_->to_json();
  doc["gp_y"] = gp_y_->to_json();
  return doc;
}

VirtualCameraMap VirtualCameraMap::from_json(const nlohmann::json& doc) {
  if (doc.value("schema", "") != "gpcam-virtual-camera/1")
    throw FormatError("VirtualCameraMap: unrecognized schema");
  return VirtualCameraMap(gp::GpModel::from_json(doc.at("gp_x")),
                          gp::GpModel::from_json(doc.at("gp_y")),
                          doc.at("reference_rows").get<int>(),
                          doc.at("reference_cols").get<int>());
}

}  // namespace gpcam
