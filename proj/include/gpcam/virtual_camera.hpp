#pragma once

#include <memory>
#include <nlohmann/json_fwd.hpp>
#include <optional>

#include "gpcam/corner_grid.hpp"
#include "gpcam/gp.hpp"

namespace gpcam {

struct MappedPoints {
  geometry::Points2 xy;    // virtual-plane units (grid-square edges)
  Eigen::VectorXd sigma;   // combined predictive std deviations, >= 0
};

// Pair of GPs mapping image (u,v) to virtual-plane (x,y). Immutable;
// concurrent mapping calls are safe.
class VirtualCameraMap {
public:
  VirtualCameraMap(gp::GpModel gp_x, gp::GpModel gp_y, int reference_rows,
                   int reference_cols);

  MappedPoints map_points(const geometry::Points2& uv) const;
  CornerGrid map_board(const CornerGrid& board) const;

  const gp::GpModel& gp_x() const { return *gp_x_; }
  const gp::GpModel& gp_y() const { return *gp_y_; }
  int reference_rows() const { return reference_rows_; }
  int reference_cols() const { return reference_cols_; }

  nlohmann::json to_json() const;
  static VirtualCameraMap from_json(const nlohmann::json& doc);

private:
  std::shared_ptr<const gp::GpModel> gp_x_;
  std::shared_ptr<const gp::GpModel> gp_y_;
  int reference_rows_;
  int reference_cols_;
};

struct TrainReport {
  bool small_footprint_warning = false;  // corner bbox < 50% of image area
  gp::Hyperparams hyperparams_x;
  gp::Hyperparams hyperparams_y;
};

// Trains the GP-camera on one reference board. Target lattice
// coordinates are integers 0..cols-1 x 0..rows-1 in grid-square units,
// origin at the first detected corner.
// Throws InsufficientCorners below 4x4 and DegenerateGrid when the
// corners are collinear. image_size (w, h), when given, only drives the
// small-footprint warning in the report.
VirtualCameraMap train_virtual_camera(
    const CornerGrid& reference,
    std::optional<Eigen::Vector2i> image_size = std::nullopt,
    TrainReport* report = nullptr);

}  // namespace gpcam
