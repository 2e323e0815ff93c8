#pragma once

#include <Eigen/Dense>
#include <string>

#include "gpcam/errors.hpp"
#include "gpcam/geometry.hpp"

namespace gpcam {

// Ordered rows x cols lattice of 2D corner observations for one board,
// row-major. Units are pixels or virtual-plane grid squares depending on
// the pipeline stage.
struct CornerGrid {
  int rows = 0;
  int cols = 0;
  geometry::Points2 points;  // rows*cols x 2
  std::string board_id;

  bool valid() const {
    return rows > 0 && cols > 0 &&
           points.rows() == static_cast<Eigen::Index>(rows) * cols &&
           points.allFinite();
  }
  Eigen::Vector2d at(int r, int c) const {
    return points.row(static_cast<Eigen::Index>(r) * cols + c).transpose();
  }
};

// Planar Z=0 board model with unit grid squares: corner (r, c) sits at
// (c, r). Shared origin/axis convention for the virtual image plane.
CornerGrid make_model_grid(int rows, int cols);

}  // namespace gpcam
