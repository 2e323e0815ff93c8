#pragma once

#include <optional>
#include <vector>

#include "gpcam/image.hpp"
#include "gpcam/virtual_camera.hpp"

namespace gpcam {

struct UndistortOptions {
  double scale = 40.0;          // output pixels per virtual grid unit
  int fill_window_radius = 1;   // 1 -> 3x3 median window
  std::optional<double> sigma_threshold;  // predictive-sigma mask, off by default
  double margin = 0.1;          // framing margin around the reference lattice
};

struct UndistortResult {
  RasterImage image;
  RasterImage coverage_mask;  // 255 valid, 0 invalid
  long hole_count = 0;        // interior holes left after median fill
  long covered_count = 0;     // directly mapped output pixels
};

// Forward-maps every source pixel centre through the GP-camera, rounds to
// the nearest output pixel, averages collisions and median-fills interior
// holes. Throws EmptyOutput when nothing lands inside the output frame.
UndistortResult undistort_image(const VirtualCameraMap& map,
                                const RasterImage& src,
                                const UndistortOptions& opts = {});

// Intensity-transition chains from horizontal and vertical scans,
// linked by adjacency. Supports the edge-straightness checks.
std::vector<geometry::Points2> sample_edges(const RasterImage& img,
                                            double threshold = 60.0);

}  // namespace gpcam
