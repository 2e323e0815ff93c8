#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "gpcam/calibration.hpp"
#include "gpcam/corner_grid.hpp"
#include "gpcam/image.hpp"

namespace gpcam::synth {

struct NoDistortion {};

// Two-term radial model, r normalized by the image half-diagonal.
struct RadialDistortion {
  Eigen::Vector2d center;
  double k1 = 0.0;
  double k2 = 0.0;
  double half_diagonal = 1.0;
};

// Sum of Gaussian displacement bumps; stands in for warps with no
// parametric model (curved mirrors and the like).
struct SmoothWarp {
  struct Bump {
    Eigen::Vector2d center;
    Eigen::Vector2d amplitude;  // pixels
    double width = 1.0;         // pixels
  };
  std::vector<Bump> bumps;
};

using DistortionField = std::variant<NoDistortion, RadialDistortion, SmoothWarp>;

geometry::Points2 distort_points(const DistortionField& field,
                                 const geometry::Points2& p);

// Inverts the warp by Newton iteration; used by the renderer.
Eigen::Vector2d undistort_point(const DistortionField& field,
                                const Eigen::Vector2d& q);

// Throws NonInjectiveWarp when the field folds over the given image
// domain (radial derivative check / Jacobian sampling).
void check_injective(const DistortionField& field, int width, int height);

struct ScenarioSpec {
  calibration::FullIntrinsics intrinsics;
  int width = 3840;
  int height = 2160;
  int board_rows = 9;   // corners
  int board_cols = 15;
  double square_size = 1.0;  // world units
  std::vector<calibration::Pose> poses;
  DistortionField distortion = NoDistortion{};
  double noise_sigma = 0.0;  // pixels
  std::uint64_t seed = 1;
  std::string name = "custom";
};

// The ideal-pinhole parameters of the GP-camera this scenario induces:
// focal distance and principal point of the first board's plane, in
// grid-square units.
struct VirtualGroundTruth {
  double f = 0.0;
  Eigen::Vector2d principal_point = Eigen::Vector2d::Zero();
};

struct Dataset {
  ScenarioSpec spec;
  std::vector<CornerGrid> boards;              // distorted + noisy, pixels
  std::vector<CornerGrid> undistorted_boards;  // exact pinhole projections
  VirtualGroundTruth virtual_truth;
};

// Exact pinhole projection of the board model under one pose.
CornerGrid project_board(const calibration::FullIntrinsics& K,
                         const calibration::Pose& pose, int rows, int cols,
                         double square_size);

Dataset generate_dataset(const ScenarioSpec& spec);

// Rasterizes the distorted checkerboard of one board by inverse mapping
// with supersampled anti-aliasing. White background.
RasterImage render_checkerboard(const ScenarioSpec& spec, int board_index,
                                int supersample = 2);

// Presets mirroring the synthetic rows of the evaluation datasets:
// unity-pinhole, unity-barrel, unity-pincushion, mirror-warp.
ScenarioSpec preset(const std::string& name);
std::vector<std::string> preset_names();

VirtualGroundTruth virtual_ground_truth(const ScenarioSpec& spec);

}  // namespace gpcam::synth
