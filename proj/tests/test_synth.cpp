#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "gpcam/synth.hpp"

using namespace gpcam;
using namespace gpcam::synth;

TEST_CASE("radial distortion fixes its center and pulls barrel inward") {
  RadialDistortion r;
  r.center = {100, 100};
  r.k1 = -0.2;
  r.k2 = 0.02;
  r.half_diagonal = 100.0;
  geometry::Points2 p(2, 2);
  p << 100, 100, 180, 100;
  const geometry::Points2 q = distort_points(DistortionField{r}, p);
  CHECK((q.row(0) - p.row(0)).norm() < 1e-14);  // center is a fixed point
  // Barrel: points move toward the center.
  CHECK(q(1, 0) < 180.0);
  CHECK(q(1, 0) > 100.0);
  CHECK(q(1, 1) == doctest::Approx(100.0));
  // Closed form: d=80, rho = 0.8, factor = 1 - 0.2*0.64 + 0.02*0.4096
  const double factor = 1.0 - 0.2 * 0.64 + 0.02 * 0.64 * 0.64;
  CHECK(q(1, 0) == doctest::Approx(100.0 + 80.0 * factor).epsilon(1e-12));
}

TEST_CASE("pincushion pushes points outward") {
  RadialDistortion r;
  r.center = {0, 0};
  r.k1 = 0.08;
  r.k2 = 0.01;
  r.half_diagonal = 10.0;
  geometry::Points2 p(1, 2);
  p << 6, 8;  // normalized radius 1
  const geometry::Points2 q = distort_points(DistortionField{r}, p);
  CHECK(q.row(0).norm() == doctest::Approx(10.0 * 1.09).epsilon(1e-12));
}

TEST_CASE("undistort_point inverts the radial model") {
  RadialDistortion r;
  r.center = {1920, 1080};
  r.k1 = -0.2;
  r.k2 = 0.02;
  r.half_diagonal = std::hypot(3840.0, 2160.0) / 2;
  const DistortionField field{r};
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ux(100, 3700), uy(100, 2000);
  for (int i = 0; i < 50; ++i) {
    geometry::Points2 p(1, 2);
    p << ux(rng), uy(rng);
    const geometry::Points2 q = distort_points(field, p);
    const Eigen::Vector2d back = undistort_point(field, q.row(0).transpose());
    CHECK((back - p.row(0).transpose()).norm() < 1e-9);
  }
}

TEST_CASE("undistort_point inverts a smooth warp") {
  SmoothWarp w;
  w.bumps.push_back({{500, 400}, {30, -15}, 300});
  w.bumps.push_back({{1200, 800}, {-20, 25}, 400});
  const DistortionField field{w};
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ux(0, 1600), uy(0, 1200);
  for (int i = 0; i < 50; ++i) {
    geometry::Points2 p(1, 2);
    p << ux(rng), uy(rng);
    const geometry::Points2 q = distort_points(field, p);
    const Eigen::Vector2d back = undistort_point(field, q.row(0).transpose());
    CHECK((back - p.row(0).transpose()).norm() < 1e-9);
  }
}

TEST_CASE("check_injective accepts the presets and rejects folds") {
  for (const std::string& name : preset_names()) {
    const ScenarioSpec spec = preset(name);
    CHECK_NOTHROW(check_injective(spec.distortion, spec.width, spec.height));
  }
  RadialDistortion r;
  r.center = {50, 50};
  r.k1 = -0.9;  // derivative crosses zero well inside the corner radius
  r.k2 = 0.0;
  r.half_diagonal = 50.0;
  CHECK_THROWS_AS(check_injective(DistortionField{r}, 100, 100),
                  NonInjectiveWarp);

  SmoothWarp w;
  w.bumps.push_back({{50, 50}, {9, 0}, 5.0});  // steep bump folds locally
  CHECK_THROWS_AS(check_injective(DistortionField{w}, 100, 100),
                  NonInjectiveWarp);
}

TEST_CASE("project_board matches a hand-computed pinhole projection") {
  calibration::FullIntrinsics k;
  k.fx = k.fy = 100;
  k.principal_point = {50, 40};
  calibration::Pose pose;
  pose.t = {0, 0, 10};
  const CornerGrid g = project_board(k, pose, 2, 3, 1.0);
  // Corner (r=1, c=2) sits at world (2, 1, 0) -> camera (2, 1, 10)
  // -> pixel (50 + 100*0.2, 40 + 100*0.1) = (70, 50).
  CHECK(g.points(5, 0) == doctest::Approx(70.0));
  CHECK(g.points(5, 1) == doctest::Approx(50.0));
  CHECK(g.rows == 2);
  CHECK(g.cols == 3);
}

TEST_CASE("project_board rejects boards behind the camera") {
  calibration::FullIntrinsics k;
  calibration::Pose pose;
  pose.t = {0, 0, -5};
  CHECK_THROWS_AS(project_board(k, pose, 4, 4, 1.0), BehindCamera);
}

TEST_CASE("virtual ground truth of a fronto-parallel reference") {
  ScenarioSpec spec = preset("unity-pinhole");
  const VirtualGroundTruth vt = virtual_ground_truth(spec);
  CHECK(vt.f == doctest::Approx(7.2).epsilon(1e-12));
  CHECK(vt.principal_point.x() == doctest::Approx(7.0).epsilon(1e-12));
  CHECK(vt.principal_point.y() == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("virtual ground truth is distortion independent") {
  const VirtualGroundTruth a = virtual_ground_truth(preset("unity-pinhole"));
  const VirtualGroundTruth b = virtual_ground_truth(preset("unity-barrel"));
  CHECK(a.f == doctest::Approx(b.f));
  CHECK((a.principal_point - b.principal_point).norm() < 1e-12);
}

TEST_CASE("presets deliver 30 boards inside the image") {
  for (const std::string& name : preset_names()) {
    const ScenarioSpec spec = preset(name);
    CHECK(spec.poses.size() == 30);
    const Dataset ds = generate_dataset(spec);
    CHECK(ds.boards.size() == 30);
    CHECK(ds.undistorted_boards.size() == 30);
    for (const CornerGrid& b : ds.boards) {
      CHECK(b.points.rows() == 9 * 15);
      CHECK(b.points.col(0).minCoeff() >= 0.0);
      CHECK(b.points.col(0).maxCoeff() < 3840.0);
      CHECK(b.points.col(1).minCoeff() >= 0.0);
      CHECK(b.points.col(1).maxCoeff() < 2160.0);
    }
  }
}

TEST_CASE("non-reference boards stay inside the reference footprint") {
  const ScenarioSpec spec = preset("unity-barrel");
  const Dataset ds = generate_dataset(spec);
  const auto& ref = ds.boards[0].points;
  const double x_lo = ref.col(0).minCoeff(), x_hi = ref.col(0).maxCoeff();
  const double y_lo = ref.col(1).minCoeff(), y_hi = ref.col(1).maxCoeff();
  for (size_t i = 1; i < ds.boards.size(); ++i) {
    const auto& p = ds.boards[i].points;
    CHECK(p.col(0).minCoeff() >= x_lo);
    CHECK(p.col(0).maxCoeff() <= x_hi);
    CHECK(p.col(1).minCoeff() >= y_lo);
    CHECK(p.col(1).maxCoeff() <= y_hi);
  }
}

TEST_CASE("generation is deterministic and noise is seeded") {
  ScenarioSpec spec = preset("unity-pinhole");
  spec.noise_sigma = 0.1;
  spec.seed = 99;
  const Dataset a = generate_dataset(spec);
  const Dataset b = generate_dataset(spec);
  CHECK((a.boards[5].points - b.boards[5].points).cwiseAbs().maxCoeff() ==
        0.0);
  spec.seed = 100;
  const Dataset c = generate_dataset(spec);
  CHECK((a.boards[5].points - c.boards[5].points).cwiseAbs().maxCoeff() >
        1e-6);
}

TEST_CASE("zero-noise observations equal distorted exact projections") {
  const ScenarioSpec spec = preset("unity-barrel");
  const Dataset ds = generate_dataset(spec);
  for (size_t i = 0; i < ds.boards.size(); ++i) {
    const geometry::Points2 expect =
        distort_points(spec.distortion, ds.undistorted_boards[i].points);
    CHECK((ds.boards[i].points - expect).cwiseAbs().maxCoeff() == 0.0);
  }
  // Pinhole preset: observed equals exact.
  const Dataset pin = generate_dataset(preset("unity-pinhole"));
  CHECK((pin.boards[3].points - pin.undistorted_boards[3].points)
            .cwiseAbs()
            .maxCoeff() == 0.0);
}

TEST_CASE("rendered checkerboard has both tones and a white border") {
  ScenarioSpec spec = preset("unity-barrel");
  spec.width = 384;   // render small for speed
  spec.height = 216;
  spec.intrinsics.fx = spec.intrinsics.fy = 150.0;
  spec.intrinsics.principal_point = {192, 108};
  if (auto* r = std::get_if<RadialDistortion>(&spec.distortion)) {
    r->center = {192, 108};
    r->half_diagonal = std::hypot(384.0, 216.0) / 2;
  }
  const RasterImage img = render_checkerboard(spec, 0, 1);
  CHECK(img.width == 384);
  CHECK(img.height == 216);
  long dark = 0, light = 0, white = 0;
  for (std::uint8_t v : img.data) {
    if (v < 80) ++dark;
    else if (v < 250) ++light;
    else ++white;
  }
  CHECK(dark > 1000);
  CHECK(light > 1000);
  CHECK(white > 100);  // background beyond the board
  CHECK(img.at(0, 0) == 255);
}

TEST_CASE("unknown preset names are rejected") {
  CHECK_THROWS_AS(preset("no-such-preset"), Error);
}
