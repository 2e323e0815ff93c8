#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "gpcam/calibration.hpp"
#include "gpcam/corner_grid.hpp"

using namespace gpcam;
using namespace gpcam::calibration;

namespace {

Eigen::Matrix3d rotation(double ax, double ay, double az) {
  return (Eigen::AngleAxisd(az, Eigen::Vector3d::UnitZ()) *
          Eigen::AngleAxisd(ay, Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(ax, Eigen::Vector3d::UnitX()))
      .toRotationMatrix();
}

geometry::Homography homography_from_pose(const Eigen::Matrix3d& K,
                                          const Pose& pose) {
  Eigen::Matrix3d h;
  h.col(0) = pose.R.col(0);
  h.col(1) = pose.R.col(1);
  h.col(2) = pose.t;
  return geometry::Homography::from_matrix(K * h);
}

std::vector<Pose> varied_poses(int n, std::uint64_t seed = 3) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ang(-0.5, 0.5);
  std::uniform_real_distribution<double> off(-2, 2);
  std::vector<Pose> poses;
  for (int i = 0; i < n; ++i) {
    Pose p;
    p.R = rotation(ang(rng), ang(rng), ang(rng));
    p.t = Eigen::Vector3d(off(rng), off(rng), 8.0 + off(rng));
    poses.push_back(p);
  }
  return poses;
}

}  // namespace

TEST_CASE("constraint rows vanish on a true homography") {
  SimplifiedIntrinsics k;
  k.f = 900;
  k.principal_point = {640, 360};
  const auto poses = varied_poses(1, 10);
  const auto h = homography_from_pose(k.matrix(), poses[0]);

  // b for the true K, simplified parameterization.
  const double f2 = k.f * k.f;
  Eigen::Vector4d b;
  b << 1 / f2, -k.principal_point.x() / f2, -k.principal_point.y() / f2,
      k.principal_point.squaredNorm() / f2 + 1;
  const Eigen::Vector2d res = constraint_rows_simplified(h) * b;
  CHECK(res.cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("simplified calibration recovers exact intrinsics") {
  SimplifiedIntrinsics truth;
  truth.f = 1200;
  truth.principal_point = {1900, 1050};
  const auto poses = varied_poses(5, 21);
  std::vector<geometry::Homography> hs;
  for (const auto& p : poses) hs.push_back(homography_from_pose(truth.matrix(), p));

  const SimplifiedCalibration cal = calibrate_simplified(hs);
  CHECK(cal.intrinsics.f == doctest::Approx(truth.f).epsilon(1e-8));
  CHECK(cal.intrinsics.principal_point.x() ==
        doctest::Approx(1900).epsilon(1e-8));
  CHECK(cal.intrinsics.principal_point.y() ==
        doctest::Approx(1050).epsilon(1e-8));
  CHECK(cal.sigma_min < 1e-8 * cal.sigma_second);
}

TEST_CASE("simplified calibration works from exactly two boards") {
  SimplifiedIntrinsics truth;
  truth.f = 7.3;
  truth.principal_point = {7, 4};
  const auto poses = varied_poses(2, 33);
  std::vector<geometry::Homography> hs;
  for (const auto& p : poses) hs.push_back(homography_from_pose(truth.matrix(), p));
  const SimplifiedCalibration cal = calibrate_simplified(hs);
  CHECK(cal.intrinsics.f == doctest::Approx(7.3).epsilon(1e-8));
  CHECK(cal.intrinsics.principal_point.x() == doctest::Approx(7).epsilon(1e-7));
  CHECK(cal.intrinsics.principal_point.y() == doctest::Approx(4).epsilon(1e-7));
}

TEST_CASE("simplified calibration needs at least two boards") {
  SimplifiedIntrinsics truth;
  truth.f = 1000;
  const auto poses = varied_poses(1, 5);
  std::vector<geometry::Homography> hs{
      homography_from_pose(truth.matrix(), poses[0])};
  CHECK_THROWS_AS(calibrate_simplified(hs), InsufficientBoards);
  CHECK_THROWS_AS(calibrate_simplified({}), InsufficientBoards);
}

TEST_CASE("identical board orientations leave the system rank deficient") {
  SimplifiedIntrinsics truth;
  truth.f = 1000;
  truth.principal_point = {500, 300};
  Pose p;
  p.R = rotation(0.3, -0.2, 0.1);
  p.t = {0.5, -0.5, 9};
  Pose p2 = p;
  p2.t = {1.5, 0.5, 11};  // same R, only translated
  const std::vector<geometry::Homography> hs{
      homography_from_pose(truth.matrix(), p),
      homography_from_pose(truth.matrix(), p2)};
  const SimplifiedCalibration cal = calibrate_simplified(hs);
  // Near-coincident smallest singular values flag the degeneracy.
  CHECK(cal.sigma_second < 1e-6);
}

TEST_CASE("full linear calibration recovers K with skew") {
  FullIntrinsics truth;
  truth.fx = 1480;
  truth.fy = 1520;
  truth.skew = 2.5;
  truth.principal_point = {1915, 1088};
  const auto poses = varied_poses(6, 44);
  std::vector<geometry::Homography> hs;
  for (const auto& p : poses) hs.push_back(homography_from_pose(truth.matrix(), p));

  const FullIntrinsics cal = calibrate_full_linear(hs);
  CHECK(cal.fx == doctest::Approx(truth.fx).epsilon(1e-7));
  CHECK(cal.fy == doctest::Approx(truth.fy).epsilon(1e-7));
  CHECK(cal.skew == doctest::Approx(truth.skew).epsilon(1e-5));
  CHECK(cal.principal_point.x() == doctest::Approx(1915).epsilon(1e-7));
  CHECK(cal.principal_point.y() == doctest::Approx(1088).epsilon(1e-7));
}

TEST_CASE("full linear calibration needs at least three boards") {
  FullIntrinsics truth;
  truth.fx = truth.fy = 1000;
  const auto poses = varied_poses(2, 55);
  std::vector<geometry::Homography> hs;
  for (const auto& p : poses) hs.push_back(homography_from_pose(truth.matrix(), p));
  CHECK_THROWS_AS(calibrate_full_linear(hs), InsufficientBoards);
}

TEST_CASE("full and simplified agree on square-pixel data") {
  SimplifiedIntrinsics truth;
  truth.f = 1500;
  truth.principal_point = {1920, 1080};
  const auto poses = varied_poses(8, 66);
  std::vector<geometry::Homography> hs;
  for (const auto& p : poses) hs.push_back(homography_from_pose(truth.matrix(), p));

  const SimplifiedCalibration simple = calibrate_simplified(hs);
  const FullIntrinsics full = calibrate_full_linear(hs);
  CHECK(std::abs(full.fx - simple.intrinsics.f) < 1e-4);
  CHECK(std::abs(full.fy - simple.intrinsics.f) < 1e-4);
  CHECK(std::abs(full.skew) < 1e-4);
  CHECK((full.principal_point - simple.intrinsics.principal_point).norm() <
        1e-4);
}

TEST_CASE("extrinsics recovery inverts homography synthesis") {
  SimplifiedIntrinsics k;
  k.f = 1100;
  k.principal_point = {700, 500};
  const auto poses = varied_poses(6, 77);
  for (const auto& truth : poses) {
    const auto h = homography_from_pose(k.matrix(), truth);
    const Pose rec = recover_extrinsics(k, h);
    CHECK((rec.R - truth.R).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((rec.t - truth.t).cwiseAbs().maxCoeff() < 1e-9);
    // Proper rotation.
    CHECK((rec.R * rec.R.transpose() - Eigen::Matrix3d::Identity())
              .cwiseAbs()
              .maxCoeff() < 1e-12);
    CHECK(rec.R.determinant() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rec.t.z() > 0);
  }
}

TEST_CASE("extrinsics recovery fixes the homography sign") {
  SimplifiedIntrinsics k;
  k.f = 1000;
  k.principal_point = {600, 400};
  Pose truth;
  truth.R = rotation(0.2, 0.1, -0.3);
  truth.t = {1, -1, 10};
  auto h = homography_from_pose(k.matrix(), truth);
  h.H = -h.H;  // flip the projective sign
  const Pose rec = recover_extrinsics(k, geometry::Homography::from_matrix(h.H));
  CHECK((rec.R - truth.R).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((rec.t - truth.t).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("extract_board_homographies round trips grids") {
  const CornerGrid model = make_model_grid(5, 7);
  SimplifiedIntrinsics k;
  k.f = 9;
  k.principal_point = {7, 4};
  const auto poses = varied_poses(3, 88);
  std::vector<CornerGrid> boards;
  std::vector<geometry::Homography> truth_hs;
  for (size_t i = 0; i < poses.size(); ++i) {
    const auto h = homography_from_pose(k.matrix(), poses[i]);
    truth_hs.push_back(h);
    CornerGrid b = model;
    b.board_id = "board_" + std::to_string(i);
    b.points = geometry::apply_homography(h, model.points);
    boards.push_back(b);
  }
  const auto hs = extract_board_homographies(boards, model);
  REQUIRE(hs.size() == 3);
  for (size_t i = 0; i < 3; ++i)
    CHECK((hs[i].H - truth_hs[i].H).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("degenerate board points name the offending board") {
  const CornerGrid model = make_model_grid(4, 4);
  CornerGrid bad = model;
  bad.board_id = "board_7";
  for (int i = 0; i < bad.points.rows(); ++i)
    bad.points.row(i) << 3.0, 5.0;  // all corners coincide
  try {
    extract_board_homographies({bad}, model);
    FAIL("expected DegenerateConfiguration");
  } catch (const DegenerateConfiguration& e) {
    CHECK(std::string(e.what()).find("board_7") != std::string::npos);
  }
}

TEST_CASE("intrinsic matrices are laid out as expected") {
  SimplifiedIntrinsics s;
  s.f = 2;
  s.principal_point = {3, 4};
  Eigen::Matrix3d expect;
  expect << 2, 0, 3, 0, 2, 4, 0, 0, 1;
  CHECK((s.matrix() - expect).cwiseAbs().maxCoeff() == 0.0);

  FullIntrinsics fu;
  fu.fx = 2;
  fu.fy = 5;
  fu.skew = 0.5;
  fu.principal_point = {3, 4};
  Eigen::Matrix3d expect_full;
  expect_full << 2, 0.5, 3, 0, 5, 4, 0, 0, 1;
  CHECK((fu.matrix() - expect_full).cwiseAbs().maxCoeff() == 0.0);
}
