#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gpcam/metrics.hpp"
#include "gpcam/undistort.hpp"

using namespace gpcam;

namespace {

// Reference lattice with uniform pixel spacing; the GP-camera map is
// then close to a similarity transform and easy to reason about.
CornerGrid uniform_grid(int rows, int cols, double spacing,
                        const Eigen::Vector2d& origin) {
  CornerGrid g;
  g.rows = rows;
  g.cols = cols;
  g.board_id = "reference";
  g.points.resize(static_cast<Eigen::Index>(rows) * cols, 2);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      g.points.row(static_cast<Eigen::Index>(r) * cols + c)
          << origin.x() + spacing * c, origin.y() + spacing * r;
  return g;
}

RasterImage checker_image(int w, int h, int period) {
  RasterImage img = RasterImage::create(w, h, 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      img.at(x, y) = ((x / period + y / period) % 2 == 0) ? 30 : 220;
  return img;
}

}  // namespace

TEST_CASE("undistorting through a uniform map reproduces the pattern") {
  const double spacing = 25.0;
  const CornerGrid grid = uniform_grid(5, 7, spacing, {20, 15});
  const VirtualCameraMap map = train_virtual_camera(grid);

  const RasterImage src = checker_image(215, 165, 25);
  UndistortOptions opts;
  opts.scale = spacing;  // one output pixel per source pixel
  const UndistortResult res = undistort_image(map, src, opts);

  // Frame: lattice extent (6, 4) units plus 10% margin at 25 px/unit.
  CHECK(res.image.width == static_cast<int>(std::ceil(6 * 1.2 * 25)) + 1);
  CHECK(res.image.height == static_cast<int>(std::ceil(4 * 1.2 * 25)) + 1);
  CHECK(res.covered_count > 0);

  // Deep inside the footprint the checker tones survive.
  long dark = 0, light = 0;
  for (int y = 40; y < res.image.height - 40; ++y)
    for (int x = 40; x < res.image.width - 40; ++x) {
      if (res.coverage_mask.at(x, y) != 255) continue;
      const std::uint8_t v = res.image.at(x, y);
      if (v < 110) ++dark;
      else if (v > 140) ++light;
    }
  CHECK(dark > 200);
  CHECK(light > 200);
  CHECK(res.hole_count < res.covered_count / 100 + 1);
}

TEST_CASE("coverage mask marks exactly the written or filled pixels") {
  const CornerGrid grid = uniform_grid(5, 5, 20.0, {10, 10});
  const VirtualCameraMap map = train_virtual_camera(grid);
  const RasterImage src = checker_image(100, 100, 20);
  const UndistortResult res = undistort_image(map, src);

  long mask_on = 0;
  for (std::uint8_t v : res.coverage_mask.data) {
    CHECK((v == 0 || v == 255));
    if (v == 255) ++mask_on;
  }
  CHECK(mask_on >= res.covered_count);
}

TEST_CASE("undistort output is deterministic") {
  const CornerGrid grid = uniform_grid(4, 6, 15.0, {5, 5});
  const VirtualCameraMap map = train_virtual_camera(grid);
  const RasterImage src = checker_image(90, 60, 15);
  const UndistortResult a = undistort_image(map, src);
  const UndistortResult b = undistort_image(map, src);
  CHECK(a.image.data == b.image.data);
  CHECK(a.coverage_mask.data == b.coverage_mask.data);
  CHECK(a.hole_count == b.hole_count);
}

TEST_CASE("three-channel input keeps its channels") {
  const CornerGrid grid = uniform_grid(4, 4, 20.0, {8, 8});
  const VirtualCameraMap map = train_virtual_camera(grid);
  RasterImage src = RasterImage::create(80, 80, 3);
  for (int y = 0; y < 80; ++y)
    for (int x = 0; x < 80; ++x) {
      src.at(x, y, 0) = 200;
      src.at(x, y, 1) = 100;
      src.at(x, y, 2) = 50;
    }
  const UndistortResult res = undistort_image(map, src);
  CHECK(res.image.channels == 3);
  bool found = false;
  for (int y = 0; y < res.image.height && !found; ++y)
    for (int x = 0; x < res.image.width && !found; ++x)
      if (res.coverage_mask.at(x, y) == 255) {
        CHECK(std::abs(res.image.at(x, y, 0) - 200) <= 1);
        CHECK(std::abs(res.image.at(x, y, 1) - 100) <= 1);
        CHECK(std::abs(res.image.at(x, y, 2) - 50) <= 1);
        found = true;
      }
  CHECK(found);
}

TEST_CASE("sigma threshold of zero masks everything") {
  const CornerGrid grid = uniform_grid(4, 4, 20.0, {8, 8});
  const VirtualCameraMap map = train_virtual_camera(grid);
  const RasterImage src = checker_image(80, 80, 20);
  UndistortOptions opts;
  opts.sigma_threshold = 0.0;
  const UndistortResult res = undistort_image(map, src, opts);
  for (std::uint8_t v : res.coverage_mask.data) CHECK(v == 0);
}

TEST_CASE("invalid inputs are rejected") {
  const CornerGrid grid = uniform_grid(4, 4, 20.0, {8, 8});
  const VirtualCameraMap map = train_virtual_camera(grid);
  RasterImage bad;  // zero size
  CHECK_THROWS_AS(undistort_image(map, bad), Error);
  const RasterImage src = checker_image(40, 40, 10);
  UndistortOptions opts;
  opts.scale = -1.0;
  CHECK_THROWS_AS(undistort_image(map, src, opts), Error);
}

TEST_CASE("sample_edges finds a single vertical edge") {
  RasterImage img = RasterImage::create(40, 30, 1);
  for (int y = 0; y < 30; ++y)
    for (int x = 0; x < 40; ++x) img.at(x, y) = x < 10 ? 0 : 255;
  const auto chains = sample_edges(img);
  REQUIRE(chains.size() == 1);
  CHECK(chains[0].rows() == 30);
  // Transition between columns 9 and 10, recorded at x = 9.5.
  CHECK(chains[0].col(0).minCoeff() == doctest::Approx(9.5));
  CHECK(chains[0].col(0).maxCoeff() == doctest::Approx(9.5));
  auto [line, dist] = geometry::fit_line_2d(chains[0]);
  CHECK(dist.maxCoeff() < 1e-12);
}

TEST_CASE("sample_edges follows a slanted edge") {
  RasterImage img = RasterImage::create(60, 40, 1);
  for (int y = 0; y < 40; ++y)
    for (int x = 0; x < 60; ++x)
      img.at(x, y) = x < 15 + y / 2 ? 0 : 255;  // slope ~0.5 px per row
  const auto chains = sample_edges(img);
  REQUIRE(chains.size() >= 1);
  // The longest chain tracks the edge across all rows.
  size_t longest = 0;
  for (size_t i = 1; i < chains.size(); ++i)
    if (chains[i].rows() > chains[longest].rows()) longest = i;
  CHECK(chains[longest].rows() >= 35);
  auto [line, dist] = geometry::fit_line_2d(chains[longest]);
  const double span =
      (chains[longest].row(chains[longest].rows() - 1) - chains[longest].row(0))
          .norm();
  CHECK(std::sqrt(dist.squaredNorm() / dist.size()) / span < 0.02);
}

TEST_CASE("sample_edges ignores weak transitions and short chains") {
  RasterImage img = RasterImage::create(30, 20, 1);
  for (int y = 0; y < 20; ++y)
    for (int x = 0; x < 30; ++x) img.at(x, y) = x < 15 ? 100 : 130;
  CHECK(sample_edges(img, 60.0).empty());

  // A 3-row blob produces chains shorter than the 5-point minimum.
  RasterImage blob = RasterImage::create(30, 20, 1);
  for (int y = 8; y < 11; ++y)
    for (int x = 10; x < 20; ++x) blob.at(x, y) = 255;
  for (const auto& c : sample_edges(blob)) CHECK(c.rows() >= 5);
}
