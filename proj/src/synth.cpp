#include "gpcam/synth.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

namespace gpcam::synth {

namespace {

Eigen::Vector2d distort_one(const RadialDistortion& f,
                            const Eigen::Vector2d& p) {
  const Eigen::Vector2d d = p - f.center;
  const double r2 = d.squaredNorm() / (f.half_diagonal * f.half_diagonal);
  return f.center + d * (1.0 + f.k1 * r2 + f.k2 * r2 * r2);
}

Eigen::Vector2d distort_one(const SmoothWarp& f, const Eigen::Vector2d& p) {
  Eigen::Vector2d q = p;
  for (const auto& b : f.bumps) {
    const double e =
        std::exp(-(p - b.center).squaredNorm() / (2.0 * b.width * b.width));
    q += b.amplitude * e;
  }
  return q;
}

Eigen::Vector2d distort_one(const DistortionField& field,
                            const Eigen::Vector2d& p) {
  if (std::holds_alternative<NoDistortion>(field)) return p;
  if (const auto* r = std::get_if<RadialDistortion>(&field))
    return distort_one(*r, p);
  return distort_one(std::get<SmoothWarp>(field), p);
}

Eigen::Matrix3d rotation_xyz(double rx, double ry, double rz) {
  return (Eigen::AngleAxisd(rz, Eigen::Vector3d::UnitZ()) *
          Eigen::AngleAxisd(ry, Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(rx, Eigen::Vector3d::UnitX()))
      .toRotationMatrix();
}

}  // namespace

geometry::Points2 distort_points(const DistortionField& field,
                                 const geometry::Points2& p) {
  geometry::Points2 out(p.rows(), 2);
  for (Eigen::Index i = 0; i < p.rows(); ++i)
    out.row(i) = distort_one(field, p.row(i).transpose()).transpose();
  return out;
}

Eigen::Vector2d undistort_point(const DistortionField& field,
                                const Eigen::Vector2d& q) {
  if (std::holds_alternative<NoDistortion>(field)) return q;

  if (const auto* f = std::get_if<RadialDistortion>(&field)) {
    // rho(r) = r (1 + k1 r^2 + k2 r^4) is scalar and monotone on the
    // valid domain; Newton on the normalized radius.
    const Eigen::Vector2d d = q - f->center;
    const double rq = d.norm() / f->half_diagonal;
    if (rq < 1e-14) return q;
    double r = rq;
    for (int it = 0; it < 50; ++it) {
      const double r2 = r * r;
      const double rho = r * (1.0 + f->k1 * r2 + f->k2 * r2 * r2);
      const double drho = 1.0 + 3.0 * f->k1 * r2 + 5.0 * f->k2 * r2 * r2;
      const double step = (rho - rq) / drho;
      r -= step;
      if (std::abs(step) < 1e-14) break;
    }
    return f->center + d * (r / rq);
  }

  const auto& f = std::get<SmoothWarp>(field);
  Eigen::Vector2d p = q;
  for (int it = 0; it < 50; ++it) {
    Eigen::Vector2d val = p - q;
    Eigen::Matrix2d jac = Eigen::Matrix2d::Identity();
    for (const auto& b : f.bumps) {
      const Eigen::Vector2d d = p - b.center;
      const double e = std::exp(-d.squaredNorm() / (2.0 * b.width * b.width));
      val += b.amplitude * e;
      jac += b.amplitude * (-d.transpose() / (b.width * b.width)) * e;
    }
    const Eigen::Vector2d step = jac.partialPivLu().solve(val);
    p -= step;
    if (step.norm() < 1e-12) break;
  }
  return p;
}

void check_injective(const DistortionField& field, int width, int height) {
  if (std::holds_alternative<NoDistortion>(field)) return;

  if (const auto* f = std::get_if<RadialDistortion>(&field)) {
    double r_max = 0.0;
    for (const Eigen::Vector2d corner :
         {Eigen::Vector2d(0, 0), Eigen::Vector2d(width, 0),
          Eigen::Vector2d(0, height), Eigen::Vector2d(width, height)})
      r_max = std::max(r_max, (corner - f->center).norm() / f->half_diagonal);
    for (int i = 0; i <= 1000; ++i) {
      const double r = r_max * i / 1000.0;
      const double r2 = r * r;
      if (1.0 + 3.0 * f->k1 * r2 + 5.0 * f->k2 * r2 * r2 <= 0)
        throw NonInjectiveWarp(
            "radial distortion folds at normalized radius " +
            std::to_string(r));
    }
    return;
  }

  const auto& f = std::get<SmoothWarp>(field);
  const double diag = std::hypot(width, height);
  for (const auto& b : f.bumps)
    if (b.amplitude.norm() > 0.1 * diag)
      throw NonInjectiveWarp("smooth warp displacement exceeds 10% of the "
                             "image diagonal");
  // Jacobian determinant sampled on a grid; a fold flips orientation.
  const int n = 50;
  const double h = 1e-3;
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) {
      const Eigen::Vector2d p(width * static_cast<double>(j) / n,
                              height * static_cast<double>(i) / n);
      const Eigen::Vector2d fx1 = distort_one(f, p + Eigen::Vector2d(h, 0));
      const Eigen::Vector2d fx0 = distort_one(f, p - Eigen::Vector2d(h, 0));
      const Eigen::Vector2d fy1 = distort_one(f, p + Eigen::Vector2d(0, h));
      const Eigen::Vector2d fy0 = distort_one(f, p - Eigen::Vector2d(0, h));
      Eigen::Matrix2d jac;
      jac.col(0) = (fx1 - fx0) / (2 * h);
      jac.col(1) = (fy1 - fy0) / (2 * h);
      if (jac.determinant() <= 0)
        throw NonInjectiveWarp("smooth warp folds near (" +
                               std::to_string(p.x()) + ", " +
                               std::to_string(p.y()) + ")");
    }
}

CornerGrid project_board(const calibration::FullIntrinsics& K,
                         const calibration::Pose& pose, int rows, int cols,
                         double square_size) {
  const Eigen::Matrix3d k = K.matrix();
  CornerGrid grid;
  grid.rows = rows;
  grid.cols = cols;
  grid.points.resize(static_cast<Eigen::Index>(rows) * cols, 2);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const Eigen::Vector3d pw(c * square_size, r * square_size, 0.0);
      const Eigen::Vector3d pc = pose.R * pw + pose.t;
      if (pc.z() <= 0)
        throw BehindCamera("project_board: corner at non-positive depth");
      const Eigen::Vector3d q = k * pc;
      grid.points(static_cast<Eigen::Index>(r) * cols + c, 0) = q.x() / q.z();
      grid.points(static_cast<Eigen::Index>(r) * cols + c, 1) = q.y() / q.z();
    }
  return grid;
}

VirtualGroundTruth virtual_ground_truth(const ScenarioSpec& spec) {
  if (spec.poses.empty()) throw Error("virtual_ground_truth: no poses");
  const calibration::Pose& p0 = spec.poses.front();
  const Eigen::Vector3d r3 = p0.R.col(2);
  const double d = r3.dot(p0.t);  // distance from the optical centre
  if (d <= 0)
    throw BehindCamera("virtual_ground_truth: reference plane behind camera");
  const Eigen::Vector3d foot = d * r3;
  const Eigen::Vector3d board = p0.R.transpose() * (foot - p0.t);
  VirtualGroundTruth vt;
  vt.f = d / spec.square_size;
  vt.principal_point = board.head<2>() / spec.square_size;
  return vt;
}

Dataset generate_dataset(const ScenarioSpec& spec) {
  if (spec.poses.empty()) throw Error("generate_dataset: no poses");
  check_injective(spec.distortion, spec.width, spec.height);

  Dataset ds;
  ds.spec = spec;
  ds.virtual_truth = virtual_ground_truth(spec);

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  int index = 0;
  for (const calibration::Pose& pose : spec.poses) {
    CornerGrid exact = project_board(spec.intrinsics, pose, spec.board_rows,
                                     spec.board_cols, spec.square_size);
    char id[32];
    std::snprintf(id, sizeof(id), "board_%03d", index++);
    exact.board_id = id;

    CornerGrid observed = exact;
    observed.points = distort_points(spec.distortion, exact.points);
    if (spec.noise_sigma > 0) {
      for (Eigen::Index i = 0; i < observed.points.rows(); ++i) {
        observed.points(i, 0) += spec.noise_sigma * noise(rng);
        observed.points(i, 1) += spec.noise_sigma * noise(rng);
      }
    }
    for (Eigen::Index i = 0; i < observed.points.rows(); ++i) {
      if (observed.points(i, 0) < 0 || observed.points(i, 0) >= spec.width ||
          observed.points(i, 1) < 0 || observed.points(i, 1) >= spec.height)
        throw Error("generate_dataset: " + observed.board_id +
                    " projects outside the image");
    }
    ds.undistorted_boards.push_back(std::move(exact));
    ds.boards.push_back(std::move(observed));
  }
  return ds;
}

RasterImage render_checkerboard(const ScenarioSpec& spec, int board_index,
                                int supersample) {
  if (board_index < 0 ||
      board_index >= static_cast<int>(spec.poses.size()))
    throw Error("render_checkerboard: board index out of range");
  check_injective(spec.distortion, spec.width, spec.height);

  const calibration::Pose& pose = spec.poses[static_cast<size_t>(board_index)];
  Eigen::Matrix3d h;
  h.col(0) = pose.R.col(0);
  h.col(1) = pose.R.col(1);
  h.col(2) = pose.t;
  const Eigen::Matrix3d hinv = (spec.intrinsics.matrix() * h).inverse();

  RasterImage img = RasterImage::create(spec.width, spec.height, 1, 255);
  const int ss = std::max(supersample, 1);
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      int acc = 0;
      for (int sy = 0; sy < ss; ++sy)
        for (int sx = 0; sx < ss; ++sx) {
          const Eigen::Vector2d pix(x + (sx + 0.5) / ss,
                                    y + (sy + 0.5) / ss);
          const Eigen::Vector2d ideal = undistort_point(spec.distortion, pix);
          const Eigen::Vector3d bw =
              hinv * Eigen::Vector3d(ideal.x(), ideal.y(), 1.0);
          if (std::abs(bw.z()) < 1e-12) {
            acc += 255;
            continue;
          }
          const double qx = bw.x() / bw.z() / spec.square_size;
          const double qy = bw.y() / bw.z() / spec.square_size;
          // Pattern spans one square beyond the corner lattice on each side.
          if (qx < -1 || qx > spec.board_cols || qy < -1 ||
              qy > spec.board_rows) {
            acc += 255;
            continue;
          }
          const long ix = static_cast<long>(std::floor(qx));
          const long iy = static_cast<long>(std::floor(qy));
          acc += ((ix + iy) % 2 + 2) % 2 == 0 ? 25 : 230;
        }
      img.at(x, y) = static_cast<std::uint8_t>(acc / (ss * ss));
    }
  }
  return img;
}

std::vector<std::string> preset_names() {
  return {"unity-pinhole", "unity-barrel", "unity-pincushion", "mirror-warp"};
}

ScenarioSpec preset(const std::string& name) {
  ScenarioSpec spec;
  spec.name = name;
  spec.width = 3840;
  spec.height = 2160;
  spec.board_rows = 9;
  spec.board_cols = 15;
  spec.square_size = 1.0;
  spec.intrinsics.fx = 1500.0;
  spec.intrinsics.fy = 1500.0;
  spec.intrinsics.skew = 0.0;
  spec.intrinsics.principal_point = {1920.0, 1080.0};
  spec.seed = 7;

  if (name == "unity-pinhole") {
    spec.distortion = NoDistortion{};
  } else if (name == "unity-barrel") {
    RadialDistortion r;
    r.center = {1920.0, 1080.0};
    r.k1 = -0.2;
    r.k2 = 0.02;
    r.half_diagonal = std::hypot(3840.0, 2160.0) / 2.0;
    spec.distortion = r;
  } else if (name == "unity-pincushion") {
    RadialDistortion r;
    r.center = {1536.0, 1404.0};  // shifted left and bottom
    r.k1 = 0.08;
    r.k2 = 0.01;
    r.half_diagonal = std::hypot(3840.0, 2160.0) / 2.0;
    spec.distortion = r;
  } else if (name == "mirror-warp") {
    SmoothWarp w;
    w.bumps.push_back({{900.0, 600.0}, {55.0, -25.0}, 700.0});
    w.bumps.push_back({{3000.0, 1500.0}, {-45.0, 35.0}, 800.0});
    w.bumps.push_back({{2100.0, 300.0}, {20.0, 50.0}, 600.0});
    w.bumps.push_back({{1500.0, 1900.0}, {-30.0, -40.0}, 900.0});
    spec.distortion = w;
  } else {
    throw Error("unknown preset '" + name + "'");
  }

  // Reference board: fronto-parallel, centred, filling most of the frame.
  const double d0 = 7.2;
  const double cx = (spec.board_cols - 1) / 2.0;
  const double cy = (spec.board_rows - 1) / 2.0;
  calibration::Pose ref;
  ref.R = Eigen::Matrix3d::Identity();
  ref.t = {-cx, -cy, d0};
  spec.poses.push_back(ref);

  // 29 further poses sampled deterministically; a candidate is kept only
  // when its distorted corners stay inside the reference board's
  // distorted footprint (the GP must interpolate, not extrapolate).
  CornerGrid ref_grid = project_board(spec.intrinsics, ref, spec.board_rows,
                                      spec.board_cols, spec.square_size);
  geometry::Points2 ref_pts = distort_points(spec.distortion, ref_grid.points);
  const double margin = 2.0;  // pixels
  const double x_lo = ref_pts.col(0).minCoeff() + margin;
  const double x_hi = ref_pts.col(0).maxCoeff() - margin;
  const double y_lo = ref_pts.col(1).minCoeff() + margin;
  const double y_hi = ref_pts.col(1).maxCoeff() - margin;

  std::mt19937_64 rng(spec.seed * 1000003ULL + 17);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  const double deg = std::numbers::pi / 180.0;
  int attempts = 0;
  while (spec.poses.size() < 30 && attempts < 100000) {
    ++attempts;
    const double rx = 25.0 * deg * uni(rng);
    const double ry = 25.0 * deg * uni(rng);
    const double rz = 10.0 * deg * uni(rng);
    const double depth = d0 * (1.55 + 0.45 * uni(rng));  // 1.1x .. 2.0x
    const double dx = 2.5 * uni(rng);
    const double dy = 1.5 * uni(rng);

    calibration::Pose cand;
    cand.R = rotation_xyz(rx, ry, rz);
    cand.t = Eigen::Vector3d(dx, dy, depth) -
             cand.R * Eigen::Vector3d(cx, cy, 0.0);

    CornerGrid grid;
    try {
      grid = project_board(spec.intrinsics, cand, spec.board_rows,
                           spec.board_cols, spec.square_size);
    } catch (const BehindCamera&) {
      continue;
    }
    const geometry::Points2 pts = distort_points(spec.distortion, grid.points);
    if (pts.col(0).minCoeff() < x_lo || pts.col(0).maxCoeff() > x_hi ||
        pts.col(1).minCoeff() < y_lo || pts.col(1).maxCoeff() > y_hi)
      continue;
    spec.poses.push_back(cand);
  }
  if (spec.poses.size() < 30)
    throw Error("preset '" + name + "': pose sampling failed");
  return spec;
}

}  // namespace gpcam::synth
