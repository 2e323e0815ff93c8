#include "gpcam/dataset.hpp"

#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>

namespace gpcam {

namespace {

nlohmann::json points_to_json(const geometry::Points2& pts) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < pts.rows(); ++i)
    arr.push_back({pts(i, 0), pts(i, 1)});
  return arr;
}

geometry::Points2 points_from_json(const nlohmann::json& arr) {
  geometry::Points2 pts(static_cast<Eigen::Index>(arr.size()), 2);
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    pts(i, 0) = arr[i][0].get<double>();
    pts(i, 1) = arr[i][1].get<double>();
  }
  return pts;
}

nlohmann::json board_to_json(const CornerGrid& b) {
  return {{"board_id", b.board_id}, {"corners", points_to_json(b.points)}};
}

CornerGrid board_from_json(const nlohmann::json& doc, int rows, int cols) {
  CornerGrid b;
  b.rows = rows;
  b.cols = cols;
  b.board_id = doc.value("board_id", "");
  b.points = points_from_json(doc.at("corners"));
  if (!b.valid())
    throw FormatError("board '" + b.board_id +
                      "': corner count does not match " +
                      std::to_string(rows) + "x" + std::to_string(cols) +
                      " or corners are non-finite");
  return b;
}

nlohmann::json pose_to_json(const calibration::Pose& p) {
  nlohmann::json r = nlohmann::json::array();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r.push_back(p.R(i, j));
  return {{"R", r}, {"t", {p.t.x(), p.t.y(), p.t.z()}}};
}

calibration::Pose pose_from_json(const nlohmann::json& doc) {
  calibration::Pose p;
  const auto& r = doc.at("R");
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) p.R(i, j) = r[3 * i + j].get<double>();
  for (int i = 0; i < 3; ++i) p.t[i] = doc.at("t")[i].get<double>();
  return p;
}

nlohmann::json full_intrinsics_to_json(const calibration::FullIntrinsics& k) {
  return {{"fx", k.fx},
          {"fy", k.fy},
          {"skew", k.skew},
          {"principal_point", {k.principal_point.x(), k.principal_point.y()}}};
}

calibration::FullIntrinsics full_intrinsics_from_json(
    const nlohmann::json& doc) {
  calibration::FullIntrinsics k;
  k.fx = doc.at("fx").get<double>();
  k.fy = doc.at("fy").get<double>();
  k.skew = doc.at("skew").get<double>();
  k.principal_point = {doc.at("principal_point")[0].get<double>(),
                       doc.at("principal_point")[1].get<double>()};
  return k;
}

nlohmann::json distortion_to_json(const synth::DistortionField& f) {
  if (std::holds_alternative<synth::NoDistortion>(f))
    return {{"variant", "none"}};
  if (const auto* r = std::get_if<synth::RadialDistortion>(&f))
    return {{"variant", "radial"},
            {"center", {r->center.x(), r->center.y()}},
            {"k1", r->k1},
            {"k2", r->k2},
            {"half_diagonal", r->half_diagonal}};
  const auto& w = std::get<synth::SmoothWarp>(f);
  nlohmann::json bumps = nlohmann::json::array();
  for (const auto& b : w.bumps)
    bumps.push_back({{"center", {b.center.x(), b.center.y()}},
                     {"amplitude", {b.amplitude.x(), b.amplitude.y()}},
                     {"width", b.width}});
  return {{"variant", "smooth_warp"}, {"bumps", bumps}};
}

synth::DistortionField distortion_from_json(const nlohmann::json& doc) {
  const std::string variant = doc.at("variant").get<std::string>();
  if (variant == "none") return synth::NoDistortion{};
  if (variant == "radial") {
    synth::RadialDistortion r;
    r.center = {doc.at("center")[0].get<double>(),
                doc.at("center")[1].get<double>()};
    r.k1 = doc.at("k1").get<double>();
    r.k2 = doc.at("k2").get<double>();
    r.half_diagonal = doc.at("half_diagonal").get<double>();
    return r;
  }
  if (variant == "smooth_warp") {
    synth::SmoothWarp w;
    for (const auto& b : doc.at("bumps")) {
      synth::SmoothWarp::Bump bump;
      bump.center = {b.at("center")[0].get<double>(),
                     b.at("center")[1].get<double>()};
      bump.amplitude = {b.at("amplitude")[0].get<double>(),
                        b.at("amplitude")[1].get<double>()};
      bump.width = b.at("width").get<double>();
      w.bumps.push_back(bump);
    }
    return w;
  }
  throw FormatError("unknown distortion variant '" + variant + "'");
}

// Row-major monotonic structure: along every row and column, consecutive
// steps must not reverse direction.
void validate_ordering(const CornerGrid& b) {
  auto check = [&](int count, int stride, int n_lines, int line_stride,
                   const char* what) {
    for (int l = 0; l < n_lines; ++l)
      for (int i = 0; i + 2 < count; ++i) {
        const Eigen::Index a = static_cast<Eigen::Index>(l) * line_stride +
                               static_cast<Eigen::Index>(i) * stride;
        const Eigen::Vector2d d1 =
            b.points.row(a + stride) - b.points.row(a);
        const Eigen::Vector2d d2 =
            b.points.row(a + 2 * stride) - b.points.row(a + stride);
        if (d1.dot(d2) <= 0)
          throw FormatError("board '" + b.board_id + "': " + what +
                            " ordering is not monotonic (expected row-major "
                            "corners)");
      }
  };
  check(b.cols, 1, b.rows, b.cols, "row");
  check(b.rows, b.cols, b.cols, 1, "column");
}

}  // namespace

DatasetFile DatasetFile::from_synthetic(const synth::Dataset& ds) {
  DatasetFile f;
  f.rows = ds.spec.board_rows;
  f.cols = ds.spec.board_cols;
  f.square_size = ds.spec.square_size;
  f.image_width = ds.spec.width;
  f.image_height = ds.spec.height;
  f.boards = ds.boards;
  GroundTruth gt;
  gt.intrinsics = ds.spec.intrinsics;
  gt.poses = ds.spec.poses;
  gt.virtual_truth = ds.virtual_truth;
  gt.undistorted_boards = ds.undistorted_boards;
  gt.noise_sigma = ds.spec.noise_sigma;
  gt.seed = ds.spec.seed;
  gt.scenario = ds.spec.name;
  f.ground_truth = std::move(gt);
  return f;
}

nlohmann::json to_json(const DatasetFile& ds) {
  nlohmann::json doc;
  doc["schema"] = "gpcam-dataset/1";
  doc["rows"] = ds.rows;
  doc["cols"] = ds.cols;
  doc["square_size"] = ds.square_size;
  doc["image_width"] = ds.image_width;
  doc["image_height"] = ds.image_height;
  nlohmann::json boards = nlohmann::json::array();
  for (const CornerGrid& b : ds.boards) boards.push_back(board_to_json(b));
  doc["boards"] = std::move(boards);
  if (ds.ground_truth) {
    const GroundTruth& gt = *ds.ground_truth;
    nlohmann::json g;
    g["intrinsics"] = full_intrinsics_to_json(gt.intrinsics);
    nlohmann::json poses = nlohmann::json::array();
    for (const auto& p : gt.poses) poses.push_back(pose_to_json(p));
    g["poses"] = std::move(poses);
    g["virtual"] = {{"f", gt.virtual_truth.f},
                    {"principal_point",
                     {gt.virtual_truth.principal_point.x(),
                      gt.virtual_truth.principal_point.y()}}};
    nlohmann::json ub = nlohmann::json::array();
    for (const CornerGrid& b : gt.undistorted_boards)
      ub.push_back(board_to_json(b));
    g["undistorted_boards"] = std::move(ub);
    g["noise_sigma"] = gt.noise_sigma;
    g["seed"] = gt.seed;
    g["scenario"] = gt.scenario;
    doc["ground_truth"] = std::move(g);
  }
  return doc;
}

DatasetFile dataset_from_json(const nlohmann::json& doc) {
  if (doc.value("schema", "") != "gpcam-dataset/1")
    throw FormatError("dataset: unrecognized schema");
  DatasetFile ds;
  ds.rows = doc.at("rows").get<int>();
  ds.cols = doc.at("cols").get<int>();
  ds.square_size = doc.at("square_size").get<double>();
  ds.image_width = doc.at("image_width").get<int>();
  ds.image_height = doc.at("image_height").get<int>();
  if (ds.rows < 2 || ds.cols < 2)
    throw FormatError("dataset: grid must be at least 2x2");
  for (const auto& b : doc.at("boards")) {
    ds.boards.push_back(board_from_json(b, ds.rows, ds.cols));
    validate_ordering(ds.boards.back());
  }
  if (doc.contains("ground_truth")) {
    const auto& g = doc.at("ground_truth");
    GroundTruth gt;
    gt.intrinsics = full_intrinsics_from_json(g.at("intrinsics"));
    for (const auto& p : g.at("poses")) gt.poses.push_back(pose_from_json(p));
    gt.virtual_truth.f = g.at("virtual").at("f").get<double>();
    gt.virtual_truth.principal_point = {
        g.at("virtual").at("principal_point")[0].get<double>(),
        g.at("virtual").at("principal_point")[1].get<double>()};
    for (const auto& b : g.at("undistorted_boards"))
      gt.undistorted_boards.push_back(board_from_json(b, ds.rows, ds.cols));
    gt.noise_sigma = g.at("noise_sigma").get<double>();
    gt.seed = g.at("seed").get<std::uint64_t>();
    gt.scenario = g.value("scenario", "custom");
    ds.ground_truth = std::move(gt);
  }
  return ds;
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
  return doc;
}

void write_json_file(const std::string& path, const nlohmann::json& doc) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << doc.dump(2) << "\n";
  if (!out) throw IoError("short write to " + path);
}

void save_dataset(const std::string& path, const DatasetFile& ds) {
  write_json_file(path, to_json(ds));
}

DatasetFile load_dataset(const std::string& path) {
  return dataset_from_json(read_json_file(path));
}

Eigen::Matrix3d CalibrationResult::intrinsic_matrix() const {
  if (simplified) return simplified->intrinsics.matrix();
  if (full) return full->matrix();
  throw Error("CalibrationResult: no intrinsics present");
}

nlohmann::json to_json(const CalibrationResult& r) {
  nlohmann::json doc;
  doc["schema"] = "gpcam-calibration/1";
  doc["method"] = r.method;
  doc["reference_board"] = r.reference_board;
  if (r.simplified) {
    doc["intrinsics"] = {
        {"f", r.simplified->intrinsics.f},
        {"principal_point",
         {r.simplified->intrinsics.principal_point.x(),
          r.simplified->intrinsics.principal_point.y()}}};
    doc["sigma_min"] = r.simplified->sigma_min;
    doc["sigma_second"] = r.simplified->sigma_second;
  }
  if (r.full) doc["full_intrinsics"] = full_intrinsics_to_json(*r.full);
  nlohmann::json poses = nlohmann::json::array();
  for (const auto& p : r.poses) poses.push_back(pose_to_json(p));
  doc["poses"] = std::move(poses);
  nlohmann::json hs = nlohmann::json::array();
  for (const auto& h : r.homographies) {
    nlohmann::json m = nlohmann::json::array();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m.push_back(h.H(i, j));
    hs.push_back(std::move(m));
  }
  doc["homographies"] = std::move(hs);
  if (r.virtual_camera) doc["virtual_camera"] = r.virtual_camera->to_json();
  return doc;
}

CalibrationResult calibration_from_json(const nlohmann::json& doc) {
  if (doc.value("schema", "") != "gpcam-calibration/1")
    throw FormatError("calibration: unrecognized schema");
  CalibrationResult r;
  r.method = doc.at("method").get<std::string>();
  r.reference_board = doc.at("reference_board").get<int>();
  if (doc.contains("intrinsics")) {
    calibration::SimplifiedCalibration s;
    s.intrinsics.f = doc.at("intrinsics").at("f").get<double>();
    s.intrinsics.principal_point = {
        doc.at("intrinsics").at("principal_point")[0].get<double>(),
        doc.at("intrinsics").at("principal_point")[1].get<double>()};
    s.sigma_min = doc.value("sigma_min", 0.0);
    s.sigma_second = doc.value("sigma_second", 0.0);
    r.simplified = s;
  }
  if (doc.contains("full_intrinsics"))
    r.full = full_intrinsics_from_json(doc.at("full_intrinsics"));
  for (const auto& p : doc.at("poses")) r.poses.push_back(pose_from_json(p));
  for (const auto& m : doc.at("homographies")) {
    Eigen::Matrix3d h;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) h(i, j) = m[3 * i + j].get<double>();
    r.homographies.push_back(geometry::Homography::from_matrix(h));
  }
  if (doc.contains("virtual_camera"))
    r.virtual_camera = VirtualCameraMap::from_json(doc.at("virtual_camera"));
  return r;
}

void save_calibration(const std::string& path, const CalibrationResult& r) {
  write_json_file(path, to_json(r));
}

CalibrationResult load_calibration(const std::string& path) {
  return calibration_from_json(read_json_file(path));
}

nlohmann::json to_json(const EvaluationResult& r) {
  nlohmann::json doc;
  doc["schema"] = "gpcam-evaluation/1";
  doc["collinearity"]["dataset_average"] = r.collinearity.dataset_average;
  nlohmann::json per_board = nlohmann::json::array();
  for (const auto& b : r.collinearity.boards)
    per_board.push_back(b.board_average);
  doc["collinearity"]["per_board"] = std::move(per_board);
  doc["reprojection_error"] = r.reprojection_error;
  doc["ray_bundle"]["max_origin_distance"] = r.ray_bundle.max_origin_distance;
  doc["ray_bundle"]["rms_origin_distance"] = r.ray_bundle.rms_origin_distance;
  nlohmann::json rays = nlohmann::json::array();
  for (const auto& ray : r.ray_bundle.rays)
    rays.push_back({{"pixel", {ray.pixel.x(), ray.pixel.y()}},
                    {"origin_distance", ray.origin_distance},
                    {"inliers", ray.inlier_count},
                    {"valid", ray.valid}});
  doc["ray_bundle"]["rays"] = std::move(rays);
  return doc;
}

void save_evaluation(const std::string& json_path, const std::string& csv_path,
                     const EvaluationResult& r,
                     const std::vector<std::string>& board_ids) {
  write_json_file(json_path, to_json(r));

  std::ofstream csv(csv_path);
  if (!csv) throw IoError("cannot write " + csv_path);
  csv.precision(17);
  csv << "record,id,value\n";
  for (size_t i = 0; i < r.collinearity.boards.size(); ++i)
    csv << "collinearity_error,"
        << (i < board_ids.size() ? board_ids[i] : std::to_string(i)) << ","
        << r.collinearity.boards[i].board_average << "\n";
  csv << "collinearity_error,dataset_average,"
      << r.collinearity.dataset_average << "\n";
  csv << "reprojection_error,dataset," << r.reprojection_error << "\n";
  for (size_t i = 0; i < r.ray_bundle.rays.size(); ++i) {
    const auto& ray = r.ray_bundle.rays[i];
    csv << "ray_origin_distance,pixel_" << i << ","
        << (ray.valid ? ray.origin_distance
                      : std::numeric_limits<double>::quiet_NaN())
        << "\n";
  }
  if (!csv) throw IoError("short write to " + csv_path);
}

synth::ScenarioSpec scenario_from_json(const nlohmann::json& doc) {
  synth::ScenarioSpec spec;
  if (doc.contains("preset")) {
    spec = synth::preset(doc.at("preset").get<std::string>());
  } else {
    spec.intrinsics = full_intrinsics_from_json(doc.at("intrinsics"));
    spec.width = doc.at("image_width").get<int>();
    spec.height = doc.at("image_height").get<int>();
    spec.board_rows = doc.at("rows").get<int>();
    spec.board_cols = doc.at("cols").get<int>();
    spec.square_size = doc.at("square_size").get<double>();
    for (const auto& p : doc.at("poses"))
      spec.poses.push_back(pose_from_json(p));
    if (doc.contains("distortion"))
      spec.distortion = distortion_from_json(doc.at("distortion"));
    spec.name = doc.value("name", "custom");
  }
  if (doc.contains("noise_sigma"))
    spec.noise_sigma = doc.at("noise_sigma").get<double>();
  if (doc.contains("seed")) spec.seed = doc.at("seed").get<std::uint64_t>();
  return spec;
}

}  // namespace gpcam
