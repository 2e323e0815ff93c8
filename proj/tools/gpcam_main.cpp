#include <CLI11.hpp>
#include <algorithm>
#include <iostream>
#include <nlohmann/json.hpp>

#include "gpcam/dataset.hpp"
#include "gpcam/pipeline.hpp"
#include "gpcam/undistort.hpp"

namespace {

constexpr int kExitInvalidSpec = 2;
constexpr int kExitCalibration = 3;
constexpr int kExitEvaluation = 4;
constexpr int kExitImage = 5;

std::string ground_truth_path(const std::string& dataset_path) {
  const size_t dot = dataset_path.find_last_of('.');
  const std::string stem =
      dot == std::string::npos ? dataset_path : dataset_path.substr(0, dot);
  return stem + ".truth.json";
}

int cmd_generate(const std::string& source, const std::string& output,
                 double noise_override, bool has_noise,
                 std::int64_t seed_override, bool has_seed) {
  gpcam::synth::ScenarioSpec spec;
  try {
    const auto names = gpcam::synth::preset_names();
    if (std::find(names.begin(), names.end(), source) != names.end()) {
      spec = gpcam::synth::preset(source);
    } else {
      spec = gpcam::scenario_from_json(gpcam::read_json_file(source));
    }
    if (has_noise) spec.noise_sigma = noise_override;
    if (has_seed) spec.seed = static_cast<std::uint64_t>(seed_override);
  } catch (const gpcam::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalidSpec;
  }
  try {
    const gpcam::synth::Dataset ds = gpcam::synth::generate_dataset(spec);
    gpcam::DatasetFile file = gpcam::DatasetFile::from_synthetic(ds);

    // Ground truth goes to a sidecar file; the dataset itself carries it
    // too so a single file stays self-contained.
    nlohmann::json truth = gpcam::to_json(file).at("ground_truth");
    gpcam::save_dataset(output, file);
    gpcam::write_json_file(ground_truth_path(output), truth);
  } catch (const gpcam::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const gpcam::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalidSpec;
  }
  std::cout << "wrote " << output << " and " << ground_truth_path(output)
            << "\n";
  return 0;
}

int cmd_calibrate(const std::string& dataset_path, const std::string& output,
                  int reference_board, const std::string& method) {
  gpcam::DatasetFile dataset;
  try {
    dataset = gpcam::load_dataset(dataset_path);
  } catch (const gpcam::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalidSpec;
  }
  try {
    const gpcam::CalibrationResult result =
        gpcam::run_calibration(dataset, reference_board, method);
    gpcam::save_calibration(output, result);
    if (result.simplified) {
      std::cout << "f = " << result.simplified->intrinsics.f
                << " virtual px, principal point = ("
                << result.simplified->intrinsics.principal_point.x() << ", "
                << result.simplified->intrinsics.principal_point.y()
                << "), sigma_min = " << result.simplified->sigma_min << "\n";
    } else if (result.full) {
      std::cout << "fx = " << result.full->fx << ", fy = " << result.full->fy
                << ", skew = " << result.full->skew
                << ", principal point = ("
                << result.full->principal_point.x() << ", "
                << result.full->principal_point.y() << ")\n";
    }
  } catch (const gpcam::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const gpcam::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCalibration;
  }
  return 0;
}

int cmd_evaluate(const std::string& dataset_path,
                 const std::string& calibration_path,
                 const std::string& output) {
  try {
    const gpcam::DatasetFile dataset = gpcam::load_dataset(dataset_path);
    const gpcam::CalibrationResult calibration =
        gpcam::load_calibration(calibration_path);
    const gpcam::EvaluationResult result =
        gpcam::run_evaluation(dataset, calibration);

    const size_t dot = output.find_last_of('.');
    const std::string stem =
        dot == std::string::npos ? output : output.substr(0, dot);
    std::vector<std::string> ids;
    for (const auto& b : dataset.boards) ids.push_back(b.board_id);
    gpcam::save_evaluation(output, stem + ".csv", result, ids);

    std::cout << "GP CE = " << result.collinearity.dataset_average
              << ", GP RE = " << result.reprojection_error
              << ", max ray-origin distance = "
              << result.ray_bundle.max_origin_distance << "\n";
  } catch (const gpcam::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const gpcam::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitEvaluation;
  }
  return 0;
}

int cmd_undistort(const std::string& map_path, const std::string& dataset_path,
                  int reference_board, const std::string& image_path,
                  const std::string& output,
                  const gpcam::UndistortOptions& opts) {
  std::optional<gpcam::VirtualCameraMap> map;
  try {
    if (!map_path.empty()) {
      const nlohmann::json doc = gpcam::read_json_file(map_path);
      if (doc.value("schema", "") == "gpcam-calibration/1") {
        auto calib = gpcam::calibration_from_json(doc);
        if (!calib.virtual_camera)
          throw gpcam::FormatError(map_path + ": no GP-camera map stored");
        map = std::move(calib.virtual_camera);
      } else {
        map = gpcam::VirtualCameraMap::from_json(doc);
      }
    } else {
      const gpcam::DatasetFile dataset = gpcam::load_dataset(dataset_path);
      if (reference_board < 0 ||
          reference_board >= static_cast<int>(dataset.boards.size()))
        throw gpcam::Error("reference board index out of range");
      map = gpcam::train_virtual_camera(
          dataset.boards[static_cast<size_t>(reference_board)],
          Eigen::Vector2i(dataset.image_width, dataset.image_height));
    }
  } catch (const gpcam::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalidSpec;
  }

  try {
    const gpcam::RasterImage src = gpcam::read_image(image_path);
    const gpcam::UndistortResult result =
        gpcam::undistort_image(*map, src, opts);
    gpcam::write_image(output, result.image);
    const size_t dot = output.find_last_of('.');
    const std::string stem =
        dot == std::string::npos ? output : output.substr(0, dot);
    gpcam::write_image(stem + "_mask.pgm", result.coverage_mask);
    std::cout << "covered " << result.covered_count << " pixels, "
              << result.hole_count << " holes left\n";
  } catch (const gpcam::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitImage;
  } catch (const gpcam::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitImage;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "GP-camera toolkit: checkerboard datasets, virtual pinhole "
      "calibration, validation metrics and image undistortion"};
  app.require_subcommand(1);

  // generate
  std::string gen_source, gen_output;
  double gen_noise = 0.0;
  std::int64_t gen_seed = 0;
  auto* gen = app.add_subcommand(
      "generate", "Write a synthetic corner dataset and its ground truth");
  gen->add_option("source", gen_source,
                  "Preset (unity-pinhole, unity-barrel, unity-pincushion, "
                  "mirror-warp) or scenario JSON file")
      ->required();
  gen->add_option("output", gen_output, "Dataset JSON path")->required();
  auto* noise_opt =
      gen->add_option("--noise", gen_noise, "Corner noise sigma in pixels");
  auto* seed_opt = gen->add_option("--seed", gen_seed, "RNG seed");

  // calibrate
  std::string cal_dataset, cal_output, cal_method = "simplified";
  int cal_reference = 0;
  auto* cal = app.add_subcommand(
      "calibrate", "Train the GP-camera and calibrate it");
  cal->add_option("dataset", cal_dataset, "Dataset JSON path")->required();
  cal->add_option("output", cal_output, "Calibration JSON path")->required();
  cal->add_option("--reference-board", cal_reference,
                  "Board used to train the GP map (default 0)");
  cal->add_option("--method", cal_method,
                  "simplified (default) or full-linear")
      ->check(CLI::IsMember({"simplified", "full-linear"}));

  // evaluate
  std::string eval_dataset, eval_calibration, eval_output;
  auto* eval = app.add_subcommand(
      "evaluate", "Collinearity, reprojection and ray-bundle metrics");
  eval->add_option("dataset", eval_dataset, "Dataset JSON path")->required();
  eval->add_option("calibration", eval_calibration, "Calibration JSON path")
      ->required();
  eval->add_option("output", eval_output, "Metrics JSON path (CSV alongside)")
      ->required();

  // undistort
  std::string und_map, und_dataset, und_image, und_output;
  int und_reference = 0;
  gpcam::UndistortOptions und_opts;
  double und_sigma = 0.0;
  auto* und = app.add_subcommand("undistort", "Rectify a raster image");
  und->add_option("image", und_image, "Input image (PGM/PPM/PNG)")->required();
  und->add_option("output", und_output, "Output image path")->required();
  und->add_option("--map", und_map,
                  "GP-camera map or calibration JSON (else use --dataset)");
  und->add_option("--dataset", und_dataset,
                  "Dataset to train the map from when --map is absent");
  und->add_option("--reference-board", und_reference,
                  "Reference board for --dataset (default 0)");
  und->add_option("--scale", und_opts.scale,
                  "Output pixels per virtual grid unit (default 40)");
  und->add_option("--fill-radius", und_opts.fill_window_radius,
                  "Median fill window radius (default 1)");
  auto* sigma_opt = und->add_option(
      "--sigma-threshold", und_sigma,
      "Mask output pixels whose predictive sigma exceeds this value");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed())
      return cmd_generate(gen_source, gen_output, gen_noise,
                          noise_opt->count() > 0, gen_seed,
                          seed_opt->count() > 0);
    if (cal->parsed())
      return cmd_calibrate(cal_dataset, cal_output, cal_reference, cal_method);
    if (eval->parsed())
      return cmd_evaluate(eval_dataset, eval_calibration, eval_output);
    if (und->parsed()) {
      if (und_map.empty() && und_dataset.empty()) {
        std::cerr << "error: provide --map or --dataset\n";
        return kExitInvalidSpec;
      }
      if (sigma_opt->count() > 0) und_opts.sigma_threshold = und_sigma;
      return cmd_undistort(und_map, und_dataset, und_reference, und_image,
                           und_output, und_opts);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
