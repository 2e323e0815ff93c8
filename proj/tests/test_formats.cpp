#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>

#include "gpcam/dataset.hpp"
#include "gpcam/image.hpp"
#include "gpcam/pipeline.hpp"

using namespace gpcam;
namespace fs = std::filesystem;

namespace {

fs::path tmp_dir() {
  const fs::path d = fs::temp_directory_path() / "gpcam_format_tests";
  fs::create_directories(d);
  return d;
}

RasterImage gradient_image(int w, int h, int ch) {
  RasterImage img = RasterImage::create(w, h, ch);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < ch; ++c)
        img.at(x, y, c) = static_cast<std::uint8_t>((x * 3 + y * 5 + c * 7) % 256);
  return img;
}

}  // namespace

TEST_CASE("PGM round trip is lossless") {
  const fs::path p = tmp_dir() / "gray.pgm";
  const RasterImage img = gradient_image(37, 23, 1);
  write_image(p.string(), img);
  const RasterImage back = read_image(p.string());
  CHECK(back.width == 37);
  CHECK(back.height == 23);
  CHECK(back.channels == 1);
  CHECK(back.data == img.data);
}

TEST_CASE("PPM round trip is lossless") {
  const fs::path p = tmp_dir() / "color.ppm";
  const RasterImage img = gradient_image(19, 31, 3);
  write_image(p.string(), img);
  const RasterImage back = read_image(p.string());
  CHECK(back.channels == 3);
  CHECK(back.data == img.data);
}

TEST_CASE("PNG round trip is lossless for gray and color") {
  for (int ch : {1, 3}) {
    const fs::path p = tmp_dir() / ("img_" + std::to_string(ch) + ".png");
    const RasterImage img = gradient_image(25, 17, ch);
    write_image(p.string(), img);
    const RasterImage back = read_image(p.string());
    CHECK(back.width == 25);
    CHECK(back.height == 17);
    CHECK(back.channels == ch);
    CHECK(back.data == img.data);
  }
}

TEST_CASE("to_gray uses a luminance average") {
  RasterImage img = RasterImage::create(2, 1, 3);
  img.at(0, 0, 0) = 90;
  img.at(0, 0, 1) = 90;
  img.at(0, 0, 2) = 90;
  img.at(1, 0, 0) = 255;
  img.at(1, 0, 1) = 0;
  img.at(1, 0, 2) = 0;
  const RasterImage g = img.to_gray();
  CHECK(g.channels == 1);
  CHECK(g.at(0, 0) == 90);
  CHECK(g.at(1, 0) > 0);
  CHECK(g.at(1, 0) < 255);
}

TEST_CASE("missing and malformed image files raise IO and format errors") {
  CHECK_THROWS_AS(read_image((tmp_dir() / "missing.pgm").string()), IoError);
  const fs::path bad = tmp_dir() / "bad.pgm";
  std::ofstream(bad) << "not a pgm at all";
  CHECK_THROWS_AS(read_image(bad.string()), Error);
  RasterImage img = gradient_image(4, 4, 1);
  CHECK_THROWS_AS(write_image((tmp_dir() / "img.bmp").string(), img), Error);
}

TEST_CASE("dataset JSON round trip preserves boards and ground truth") {
  synth::ScenarioSpec spec = synth::preset("unity-barrel");
  spec.noise_sigma = 0.05;
  const synth::Dataset ds = synth::generate_dataset(spec);
  const DatasetFile file = DatasetFile::from_synthetic(ds);

  const fs::path p = tmp_dir() / "dataset.json";
  save_dataset(p.string(), file);
  const DatasetFile back = load_dataset(p.string());

  CHECK(back.rows == 9);
  CHECK(back.cols == 15);
  CHECK(back.image_width == 3840);
  CHECK(back.image_height == 2160);
  REQUIRE(back.boards.size() == 30);
  for (size_t i = 0; i < back.boards.size(); ++i) {
    CHECK(back.boards[i].board_id == file.boards[i].board_id);
    CHECK((back.boards[i].points - file.boards[i].points)
              .cwiseAbs()
              .maxCoeff() < 1e-12);
  }
  REQUIRE(back.ground_truth.has_value());
  CHECK(back.ground_truth->virtual_truth.f == doctest::Approx(7.2));
  CHECK(back.ground_truth->noise_sigma == doctest::Approx(0.05));
  CHECK(back.ground_truth->scenario == "unity-barrel");
  CHECK(back.ground_truth->poses.size() == 30);
  CHECK(back.ground_truth->undistorted_boards.size() == 30);
}

TEST_CASE("dataset schema violations are rejected") {
  const fs::path p = tmp_dir() / "broken.json";

  nlohmann::json doc;
  doc["schema"] = "something-else/9";
  write_json_file(p.string(), doc);
  CHECK_THROWS_AS(load_dataset(p.string()), FormatError);

  // Corner count mismatch.
  synth::ScenarioSpec spec = synth::preset("unity-pinhole");
  const DatasetFile file =
      DatasetFile::from_synthetic(synth::generate_dataset(spec));
  nlohmann::json good = to_json(file);
  good["boards"][0]["corners"].erase(0);
  write_json_file(p.string(), good);
  CHECK_THROWS_AS(load_dataset(p.string()), Error);
}

TEST_CASE("corner ordering validation rejects shuffled rows") {
  synth::ScenarioSpec spec = synth::preset("unity-pinhole");
  const DatasetFile file =
      DatasetFile::from_synthetic(synth::generate_dataset(spec));
  nlohmann::json doc = to_json(file);
  // Swap two corners of board 0; the row is no longer monotone.
  std::swap(doc["boards"][0]["corners"][0], doc["boards"][0]["corners"][10]);
  const fs::path p = tmp_dir() / "shuffled.json";
  write_json_file(p.string(), doc);
  CHECK_THROWS_AS(load_dataset(p.string()), Error);
}

TEST_CASE("calibration JSON round trip preserves the result") {
  synth::ScenarioSpec spec = synth::preset("unity-pinhole");
  spec.poses.resize(6);  // keep the test fast
  const DatasetFile file =
      DatasetFile::from_synthetic(synth::generate_dataset(spec));
  const CalibrationResult result = run_calibration(file);

  const fs::path p = tmp_dir() / "calibration.json";
  save_calibration(p.string(), result);
  const CalibrationResult back = load_calibration(p.string());

  CHECK(back.method == "simplified");
  REQUIRE(back.simplified.has_value());
  CHECK(back.simplified->intrinsics.f ==
        doctest::Approx(result.simplified->intrinsics.f).epsilon(1e-12));
  CHECK((back.simplified->intrinsics.principal_point -
         result.simplified->intrinsics.principal_point)
            .norm() < 1e-12);
  REQUIRE(back.poses.size() == result.poses.size());
  for (size_t i = 0; i < back.poses.size(); ++i) {
    CHECK((back.poses[i].R - result.poses[i].R).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((back.poses[i].t - result.poses[i].t).cwiseAbs().maxCoeff() < 1e-12);
  }
  REQUIRE(back.virtual_camera.has_value());
  // The stored GP-camera must predict identically after the round trip.
  geometry::Points2 probe(3, 2);
  probe << 1000, 800, 2000, 1100, 2500, 1500;
  const MappedPoints a = result.virtual_camera->map_points(probe);
  const MappedPoints b = back.virtual_camera->map_points(probe);
  CHECK((a.xy - b.xy).cwiseAbs().maxCoeff() < 1e-12);

  const nlohmann::json doc = read_json_file(p.string());
  CHECK(doc.at("schema").get<std::string>() == "gpcam-calibration/1");
}

TEST_CASE("evaluation writer emits JSON plus a CSV table") {
  synth::ScenarioSpec spec = synth::preset("unity-pinhole");
  spec.poses.resize(5);
  const DatasetFile file =
      DatasetFile::from_synthetic(synth::generate_dataset(spec));
  const CalibrationResult cal = run_calibration(file);
  const EvaluationResult ev = run_evaluation(file, cal);

  const fs::path pj = tmp_dir() / "eval.json";
  const fs::path pc = tmp_dir() / "eval.csv";
  std::vector<std::string> ids;
  for (const auto& b : file.boards) ids.push_back(b.board_id);
  save_evaluation(pj.string(), pc.string(), ev, ids);

  const nlohmann::json doc = read_json_file(pj.string());
  CHECK(doc.at("schema").get<std::string>() == "gpcam-evaluation/1");
  CHECK(doc.contains("collinearity"));
  CHECK(doc.contains("reprojection_error"));
  CHECK(doc.contains("ray_bundle"));

  std::ifstream csv(pc);
  REQUIRE(csv.good());
  std::string header;
  std::getline(csv, header);
  CHECK(header.find("record") != std::string::npos);
  int lines = 0;
  for (std::string line; std::getline(csv, line);)
    if (!line.empty()) ++lines;
  CHECK(lines >= 5);  // at least one row per board
}

TEST_CASE("scenario JSON accepts presets with overrides") {
  nlohmann::json doc;
  doc["preset"] = "unity-barrel";
  doc["noise_sigma"] = 0.2;
  doc["seed"] = 123;
  const synth::ScenarioSpec spec = scenario_from_json(doc);
  CHECK(spec.noise_sigma == doctest::Approx(0.2));
  CHECK(spec.seed == 123);
  CHECK(spec.width == 3840);
  CHECK(std::holds_alternative<synth::RadialDistortion>(spec.distortion));

  nlohmann::json bad;
  bad["preset"] = "bogus";
  CHECK_THROWS_AS(scenario_from_json(bad), Error);
}
