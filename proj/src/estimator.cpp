// SPDX-License-Identifier: Apache-2.0
#include "shadowpose/estimator.hpp"

#include <array>
#include <cstdio>
#include <cstdlib>

namespace fs = std::filesystem;

namespace shadowpose {

EstimatorConfig EstimatorConfig::parse(const std::string& spec) {
  EstimatorConfig cfg;
  if (spec.rfind("external:", 0) == 0) {
    cfg.mode = Mode::external;
    cfg.path = spec.substr(9);
  } else if (spec.rfind("mock:", 0) == 0) {
    cfg.mode = Mode::mock;
    cfg.path = spec.substr(5);
  } else {
    throw ValidationError("estimator spec must be external:<path> or mock:<fixtures>, got '" +
                          spec + "'");
  }
  if (cfg.path.empty()) throw ValidationError("estimator spec has an empty path");
  return cfg;
}

std::string EstimatorConfig::to_string() const {
  return (mode == Mode::external ? "external:" : "mock:") + path;
}

PoseEstimator::PoseEstimator(EstimatorConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.mode == EstimatorConfig::Mode::mock && !fs::is_directory(cfg_.path))
    throw ValidationError("mock estimator fixtures dir '" + cfg_.path +
                          "' does not exist");
}

namespace {

std::vector<Skeleton> run_mock(const fs::path& fixtures, const fs::path& image) {
  const std::string stem = image.stem().string();
  const fs::path with_suffix = fixtures / (stem + "_keypoints.json");
  const fs::path bare = fixtures / (stem + ".json");
  if (fs::exists(with_suffix)) return load_pose_json(with_suffix);
  if (fs::exists(bare)) return load_pose_json(bare);
  throw IoError("mock estimator: no fixture '" + with_suffix.string() + "' or '" +
                bare.string() + "'");
}

std::vector<Skeleton> run_external(const std::string& exe, const fs::path& image) {
  if (!fs::exists(image)) throw IoError("estimator input '" + image.string() + "' missing");
  // stage the single image so --image_dir sees exactly one file
  const fs::path work =
      fs::temp_directory_path() /
      ("shadowpose_pose_" + std::to_string(splitmix64(fnv1a64(image.string()))));
  fs::remove_all(work);
  fs::create_directories(work / "in");
  fs::create_directories(work / "out");
  fs::copy_file(image, work / "in" / image.filename());

  const std::string cmd = "'" + exe + "' --image_dir '" + (work / "in").string() +
                          "' --write_json '" + (work / "out").string() +
                          "' --display 0 --render_pose 0 2>&1";
  std::string output;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) throw IoError("failed to launch estimator '" + exe + "'");
  std::array<char, 4096> buf;
  while (std::fgets(buf.data(), buf.size(), pipe)) output += buf.data();
  const int rc = pclose(pipe);
  const int exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  if (exit_code != 0) {
    fs::remove_all(work);
    if (output.size() > 2000) output = output.substr(output.size() - 2000);
    throw IoError("estimator '" + exe + "' exited with code " +
                  std::to_string(exit_code) + "; output:\n" + output);
  }
  const fs::path expected = work / "out" / (image.stem().string() + "_keypoints.json");
  if (!fs::exists(expected)) {
    fs::remove_all(work);
    throw IoError("estimator produced no JSON at '" + expected.string() + "'");
  }
  auto skeletons = load_pose_json(expected);
  fs::remove_all(work);
  return skeletons;
}

}  // namespace

std::vector<Skeleton> PoseEstimator::run(const fs::path& image) const {
  if (cfg_.mode == EstimatorConfig::Mode::mock)
    return run_mock(cfg_.path, image);
  return run_external(cfg_.path, image);
}

}  // namespace shadowpose
