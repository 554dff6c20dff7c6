// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "shadowpose/pose.hpp"

namespace shadowpose {

// Adapter over an external pose estimator. Two modes:
//   external:<binary>  invokes the binary per image with OpenPose-style flags
//                      (--image_dir, --write_json, --display 0 --render_pose 0)
//                      and reads its JSON output directory;
//   mock:<fixtures>    reads <fixtures>/<stem>_keypoints.json (or <stem>.json),
//                      keeping the suite runnable with no pose software.
struct EstimatorConfig {
  enum class Mode { external, mock };
  Mode mode = Mode::mock;
  std::string path;

  static EstimatorConfig parse(const std::string& spec);
  std::string to_string() const;
};

class PoseEstimator {
 public:
  explicit PoseEstimator(EstimatorConfig cfg);

  // Skeletons for one image; throws IoError with captured diagnostics on
  // estimator failure, ParseError on malformed JSON.
  std::vector<Skeleton> run(const std::filesystem::path& image) const;

  const EstimatorConfig& config() const { return cfg_; }

 private:
  EstimatorConfig cfg_;
};

}  // namespace shadowpose
