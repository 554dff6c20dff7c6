// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "shadowpose/common.hpp"

namespace shadowpose {

struct Keypoint {
  int part_id = 0;
  double x = 0.0;
  double y = 0.0;
  double confidence = 0.0;  // 0 means the part was not detected

  bool present() const { return confidence > 0.0; }
};

struct Skeleton {
  int person_id = 0;
  std::vector<Keypoint> keypoints;  // one slot per body part, fixed order

  long long present_count() const {
    long long n = 0;
    for (const auto& k : keypoints)
      if (k.present()) ++n;
    return n;
  }
  // Mean of present keypoints; nullopt when none are present.
  std::optional<std::pair<double, double>> centroid() const;
};

struct MatchConfig {
  double distance_threshold = 10.0;  // pixels; distance == threshold counts

  void validate() const {
    if (!(distance_threshold > 0.0))
      throw ValidationError("MatchConfig.distance_threshold must be > 0");
  }
};

// Parses the de-facto pose-estimator output,
// {"people":[{"pose_keypoints_2d":[x1,y1,c1, ...]}]}; the part count comes
// from the array length. Zero-confidence triples become absent keypoints.
std::vector<Skeleton> parse_pose_json(const std::string& text);
std::vector<Skeleton> load_pose_json(const std::filesystem::path& path);

long long present_keypoints(const std::vector<Skeleton>& skeletons);

// N_e / N_c over present keypoints; requires N_c > 0.
double detection_rate(const std::vector<Skeleton>& enh,
                      const std::vector<Skeleton>& clear);

// Greedy nearest-centroid pairing between the two sets (guard for
// multi-person frames; single-actor scenes pair trivially).
std::vector<std::pair<std::size_t, std::size_t>> pair_skeletons(
    const std::vector<Skeleton>& enh, const std::vector<Skeleton>& clear);

struct SmapCounts {
  long long n_e = 0;
  long long n_te = 0;
};

SmapCounts smap_counts(const std::vector<Skeleton>& enh,
                       const std::vector<Skeleton>& clear, const MatchConfig& m);

// N_te / N_e; a keypoint is precise when its same-part counterpart in the
// paired clear skeleton lies within the threshold (inclusive). Requires N_e > 0.
double smap(const std::vector<Skeleton>& enh, const std::vector<Skeleton>& clear,
            const MatchConfig& m);

}  // namespace shadowpose
