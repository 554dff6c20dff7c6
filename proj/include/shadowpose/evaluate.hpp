// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "shadowpose/dataset.hpp"
#include "shadowpose/estimator.hpp"

namespace shadowpose {

struct EvalRow {
  std::string id;
  std::string condition;
  std::string comparison;  // "degraded" or "enhanced", always vs clear
  long long n_c = 0, n_e = 0, n_te = 0;
  double dr = 0.0;
  double smap = 0.0;
  bool excluded = false;   // undefined ratio or estimator failure
  std::string note;
};

struct EvalAggregate {
  std::string condition;
  std::string comparison;
  int images = 0;          // rows with N_c > 0 entering the means
  long long n_c = 0, n_e = 0, n_te = 0;
  double dr_mean = 0.0;
  double smap_mean = 0.0;  // over images that also have N_e > 0
};

struct EvalReport {
  std::vector<EvalRow> rows;
  std::vector<EvalAggregate> aggregates;
  int failures = 0;  // estimator failures (excluded images)
  std::uint64_t seed = 0;

  // Pinned columns: condition,comparison,images,N_c,N_e,N_te,DR_mean,SmAP_mean
  std::string to_csv() const;
  nlohmann::json to_json() const;
  static EvalReport from_json_file(const std::filesystem::path& path);
  // Writes <stem>.csv and <stem>.json into dir.
  void write(const std::filesystem::path& dir, const std::string& stem) const;
};

// Runs the estimator over clear + degraded (+ enhanced, when a directory of
// enhanced images with matching basenames is supplied), computes per-image
// DR/SmAP against clear, and aggregates means per (condition, comparison).
EvalReport evaluate_dataset(const DatasetManifest& manifest, const PoseEstimator& est,
                            const MatchConfig& match,
                            const std::optional<std::filesystem::path>& enhanced_dir);

}  // namespace shadowpose
