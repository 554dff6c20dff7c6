// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "shadowpose/losses.hpp"
#include "shadowpose/net.hpp"

namespace shadowpose {

struct TrainConfig {
  std::int64_t steps = 500;
  int batch_size = 8;
  double learning_rate = 1e-4;
  std::string optimizer = "adaptive-moment";  // or "sgd-momentum"
  std::uint64_t seed = 0;
  LossToggles toggles;
  std::int64_t eval_every = 100;
  std::string dataset;                   // manifest path
  std::string resize_policy = "scale";   // or "center-crop"

  // artifact knobs beyond the core hyperparameters
  int holdout_count = 0;                 // last N manifest entries held out
  std::string extractor = "stub";        // identity | stub | stub:<seed> | file:<path>
  bool normalize_feature_norm = false;
  bool normalize_edge_norm = false;
  double grad_clip_norm = 5.0;
  NetworkConfig network;
  std::string out_dir = "train_out";

  void validate() const;
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
  static TrainConfig load_file(const std::filesystem::path& path);
};

struct TrainStepRecord {
  std::int64_t step = 0;
  LossBreakdown loss;
  double wall_ms = 0.0;
};

struct EvalSnapshot {
  std::int64_t step = 0;
  double holdout_mean_ssim = 0.0;
};

struct TrainLog {
  std::vector<TrainStepRecord> steps;
  std::vector<EvalSnapshot> evals;
  void write_ndjson(const std::filesystem::path& path) const;
};

struct TrainResult {
  std::filesystem::path checkpoint_path;
  TrainLog log;
  double first_total = 0.0;
  double final_total = 0.0;
  std::int64_t last_step = 0;
  bool aborted = false;
  std::string abort_reason;
};

// Deterministic batch schedule: sample index for global position
// step*batch+i, reshuffled per epoch from the seed alone. Pure function, so
// resumed runs reproduce the original sequence exactly.
std::size_t schedule_index(std::uint64_t seed, std::int64_t global_pos, std::size_t n);

// Runs cfg.steps optimizer steps from a fresh initialization.
TrainResult train(const TrainConfig& cfg);

// Restores weights, optimizer state and step counter from the checkpoint and
// continues to cfg.steps. Refuses architecture or config mismatches
// (steps/eval_every may differ).
TrainResult resume(const std::filesystem::path& checkpoint, const TrainConfig& cfg);

}  // namespace shadowpose
