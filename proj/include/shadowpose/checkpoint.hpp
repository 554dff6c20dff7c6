// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "shadowpose/net.hpp"

namespace shadowpose {

// Single-file archive: an 11-byte magic, a JSON header (config, fingerprint,
// seed, step, loss-history tail, optimizer description), then named raw
// float64 tensors. Byte layout is documented in docs/checkpoint_format.md.
inline constexpr char kCheckpointMagic[] = "SPOSECKPT1\n";
inline constexpr int kCheckpointSchemaVersion = 1;

struct CheckpointMeta {
  std::uint64_t seed = 0;
  std::int64_t step = 0;
  std::vector<double> loss_tail;   // most recent total losses, newest last
  nlohmann::json optimizer;        // type + hyperparameters (state in tensors)
  nlohmann::json train_config;     // free-form provenance record
};

struct NamedTensor {
  std::vector<std::uint64_t> dims;
  std::vector<double> data;
};

struct CheckpointArchive {
  NetworkConfig config;
  std::string fingerprint;
  CheckpointMeta meta;
  std::map<std::string, NamedTensor> tensors;
};

void save_checkpoint(const std::filesystem::path& path, const Network& net,
                     const CheckpointMeta& meta,
                     const std::map<std::string, NamedTensor>& extra = {});

// Reads and verifies: magic, schema, and that the embedded fingerprint
// matches the embedded config. If expect_config is given, additionally
// refuses on architecture mismatch, printing both fingerprints.
CheckpointArchive read_checkpoint(const std::filesystem::path& path,
                                  const std::optional<NetworkConfig>& expect_config = {});

// Builds the network described by the archive and installs its weights.
Network network_from_archive(const CheckpointArchive& archive);

}  // namespace shadowpose
