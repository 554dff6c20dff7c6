// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "shadowpose/image.hpp"
#include "shadowpose/synth.hpp"

namespace shadowpose {

struct ManifestEntry {
  std::string id;
  std::string clear;     // path relative to the manifest location
  std::string degraded;  // path relative to the manifest location
  nlohmann::json params;

  std::string condition() const {
    return params.is_object() ? params.value("condition", std::string("default"))
                              : std::string("default");
  }
};

struct DatasetManifest {
  int schema_version = 1;
  std::vector<ManifestEntry> entries;
  std::filesystem::path base_dir;      // directory holding the manifest file
  std::vector<std::string> skipped;    // ids/paths skipped during generation

  std::filesystem::path resolve(const std::string& rel) const {
    std::filesystem::path p(rel);
    return p.is_absolute() ? p : base_dir / p;
  }
};

struct PairedSample {
  std::string id;
  ImageTensor clear;
  ImageTensor degraded;
};

// One degradation to apply to every clear image; label becomes the
// grouping condition in evaluation reports.
struct DegradationSpec {
  std::string label;
  std::variant<FilmFilterParams, HazeParams> params;

  nlohmann::json to_json() const;
  static DegradationSpec from_json(const nlohmann::json& j);
  ImageTensor apply(const ImageTensor& clear) const;
};

DatasetManifest generate_dataset(const std::filesystem::path& clear_dir,
                                 const std::vector<DegradationSpec>& specs,
                                 const std::filesystem::path& out_dir);

DatasetManifest load_manifest(const std::filesystem::path& manifest_path);
void save_manifest(const DatasetManifest& m, const std::filesystem::path& manifest_path);

// Decode every pair, in manifest order, validating shapes.
std::vector<PairedSample> ingest_paired_dataset(const std::filesystem::path& manifest_path);

// Hand-paired data convention: <root>/clear/<name>.<ext> + <root>/shadow/<name>.<ext>.
DatasetManifest manifest_from_paired_dir(const std::filesystem::path& root);

}  // namespace shadowpose
