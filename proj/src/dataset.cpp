// SPDX-License-Identifier: Apache-2.0
#include "shadowpose/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "shadowpose/png_io.hpp"

namespace fs = std::filesystem;

namespace shadowpose {

nlohmann::json DegradationSpec::to_json() const {
  nlohmann::json j;
  if (std::holds_alternative<FilmFilterParams>(params)) {
    const auto& p = std::get<FilmFilterParams>(params);
    j["type"] = "film";
    j["layers"] = p.layers;
    j["blur_sigma"] = p.blur_sigma;
    j["scatter_alpha"] = p.scatter_alpha;
    j["contrast_gain"] = p.contrast_gain;
    j["light_color"] = p.light_color;
    j["seed"] = p.seed;
  } else {
    const auto& p = std::get<HazeParams>(params);
    j["type"] = "haze";
    j["atmospheric_light"] = p.atmospheric_light;
    j["transmission"] = p.transmission;
  }
  j["condition"] = label;
  return j;
}

DegradationSpec DegradationSpec::from_json(const nlohmann::json& j) {
  DegradationSpec spec;
  const std::string type = j.value("type", "");
  if (type == "film") {
    FilmFilterParams p;
    p.layers = j.value("layers", p.layers);
    p.blur_sigma = j.value("blur_sigma", p.blur_sigma);
    p.scatter_alpha = j.value("scatter_alpha", p.scatter_alpha);
    p.contrast_gain = j.value("contrast_gain", p.contrast_gain);
    if (j.contains("light_color")) p.light_color = j.at("light_color").get<std::array<double, 3>>();
    p.seed = j.value("seed", p.seed);
    p.validate();
    spec.params = p;
    spec.label = j.value("condition", "film-" + std::to_string(p.layers) + "layer");
  } else if (type == "haze") {
    HazeParams p;
    if (j.contains("atmospheric_light")) p.atmospheric_light = j.at("atmospheric_light").get<std::array<double, 3>>();
    p.transmission = j.value("transmission", p.transmission);
    p.validate();
    spec.params = p;
    char buf[32];
    std::snprintf(buf, sizeof buf, "haze-t%.2f", p.transmission);
    spec.label = j.value("condition", std::string(buf));
  } else {
    throw ValidationError("degradation spec: unknown type '" + type +
                          "' (expected 'film' or 'haze')");
  }
  return spec;
}

ImageTensor DegradationSpec::apply(const ImageTensor& clear) const {
  if (std::holds_alternative<FilmFilterParams>(params))
    return apply_film_filter(clear, std::get<FilmFilterParams>(params));
  return synthesize_haze(clear, std::get<HazeParams>(params));
}

namespace {

std::string relative_or_absolute(const fs::path& target, const fs::path& base) {
  std::error_code ec;
  const fs::path rel = fs::relative(target, base, ec);
  if (ec || rel.empty()) return target.generic_string();
  return rel.generic_string();
}

}  // namespace

DatasetManifest generate_dataset(const fs::path& clear_dir,
                                 const std::vector<DegradationSpec>& specs,
                                 const fs::path& out_dir) {
  if (!fs::is_directory(clear_dir))
    throw ValidationError("generate_dataset: clear_dir '" + clear_dir.string() +
                          "' is not a directory");
  if (specs.empty()) throw ValidationError("generate_dataset: no degradation specs");

  std::vector<fs::path> clears;
  for (const auto& e : fs::directory_iterator(clear_dir))
    if (e.is_regular_file() && e.path().extension() == ".png") clears.push_back(e.path());
  std::sort(clears.begin(), clears.end());
  if (clears.empty())
    throw ValidationError("generate_dataset: no .png images in '" + clear_dir.string() +
                          "'");

  fs::create_directories(out_dir / "degraded");
  DatasetManifest m;
  m.base_dir = out_dir;
  for (const auto& clear_path : clears) {
    ImageTensor clear;
    try {
      clear = read_png(clear_path);
    } catch (const IoError& err) {
      m.skipped.push_back(clear_path.generic_string() + ": " + err.what());
      continue;
    }
    if (clear.channels != 3) {
      m.skipped.push_back(clear_path.generic_string() + ": not a 3-channel image");
      continue;
    }
    for (const auto& spec : specs) {
      const std::string stem = clear_path.stem().string();
      ManifestEntry entry;
      entry.id = stem + "__" + spec.label;
      const std::string degraded_rel = "degraded/" + entry.id + ".png";
      write_png(out_dir / degraded_rel, spec.apply(clear));
      entry.clear = relative_or_absolute(clear_path, out_dir);
      entry.degraded = degraded_rel;
      entry.params = spec.to_json();
      m.entries.push_back(std::move(entry));
    }
  }
  save_manifest(m, out_dir / "manifest.json");
  return m;
}

void save_manifest(const DatasetManifest& m, const fs::path& manifest_path) {
  nlohmann::json j;
  j["schema_version"] = m.schema_version;
  j["entries"] = nlohmann::json::array();
  for (const auto& e : m.entries) {
    nlohmann::json je;
    je["id"] = e.id;
    je["clear"] = e.clear;
    je["degraded"] = e.degraded;
    je["params"] = e.params;
    j["entries"].push_back(std::move(je));
  }
  std::ofstream out(manifest_path);
  if (!out) throw IoError("cannot write manifest '" + manifest_path.string() + "'");
  out << j.dump(2) << "\n";
}

DatasetManifest load_manifest(const fs::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw IoError("cannot open manifest '" + manifest_path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& err) {
    throw ParseError("manifest '" + manifest_path.string() + "': " + err.what());
  }
  DatasetManifest m;
  m.schema_version = j.value("schema_version", 0);
  if (m.schema_version != 1)
    throw ValidationError("manifest '" + manifest_path.string() +
                          "': unsupported schema_version " +
                          std::to_string(m.schema_version));
  m.base_dir = manifest_path.parent_path();
  std::set<std::string> seen;
  for (const auto& je : j.at("entries")) {
    ManifestEntry e;
    e.id = je.at("id").get<std::string>();
    e.clear = je.at("clear").get<std::string>();
    e.degraded = je.at("degraded").get<std::string>();
    e.params = je.value("params", nlohmann::json::object());
    if (!seen.insert(e.id).second)
      throw ValidationError("manifest: duplicate sample id '" + e.id + "'");
    m.entries.push_back(std::move(e));
  }
  return m;
}

std::vector<PairedSample> ingest_paired_dataset(const fs::path& manifest_path) {
  const DatasetManifest m = load_manifest(manifest_path);
  std::vector<PairedSample> samples;
  samples.reserve(m.entries.size());
  for (const auto& e : m.entries) {
    PairedSample s;
    s.id = e.id;
    const fs::path clear_path = m.resolve(e.clear);
    const fs::path degraded_path = m.resolve(e.degraded);
    try {
      s.clear = read_png(clear_path);
      s.degraded = read_png(degraded_path);
    } catch (const IoError& err) {
      throw IoError("sample '" + e.id + "': " + err.what());
    }
    if (!s.clear.same_shape(s.degraded))
      throw ValidationError("sample '" + e.id + "': clear " + s.clear.shape_string() +
                            " and degraded " + s.degraded.shape_string() +
                            " shapes differ");
    samples.push_back(std::move(s));
  }
  return samples;
}

DatasetManifest manifest_from_paired_dir(const fs::path& root) {
  const fs::path clear_dir = root / "clear";
  const fs::path shadow_dir = root / "shadow";
  if (!fs::is_directory(clear_dir) || !fs::is_directory(shadow_dir))
    throw ValidationError("paired dir '" + root.string() +
                          "' must contain clear/ and shadow/ subdirectories");
  std::vector<fs::path> clears;
  for (const auto& e : fs::directory_iterator(clear_dir))
    if (e.is_regular_file()) clears.push_back(e.path());
  std::sort(clears.begin(), clears.end());

  DatasetManifest m;
  m.base_dir = root;
  for (const auto& c : clears) {
    const fs::path s = shadow_dir / c.filename();
    if (!fs::exists(s)) {
      m.skipped.push_back(c.filename().generic_string() + ": no shadow counterpart");
      continue;
    }
    ManifestEntry e;
    e.id = c.stem().string();
    e.clear = "clear/" + c.filename().generic_string();
    e.degraded = "shadow/" + c.filename().generic_string();
    e.params = {{"type", "captured"}, {"condition", "captured"}};
    m.entries.push_back(std::move(e));
  }
  if (m.entries.empty())
    throw ValidationError("paired dir '" + root.string() + "' has no matching pairs");
  return m;
}

}  // namespace shadowpose
