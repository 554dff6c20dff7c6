// SPDX-License-Identifier: Apache-2.0
#include "shadowpose/pose.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

namespace shadowpose {

std::optional<std::pair<double, double>> Skeleton::centroid() const {
  double sx = 0.0, sy = 0.0;
  long long n = 0;
  for (const auto& k : keypoints) {
    if (!k.present()) continue;
    sx += k.x;
    sy += k.y;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return std::make_pair(sx / static_cast<double>(n), sy / static_cast<double>(n));
}

std::vector<Skeleton> parse_pose_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& err) {
    throw ParseError("pose JSON parse error at byte " + std::to_string(err.byte) +
                     ": " + err.what());
  }
  if (!j.is_object() || !j.contains("people") || !j.at("people").is_array())
    throw ParseError("pose JSON: expected an object with a 'people' array");
  std::vector<Skeleton> skeletons;
  int person_id = 0;
  for (const auto& person : j.at("people")) {
    const auto& arr = person.at("pose_keypoints_2d");
    if (!arr.is_array() || arr.size() % 3 != 0)
      throw ParseError("pose JSON: pose_keypoints_2d length must be a multiple of 3");
    Skeleton s;
    s.person_id = person_id++;
    s.keypoints.reserve(arr.size() / 3);
    for (std::size_t i = 0; i < arr.size(); i += 3) {
      Keypoint k;
      k.part_id = static_cast<int>(i / 3);
      k.x = arr[i].get<double>();
      k.y = arr[i + 1].get<double>();
      k.confidence = arr[i + 2].get<double>();
      s.keypoints.push_back(k);
    }
    skeletons.push_back(std::move(s));
  }
  return skeletons;
}

std::vector<Skeleton> load_pose_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open pose JSON '" + path.string() + "'");
  const std::string text(std::istreambuf_iterator<char>(in), {});
  try {
    return parse_pose_json(text);
  } catch (const ParseError& err) {
    throw ParseError(path.string() + ": " + err.what());
  }
}

long long present_keypoints(const std::vector<Skeleton>& skeletons) {
  long long n = 0;
  for (const auto& s : skeletons) n += s.present_count();
  return n;
}

double detection_rate(const std::vector<Skeleton>& enh,
                      const std::vector<Skeleton>& clear) {
  const long long n_c = present_keypoints(clear);
  if (n_c == 0)
    throw ValidationError("detection_rate undefined: no keypoints in the clear image");
  const long long n_e = present_keypoints(enh);
  return static_cast<double>(n_e) / static_cast<double>(n_c);
}

std::vector<std::pair<std::size_t, std::size_t>> pair_skeletons(
    const std::vector<Skeleton>& enh, const std::vector<Skeleton>& clear) {
  struct Candidate {
    double dist;
    std::size_t i, j;
  };
  std::vector<Candidate> candidates;
  for (std::size_t i = 0; i < enh.size(); ++i) {
    const auto ce = enh[i].centroid();
    if (!ce) continue;
    for (std::size_t j = 0; j < clear.size(); ++j) {
      const auto cc = clear[j].centroid();
      if (!cc) continue;
      const double dx = ce->first - cc->first, dy = ce->second - cc->second;
      candidates.push_back({std::sqrt(dx * dx + dy * dy), i, j});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.dist != b.dist) return a.dist < b.dist;
    if (a.i != b.i) return a.i < b.i;
    return a.j < b.j;
  });
  std::vector<bool> used_e(enh.size(), false), used_c(clear.size(), false);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (const auto& c : candidates) {
    if (used_e[c.i] || used_c[c.j]) continue;
    used_e[c.i] = true;
    used_c[c.j] = true;
    pairs.emplace_back(c.i, c.j);
  }
  return pairs;
}

SmapCounts smap_counts(const std::vector<Skeleton>& enh,
                       const std::vector<Skeleton>& clear, const MatchConfig& m) {
  m.validate();
  SmapCounts counts;
  counts.n_e = present_keypoints(enh);
  for (const auto& [ei, ci] : pair_skeletons(enh, clear)) {
    const auto& se = enh[ei];
    const auto& sc = clear[ci];
    const std::size_t parts = std::min(se.keypoints.size(), sc.keypoints.size());
    for (std::size_t p = 0; p < parts; ++p) {
      const auto& ke = se.keypoints[p];
      const auto& kc = sc.keypoints[p];
      if (!ke.present() || !kc.present()) continue;
      const double dx = ke.x - kc.x, dy = ke.y - kc.y;
      if (std::sqrt(dx * dx + dy * dy) <= m.distance_threshold) ++counts.n_te;
    }
  }
  return counts;
}

double smap(const std::vector<Skeleton>& enh, const std::vector<Skeleton>& clear,
            const MatchConfig& m) {
  const SmapCounts counts = smap_counts(enh, clear, m);
  if (counts.n_e == 0)
    throw ValidationError("smap undefined: no keypoints detected in the test image");
  return static_cast<double>(counts.n_te) / static_cast<double>(counts.n_e);
}

}  // namespace shadowpose
