// SPDX-License-Identifier: Apache-2.0
#include "shadowpose/evaluate.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>

namespace fs = std::filesystem;

namespace shadowpose {

namespace {

EvalRow make_row(const std::string& id, const std::string& condition,
                 const std::string& comparison, const std::vector<Skeleton>& test,
                 const std::vector<Skeleton>& clear, const MatchConfig& match) {
  EvalRow row;
  row.id = id;
  row.condition = condition;
  row.comparison = comparison;
  row.n_c = present_keypoints(clear);
  row.n_e = present_keypoints(test);
  if (row.n_c == 0) {
    row.excluded = true;
    row.note = "no clear detections (DR undefined)";
    return row;
  }
  row.dr = static_cast<double>(row.n_e) / static_cast<double>(row.n_c);
  const SmapCounts counts = smap_counts(test, clear, match);
  row.n_te = counts.n_te;
  if (row.n_e == 0) {
    row.note = "no test detections (SmAP undefined)";
    row.smap = 0.0;
  } else {
    row.smap = static_cast<double>(row.n_te) / static_cast<double>(row.n_e);
  }
  return row;
}

}  // namespace

EvalReport evaluate_dataset(const DatasetManifest& manifest, const PoseEstimator& est,
                            const MatchConfig& match,
                            const std::optional<fs::path>& enhanced_dir) {
  match.validate();
  if (manifest.entries.empty()) throw ValidationError("evaluate: manifest has no entries");
  EvalReport report;
  for (const auto& entry : manifest.entries) {
    std::vector<Skeleton> clear;
    try {
      clear = est.run(manifest.resolve(entry.clear));
    } catch (const std::exception& err) {
      ++report.failures;
      EvalRow row;
      row.id = entry.id;
      row.condition = entry.condition();
      row.comparison = "degraded";
      row.excluded = true;
      row.note = std::string("estimator failed on clear image: ") + err.what();
      report.rows.push_back(row);
      continue;
    }

    const auto add_comparison = [&](const std::string& comparison, const fs::path& img) {
      try {
        const auto skeletons = est.run(img);
        report.rows.push_back(
            make_row(entry.id, entry.condition(), comparison, skeletons, clear, match));
      } catch (const std::exception& err) {
        ++report.failures;
        EvalRow row;
        row.id = entry.id;
        row.condition = entry.condition();
        row.comparison = comparison;
        row.excluded = true;
        row.note = std::string("estimator failed: ") + err.what();
        report.rows.push_back(row);
      }
    };

    add_comparison("degraded", manifest.resolve(entry.degraded));
    if (enhanced_dir) {
      const fs::path enhanced =
          *enhanced_dir / fs::path(entry.degraded).filename();
      add_comparison("enhanced", enhanced);
    }
  }

  // aggregate means per (condition, comparison) over defined rows
  std::map<std::pair<std::string, std::string>, EvalAggregate> groups;
  std::map<std::pair<std::string, std::string>, std::pair<double, int>> smap_acc;
  for (const auto& row : report.rows) {
    if (row.excluded) continue;
    auto key = std::make_pair(row.condition, row.comparison);
    auto& agg = groups[key];
    agg.condition = row.condition;
    agg.comparison = row.comparison;
    agg.images += 1;
    agg.n_c += row.n_c;
    agg.n_e += row.n_e;
    agg.n_te += row.n_te;
    agg.dr_mean += row.dr;
    if (row.n_e > 0) {
      smap_acc[key].first += row.smap;
      smap_acc[key].second += 1;
    }
  }
  for (auto& [key, agg] : groups) {
    agg.dr_mean /= static_cast<double>(agg.images);
    const auto& [ssum, scount] = smap_acc[key];
    agg.smap_mean = scount > 0 ? ssum / scount : 0.0;
    report.aggregates.push_back(agg);
  }
  std::sort(report.aggregates.begin(), report.aggregates.end(),
            [](const EvalAggregate& a, const EvalAggregate& b) {
              if (a.condition != b.condition) return a.condition < b.condition;
              return a.comparison < b.comparison;
            });
  return report;
}

std::string EvalReport::to_csv() const {
  std::string out = "condition,comparison,images,N_c,N_e,N_te,DR_mean,SmAP_mean\n";
  char line[256];
  for (const auto& a : aggregates) {
    std::snprintf(line, sizeof line, "%s,%s,%d,%lld,%lld,%lld,%.6f,%.6f\n",
                  a.condition.c_str(), a.comparison.c_str(), a.images, a.n_c, a.n_e,
                  a.n_te, a.dr_mean, a.smap_mean);
    out += line;
  }
  return out;
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json j;
  j["seed"] = seed;
  j["failures"] = failures;
  j["rows"] = nlohmann::json::array();
  for (const auto& r : rows)
    j["rows"].push_back({{"id", r.id},
                         {"condition", r.condition},
                         {"comparison", r.comparison},
                         {"N_c", r.n_c},
                         {"N_e", r.n_e},
                         {"N_te", r.n_te},
                         {"DR", r.dr},
                         {"SmAP", r.smap},
                         {"excluded", r.excluded},
                         {"note", r.note}});
  j["aggregates"] = nlohmann::json::array();
  for (const auto& a : aggregates)
    j["aggregates"].push_back({{"condition", a.condition},
                               {"comparison", a.comparison},
                               {"images", a.images},
                               {"N_c", a.n_c},
                               {"N_e", a.n_e},
                               {"N_te", a.n_te},
                               {"DR_mean", a.dr_mean},
                               {"SmAP_mean", a.smap_mean}});
  return j;
}

EvalReport EvalReport::from_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open eval report '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& err) {
    throw ParseError("eval report '" + path.string() + "': " + err.what());
  }
  EvalReport r;
  r.seed = j.value("seed", 0ULL);
  r.failures = j.value("failures", 0);
  for (const auto& jr : j.value("rows", nlohmann::json::array())) {
    EvalRow row;
    row.id = jr.value("id", "");
    row.condition = jr.value("condition", "");
    row.comparison = jr.value("comparison", "");
    row.n_c = jr.value("N_c", 0LL);
    row.n_e = jr.value("N_e", 0LL);
    row.n_te = jr.value("N_te", 0LL);
    row.dr = jr.value("DR", 0.0);
    row.smap = jr.value("SmAP", 0.0);
    row.excluded = jr.value("excluded", false);
    row.note = jr.value("note", "");
    r.rows.push_back(std::move(row));
  }
  for (const auto& ja : j.value("aggregates", nlohmann::json::array())) {
    EvalAggregate a;
    a.condition = ja.value("condition", "");
    a.comparison = ja.value("comparison", "");
    a.images = ja.value("images", 0);
    a.n_c = ja.value("N_c", 0LL);
    a.n_e = ja.value("N_e", 0LL);
    a.n_te = ja.value("N_te", 0LL);
    a.dr_mean = ja.value("DR_mean", 0.0);
    a.smap_mean = ja.value("SmAP_mean", 0.0);
    r.aggregates.push_back(std::move(a));
  }
  return r;
}

void EvalReport::write(const fs::path& dir, const std::string& stem) const {
  fs::create_directories(dir);
  {
    std::ofstream out(dir / (stem + ".csv"));
    if (!out) throw IoError("cannot write eval CSV");
    out << to_csv();
  }
  {
    std::ofstream out(dir / (stem + ".json"));
    if (!out) throw IoError("cannot write eval JSON");
    out << to_json().dump(2) << "\n";
  }
}

}  // namespace shadowpose
