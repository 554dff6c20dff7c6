// SPDX-License-Identifier: Apache-2.0
#include "shadowpose/report.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "shadowpose/plot.hpp"
#include "shadowpose/png_io.hpp"

namespace fs = std::filesystem;

namespace shadowpose {

std::vector<EvalAggregate> parse_aggregates_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open CSV '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line))
    throw ParseError("CSV '" + path.string() + "' is empty");
  if (line.rfind("condition,comparison,images,N_c,N_e,N_te,DR_mean,SmAP_mean", 0) != 0)
    throw ParseError("CSV '" + path.string() + "' has an unexpected header: " + line);
  std::vector<EvalAggregate> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 8)
      throw ParseError("CSV row has " + std::to_string(fields.size()) +
                       " fields, expected 8: " + line);
    EvalAggregate a;
    a.condition = fields[0];
    a.comparison = fields[1];
    a.images = std::stoi(fields[2]);
    a.n_c = std::stoll(fields[3]);
    a.n_e = std::stoll(fields[4]);
    a.n_te = std::stoll(fields[5]);
    a.dr_mean = std::stod(fields[6]);
    a.smap_mean = std::stod(fields[7]);
    out.push_back(std::move(a));
  }
  return out;
}

ReportOutcome write_report(const std::vector<EvalAggregate>& aggregates,
                           const fs::path& out_dir) {
  if (aggregates.empty()) throw ValidationError("report: no evaluation aggregates");
  fs::create_directories(out_dir);

  std::vector<EvalAggregate> sorted = aggregates;
  std::sort(sorted.begin(), sorted.end(), [](const EvalAggregate& a, const EvalAggregate& b) {
    if (a.condition != b.condition) return a.condition < b.condition;
    return a.comparison < b.comparison;
  });

  ReportOutcome outcome;
  outcome.csv = out_dir / "report.csv";
  {
    EvalReport tmp;
    tmp.aggregates = sorted;
    std::ofstream out(outcome.csv);
    if (!out) throw IoError("cannot write '" + outcome.csv.string() + "'");
    out << tmp.to_csv();
  }

  std::vector<std::string> conditions;
  std::set<std::string> comparisons;
  for (const auto& a : sorted) {
    if (std::find(conditions.begin(), conditions.end(), a.condition) == conditions.end())
      conditions.push_back(a.condition);
    comparisons.insert(a.comparison);
  }

  const auto lookup = [&](const std::string& cond, const std::string& comp,
                          bool smap) -> double {
    for (const auto& a : sorted)
      if (a.condition == cond && a.comparison == comp)
        return smap ? a.smap_mean : a.dr_mean;
    return std::numeric_limits<double>::quiet_NaN();
  };

  const std::vector<std::array<double, 3>> palette = {
      {0.45, 0.45, 0.45}, {0.90, 0.55, 0.15}, {0.25, 0.45, 0.80}};
  for (const bool smap : {false, true}) {
    std::vector<BarSeries> series;
    std::size_t color = 0;
    for (const auto& comp : comparisons) {
      BarSeries s;
      s.name = comp;
      s.color = palette[color++ % palette.size()];
      for (const auto& cond : conditions) s.values.push_back(lookup(cond, comp, smap));
      series.push_back(std::move(s));
    }
    ImageTensor canvas;
    const auto absent = render_grouped_bars(
        canvas, smap ? "SMAP BY CONDITION" : "DETECTION RATE BY CONDITION", conditions,
        series);
    for (const auto& a : absent)
      outcome.warnings.push_back(std::string(smap ? "smap" : "dr") + ": no data for " + a);
    const fs::path png = out_dir / (smap ? "smap.png" : "dr.png");
    write_png(png, canvas);
    outcome.plots.push_back(png);
  }
  return outcome;
}

}  // namespace shadowpose
