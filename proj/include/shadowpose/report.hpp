// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "shadowpose/evaluate.hpp"

namespace shadowpose {

struct ReportOutcome {
  std::filesystem::path csv;
  std::vector<std::filesystem::path> plots;
  std::vector<std::string> warnings;  // absent groups, plotted as missing
};

// Parses the pinned aggregate CSV layout back into aggregates.
std::vector<EvalAggregate> parse_aggregates_csv(const std::filesystem::path& path);

// Merges aggregates from evaluation outputs, writes the canonical CSV and the
// derived grouped-bar plots (dr.png, smap.png) into out_dir.
ReportOutcome write_report(const std::vector<EvalAggregate>& aggregates,
                           const std::filesystem::path& out_dir);

}  // namespace shadowpose
