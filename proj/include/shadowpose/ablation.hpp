// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "shadowpose/train.hpp"

namespace shadowpose {

// Four loss-term variants trained with a shared seed: the full objective and
// one variant per removed term.
struct AblationVariant {
  std::string name;     // full | no_sl | no_pl | no_el
  LossToggles toggles;
  std::string status;   // ok | aborted: ... | failed: ...
  std::optional<double> holdout_mean_ssim;
  std::optional<double> final_total;
  std::optional<double> dr_mean;    // only with an estimator
  std::optional<double> smap_mean;  // only with an estimator
};

struct AblationReport {
  std::vector<AblationVariant> variants;  // always 4, fixed order
  std::filesystem::path csv;              // metric rows x variant columns
  std::filesystem::path json;

  bool all_ok() const {
    for (const auto& v : variants)
      if (v.status != "ok") return false;
    return true;
  }
};

// Trains the 4 variants from base_cfg (toggles overridden per variant, outputs
// under out_dir/<variant>); when estimator_spec is set, additionally enhances
// the dataset with each variant and evaluates DR / SmAP means.
AblationReport run_ablation(const TrainConfig& base_cfg,
                            const std::string& estimator_spec,
                            const std::filesystem::path& out_dir);

}  // namespace shadowpose
