// SPDX-License-Identifier: Apache-2.0
#include "shadowpose/ablation.hpp"

#include <fstream>

#include <json.hpp>

#include "shadowpose/checkpoint.hpp"
#include "shadowpose/evaluate.hpp"
#include "shadowpose/kernels.hpp"
#include "shadowpose/png_io.hpp"

namespace fs = std::filesystem;

namespace shadowpose {

namespace {

void enhance_manifest(const Network& net, const DatasetManifest& manifest,
                      const fs::path& out_dir) {
  fs::create_directories(out_dir);
  const int th = net.config().input_height, tw = net.config().input_width;
  for (const auto& entry : manifest.entries) {
    const ImageTensor src = read_png(manifest.resolve(entry.degraded));
    const ImageTensor resized =
        (src.height == th && src.width == tw) ? src
                                              : kernels::resize_bilinear(src, th, tw);
    ImageTensor e = enhance_image(net, resized);
    if (e.height != src.height || e.width != src.width)
      e = kernels::resize_bilinear(e, src.height, src.width);
    e.clamp01();
    write_png(out_dir / fs::path(entry.degraded).filename(), e);
  }
}

}  // namespace

AblationReport run_ablation(const TrainConfig& base_cfg,
                            const std::string& estimator_spec,
                            const fs::path& out_dir) {
  AblationReport report;
  report.variants = {
      {"full", {true, true, true}, "", {}, {}, {}, {}},
      {"no_sl", {false, true, true}, "", {}, {}, {}, {}},
      {"no_pl", {true, false, true}, "", {}, {}, {}, {}},
      {"no_el", {true, true, false}, "", {}, {}, {}, {}},
  };

  for (auto& variant : report.variants) {
    TrainConfig cfg = base_cfg;
    cfg.toggles = variant.toggles;
    if (cfg.holdout_count < 1) cfg.holdout_count = 1;
    cfg.out_dir = (out_dir / variant.name).string();
    try {
      const TrainResult r = train(cfg);
      variant.status = r.aborted ? ("aborted: " + r.abort_reason) : "ok";
      variant.final_total = r.final_total;
      if (!r.log.evals.empty())
        variant.holdout_mean_ssim = r.log.evals.back().holdout_mean_ssim;
      if (!r.aborted && !estimator_spec.empty()) {
        const DatasetManifest manifest = load_manifest(cfg.dataset);
        const CheckpointArchive archive = read_checkpoint(r.checkpoint_path);
        const Network net = network_from_archive(archive);
        const fs::path enhanced_dir = fs::path(cfg.out_dir) / "enhanced";
        enhance_manifest(net, manifest, enhanced_dir);
        const PoseEstimator estimator(EstimatorConfig::parse(estimator_spec));
        const EvalReport er =
            evaluate_dataset(manifest, estimator, MatchConfig{}, enhanced_dir);
        double dr = 0.0, smap = 0.0;
        int n = 0;
        for (const auto& row : er.rows) {
          if (row.excluded || row.comparison != "enhanced") continue;
          dr += row.dr;
          smap += row.smap;
          ++n;
        }
        if (n > 0) {
          variant.dr_mean = dr / n;
          variant.smap_mean = smap / n;
        }
      }
    } catch (const std::exception& err) {
      variant.status = std::string("failed: ") + err.what();
    }
  }

  // Table-shaped grid: metric rows, one column per variant
  fs::create_directories(out_dir);
  report.csv = out_dir / "ablation.csv";
  {
    std::ofstream csv(report.csv);
    if (!csv) throw IoError("cannot write '" + report.csv.string() + "'");
    csv << "metric";
    for (const auto& v : report.variants) csv << "," << v.name;
    csv << "\n";
    const auto emit = [&](const std::string& metric,
                          const std::optional<double> AblationVariant::* field) {
      csv << metric;
      for (const auto& v : report.variants) {
        csv << ",";
        if (v.*field) {
          char buf[32];
          std::snprintf(buf, sizeof buf, "%.6f", *(v.*field));
          csv << buf;
        }
      }
      csv << "\n";
    };
    emit("DR", &AblationVariant::dr_mean);
    emit("SmAP", &AblationVariant::smap_mean);
    emit("holdout_mean_ssim", &AblationVariant::holdout_mean_ssim);
    emit("final_total", &AblationVariant::final_total);
    csv << "status";
    for (const auto& v : report.variants) csv << "," << v.status;
    csv << "\n";
  }
  report.json = out_dir / "ablation.json";
  {
    nlohmann::json j;
    for (const auto& v : report.variants) {
      nlohmann::json jv{{"status", v.status}};
      if (v.holdout_mean_ssim) jv["holdout_mean_ssim"] = *v.holdout_mean_ssim;
      if (v.final_total) jv["final_total"] = *v.final_total;
      if (v.dr_mean) jv["DR"] = *v.dr_mean;
      if (v.smap_mean) jv["SmAP"] = *v.smap_mean;
      j[v.name] = std::move(jv);
    }
    std::ofstream js(report.json);
    js << j.dump(2) << "\n";
  }
  return report;
}

}  // namespace shadowpose
