// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: generate | train | enhance | evaluate | ablate |
// score | report. Exit codes: 0 success, 2 validation error, 3 runtime
// failure. Every run ends with a one-line machine-readable JSON summary.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "shadowpose/ablation.hpp"
#include "shadowpose/checkpoint.hpp"
#include "shadowpose/dataset.hpp"
#include "shadowpose/evaluate.hpp"
#include "shadowpose/kernels.hpp"
#include "shadowpose/png_io.hpp"
#include "shadowpose/report.hpp"
#include "shadowpose/sseq.hpp"
#include "shadowpose/synth.hpp"
#include "shadowpose/train.hpp"

namespace fs = std::filesystem;
using namespace shadowpose;

namespace {

void print_summary(const nlohmann::json& j) { std::cout << j.dump() << std::endl; }

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

LossToggles parse_toggles(const std::string& spec) {
  LossToggles t;
  t.use_structural = t.use_perceptual = t.use_edge = false;
  for (const auto& item : split_csv(spec)) {
    if (item == "sl")
      t.use_structural = true;
    else if (item == "pl")
      t.use_perceptual = true;
    else if (item == "el")
      t.use_edge = true;
    else
      throw ValidationError("--toggles: unknown term '" + item +
                            "' (expected a subset of sl,pl,el)");
  }
  t.validate();
  return t;
}

std::vector<DegradationSpec> load_spec_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open spec file '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& err) {
    throw ParseError("spec file '" + path.string() + "': " + err.what());
  }
  if (!j.is_array()) throw ValidationError("spec file must hold a JSON array");
  std::vector<DegradationSpec> specs;
  for (const auto& item : j) specs.push_back(DegradationSpec::from_json(item));
  return specs;
}

// ---------------------------------------------------------------- generate

int cmd_generate(const std::string& clear, const std::string& out, int charts,
                 int chart_size, const std::string& spec_file,
                 const std::string& film_layers, const std::string& haze_ts,
                 std::uint64_t seed) {
  fs::path clear_dir = clear;
  if (charts > 0) {
    clear_dir = fs::path(out) / "charts";
    fs::create_directories(clear_dir);
    for (int i = 0; i < charts; ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "chart%04d.png", i);
      write_png(clear_dir / name,
                make_chart(chart_size, chart_size, seed + static_cast<unsigned>(i)));
    }
  }
  if (clear_dir.empty())
    throw ValidationError("generate: provide --clear <dir> or --charts N");

  std::vector<DegradationSpec> specs;
  if (!spec_file.empty()) specs = load_spec_file(spec_file);
  for (const auto& s : split_csv(film_layers)) {
    if (s.empty()) continue;
    FilmFilterParams p;
    p.layers = std::stoi(s);
    p.seed = seed;
    specs.push_back({"film-" + s, p});
  }
  for (const auto& s : split_csv(haze_ts)) {
    if (s.empty()) continue;
    HazeParams p;
    p.transmission = std::stod(s);
    char label[32];
    std::snprintf(label, sizeof label, "haze-t%s", s.c_str());
    specs.push_back({label, p});
  }
  if (specs.empty()) {
    FilmFilterParams p;
    p.seed = seed;
    for (int layers = 1; layers <= 3; ++layers) {
      p.layers = layers;
      specs.push_back({"film-" + std::to_string(layers), p});
    }
  }

  const DatasetManifest m = generate_dataset(clear_dir, specs, out);
  for (const auto& s : m.skipped) std::cerr << "skipped: " << s << "\n";
  print_summary({{"status", "ok"},
                 {"command", "generate"},
                 {"entries", m.entries.size()},
                 {"skipped", m.skipped.size()},
                 {"manifest", (fs::path(out) / "manifest.json").string()},
                 {"seed", seed}});
  return 0;
}

// ------------------------------------------------------------------- train

int cmd_train(const std::string& config_path, const std::string& dataset,
              std::int64_t steps, int batch, double lr, const std::string& toggles,
              const std::string& extractor, int net_size, int holdout,
              const std::string& out, std::optional<std::uint64_t> seed,
              const std::string& resume_from) {
  TrainConfig cfg;
  if (!config_path.empty()) cfg = TrainConfig::load_file(config_path);
  if (!dataset.empty()) cfg.dataset = dataset;
  if (steps > 0) cfg.steps = steps;
  if (batch > 0) cfg.batch_size = batch;
  if (lr > 0) cfg.learning_rate = lr;
  if (!toggles.empty()) cfg.toggles = parse_toggles(toggles);
  if (!extractor.empty()) cfg.extractor = extractor;
  if (net_size > 0) {
    cfg.network.input_height = net_size;
    cfg.network.input_width = net_size;
  }
  if (holdout >= 0) cfg.holdout_count = holdout;
  if (!out.empty()) cfg.out_dir = out;
  if (seed) cfg.seed = *seed;

  const TrainResult r =
      resume_from.empty() ? train(cfg) : resume(resume_from, cfg);
  nlohmann::json summary{{"status", r.aborted ? "aborted" : "ok"},
                         {"command", "train"},
                         {"checkpoint", r.checkpoint_path.string()},
                         {"steps", r.last_step},
                         {"first_total", r.first_total},
                         {"final_total", r.final_total},
                         {"seed", cfg.seed}};
  if (r.aborted) summary["abort_reason"] = r.abort_reason;
  if (!r.log.evals.empty())
    summary["holdout_mean_ssim"] = r.log.evals.back().holdout_mean_ssim;
  print_summary(summary);
  return r.aborted ? 3 : 0;
}

// ----------------------------------------------------------------- enhance

int cmd_enhance(const std::string& checkpoint, const std::string& input,
                const std::string& out) {
  const CheckpointArchive archive = read_checkpoint(checkpoint);
  const Network net = network_from_archive(archive);
  const int th = net.config().input_height, tw = net.config().input_width;

  std::vector<fs::path> inputs;
  if (!fs::is_directory(input))
    throw ValidationError("enhance: input '" + input + "' is not a directory");
  for (const auto& e : fs::directory_iterator(input))
    if (e.is_regular_file() && e.path().extension() == ".png")
      inputs.push_back(e.path());
  std::sort(inputs.begin(), inputs.end());

  fs::create_directories(out);
  std::vector<std::string> failures;
  int written = 0;
  for (const auto& path : inputs) {
    try {
      const ImageTensor src = read_png(path);
      const ImageTensor resized =
          (src.height == th && src.width == tw) ? src
                                                : kernels::resize_bilinear(src, th, tw);
      ImageTensor enhanced = enhance_image(net, resized);
      if (enhanced.height != src.height || enhanced.width != src.width)
        enhanced = kernels::resize_bilinear(enhanced, src.height, src.width);
      enhanced.clamp01();
      write_png(fs::path(out) / path.filename(), enhanced);
      ++written;
    } catch (const IoError& err) {
      failures.push_back(path.filename().string() + ": " + err.what());
      std::cerr << "enhance failed: " << failures.back() << "\n";
    }
  }
  if (inputs.empty()) std::cerr << "enhance: 0 images in '" << input << "'\n";
  print_summary({{"status", "ok"},
                 {"command", "enhance"},
                 {"images", written},
                 {"failures", failures},
                 {"out", out}});
  return 0;
}

// ---------------------------------------------------------------- evaluate

int cmd_evaluate(const std::string& dataset, const std::string& estimator_spec,
                 const std::string& enhanced, const std::string& checkpoint,
                 double threshold, const std::string& out, std::uint64_t seed) {
  const DatasetManifest manifest = load_manifest(dataset);
  const PoseEstimator estimator(EstimatorConfig::parse(estimator_spec));
  MatchConfig match;
  match.distance_threshold = threshold;

  std::optional<fs::path> enhanced_dir;
  if (!checkpoint.empty()) {
    // enhance every degraded image into <out>/enhanced first
    const fs::path dir = fs::path(out) / "enhanced";
    fs::create_directories(dir);
    const CheckpointArchive archive = read_checkpoint(checkpoint);
    const Network net = network_from_archive(archive);
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
      write_png(dir / fs::path(entry.degraded).filename(), e);
    }
    enhanced_dir = dir;
  } else if (!enhanced.empty()) {
    enhanced_dir = fs::path(enhanced);
  }

  EvalReport report = evaluate_dataset(manifest, estimator, match, enhanced_dir);
  report.seed = seed;
  report.write(out, "eval");
  print_summary({{"status", "ok"},
                 {"command", "evaluate"},
                 {"rows", report.rows.size()},
                 {"aggregates", report.aggregates.size()},
                 {"failures", report.failures},
                 {"csv", (fs::path(out) / "eval.csv").string()},
                 {"seed", seed}});
  return 0;
}

// ------------------------------------------------------------------ ablate

int cmd_ablate(const std::string& config_path, const std::string& dataset,
               const std::string& estimator_spec, const std::string& out,
               std::optional<std::uint64_t> seed) {
  TrainConfig base;
  if (!config_path.empty()) base = TrainConfig::load_file(config_path);
  if (!dataset.empty()) base.dataset = dataset;
  if (seed) base.seed = *seed;

  const AblationReport report = run_ablation(base, estimator_spec, out);
  print_summary({{"status", report.all_ok() ? "ok" : "partial"},
                 {"command", "ablate"},
                 {"variants", report.variants.size()},
                 {"csv", report.csv.string()},
                 {"seed", base.seed}});
  return 0;
}

// ------------------------------------------------------------------- score

int cmd_score(const std::string& image, const std::string& regressor_path,
              double sr_clear, double sr_shadow, bool have_sr) {
  if (have_sr) {
    const double sr = shadow_ratio(injected_score(sr_clear), injected_score(sr_shadow));
    print_summary({{"status", "ok"},
                   {"command", "score"},
                   {"shadow_ratio", sr},
                   {"source", "injected"}});
    return 0;
  }
  if (image.empty())
    throw ValidationError("score: provide --image or --sr-clear/--sr-shadow");
  const ImageTensor img = read_png(image);
  const SseqFeatures f = sseq_features(img);
  std::optional<Regressor> reg;
  if (!regressor_path.empty()) reg = load_regressor(regressor_path);
  const QualityScore q = quality_score(f, reg);
  nlohmann::json features = nlohmann::json::array();
  for (double v : f.v) features.push_back(v);
  print_summary({{"status", "ok"},
                 {"command", "score"},
                 {"score", q.value},
                 {"source", q.source},
                 {"features", features}});
  return 0;
}

// ------------------------------------------------------------------ report

int cmd_report(const std::vector<std::string>& eval_paths, const std::string& out) {
  std::vector<EvalAggregate> aggregates;
  for (const auto& p : eval_paths) {
    const fs::path path = p;
    if (path.extension() == ".json") {
      const EvalReport r = EvalReport::from_json_file(path);
      aggregates.insert(aggregates.end(), r.aggregates.begin(), r.aggregates.end());
    } else {
      const auto parsed = parse_aggregates_csv(path);
      aggregates.insert(aggregates.end(), parsed.begin(), parsed.end());
    }
  }
  const ReportOutcome outcome = write_report(aggregates, out);
  for (const auto& w : outcome.warnings) std::cerr << "warning: " << w << "\n";
  nlohmann::json plots = nlohmann::json::array();
  for (const auto& p : outcome.plots) plots.push_back(p.string());
  print_summary({{"status", "ok"},
                 {"command", "report"},
                 {"csv", outcome.csv.string()},
                 {"plots", plots},
                 {"warnings", outcome.warnings.size()}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"privacy-preserving pose estimation pipeline"};
  app.require_subcommand(1);

  // generate
  auto* generate = app.add_subcommand("generate", "synthesize a paired dataset");
  std::string g_clear, g_out = "dataset", g_spec, g_film, g_haze;
  int g_charts = 0, g_chart_size = 64;
  std::uint64_t g_seed = 0;
  generate->add_option("--clear", g_clear, "directory of clear PNG images");
  generate->add_option("--out", g_out, "output directory");
  generate->add_option("--spec", g_spec, "JSON file with degradation specs");
  generate->add_option("--film-layers", g_film, "CSV of film layer counts, e.g. 1,2,3");
  generate->add_option("--haze-t", g_haze, "CSV of haze transmissions, e.g. 0.6,0.8");
  generate->add_option("--charts", g_charts, "synthesize N test charts as clear images");
  generate->add_option("--chart-size", g_chart_size, "chart side length");
  generate->add_option("--seed", g_seed, "seed recorded in all artifacts");

  // train
  auto* train_cmd = app.add_subcommand("train", "optimize the enhancement network");
  std::string t_config, t_dataset, t_toggles, t_extractor, t_out, t_resume;
  std::int64_t t_steps = 0;
  int t_batch = 0, t_net_size = 0, t_holdout = -1;
  double t_lr = 0;
  std::uint64_t t_seed = 0;
  bool t_seed_set = false;
  train_cmd->add_option("--config", t_config, "JSON config mirroring the train schema");
  train_cmd->add_option("--dataset", t_dataset, "manifest path");
  train_cmd->add_option("--steps", t_steps, "optimizer steps");
  train_cmd->add_option("--batch", t_batch, "batch size");
  train_cmd->add_option("--lr", t_lr, "learning rate");
  train_cmd->add_option("--toggles", t_toggles, "enabled loss terms, subset of sl,pl,el");
  train_cmd->add_option("--extractor", t_extractor,
                        "identity | stub | stub:<seed> | file:<path>");
  train_cmd->add_option("--net-size", t_net_size, "network input side length");
  train_cmd->add_option("--holdout", t_holdout, "held-out pair count");
  train_cmd->add_option("--out", t_out, "output directory");
  train_cmd->add_option("--seed", t_seed, "training seed")->each([&](const std::string&) {
    t_seed_set = true;
  });
  train_cmd->add_option("--resume", t_resume, "checkpoint to continue from");

  // enhance
  auto* enhance = app.add_subcommand("enhance", "run the network over a directory");
  std::string e_checkpoint, e_input, e_out = "enhanced";
  enhance->add_option("--checkpoint", e_checkpoint, "trained checkpoint")->required();
  enhance->add_option("--input", e_input, "directory of PNG inputs")->required();
  enhance->add_option("--out", e_out, "output directory");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "pose metrics over a dataset");
  std::string v_dataset, v_estimator, v_enhanced, v_checkpoint, v_out = "eval_out";
  double v_threshold = 10.0;
  std::uint64_t v_seed = 0;
  evaluate->add_option("--dataset", v_dataset, "manifest path")->required();
  evaluate->add_option("--estimator", v_estimator,
                       "external:<binary> or mock:<fixtures>")->required();
  evaluate->add_option("--enhanced", v_enhanced, "directory of enhanced images");
  evaluate->add_option("--checkpoint", v_checkpoint,
                       "enhance degraded images with this checkpoint first");
  evaluate->add_option("--threshold", v_threshold, "precision distance in pixels");
  evaluate->add_option("--out", v_out, "output directory");
  evaluate->add_option("--seed", v_seed, "seed recorded in the report");

  // ablate
  auto* ablate = app.add_subcommand("ablate", "train and compare loss-term variants");
  std::string a_config, a_dataset, a_estimator, a_out = "ablation_out";
  std::uint64_t a_seed = 0;
  bool a_seed_set = false;
  ablate->add_option("--config", a_config, "base train config");
  ablate->add_option("--dataset", a_dataset, "manifest path");
  ablate->add_option("--estimator", a_estimator, "optional pose estimator spec");
  ablate->add_option("--out", a_out, "output directory");
  ablate->add_option("--seed", a_seed, "shared seed")->each([&](const std::string&) {
    a_seed_set = true;
  });

  // score
  auto* score = app.add_subcommand("score", "no-reference quality score / shadow ratio");
  std::string s_image, s_regressor;
  double s_sr_clear = 0.0, s_sr_shadow = 0.0;
  bool s_have_clear = false, s_have_shadow = false;
  score->add_option("--image", s_image, "image to score");
  score->add_option("--regressor", s_regressor, "regressor weights JSON");
  score->add_option("--sr-clear", s_sr_clear, "injected clear score")
      ->each([&](const std::string&) { s_have_clear = true; });
  score->add_option("--sr-shadow", s_sr_shadow, "injected shadow score")
      ->each([&](const std::string&) { s_have_shadow = true; });

  // report
  auto* report = app.add_subcommand("report", "CSV + plots from evaluation outputs");
  std::vector<std::string> r_evals;
  std::string r_out = "report_out";
  report->add_option("--eval", r_evals, "evaluation outputs (.json or .csv)")
      ->required()
      ->expected(-1);
  report->add_option("--out", r_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    if (generate->parsed())
      return cmd_generate(g_clear, g_out, g_charts, g_chart_size, g_spec, g_film,
                          g_haze, g_seed);
    if (train_cmd->parsed())
      return cmd_train(t_config, t_dataset, t_steps, t_batch, t_lr, t_toggles,
                       t_extractor, t_net_size, t_holdout, t_out,
                       t_seed_set ? std::optional<std::uint64_t>(t_seed) : std::nullopt,
                       t_resume);
    if (enhance->parsed()) return cmd_enhance(e_checkpoint, e_input, e_out);
    if (evaluate->parsed())
      return cmd_evaluate(v_dataset, v_estimator, v_enhanced, v_checkpoint,
                          v_threshold, v_out, v_seed);
    if (ablate->parsed())
      return cmd_ablate(a_config, a_dataset, a_estimator, a_out,
                        a_seed_set ? std::optional<std::uint64_t>(a_seed) : std::nullopt);
    if (score->parsed()) {
      if (s_have_clear != s_have_shadow)
        throw ValidationError("score: --sr-clear and --sr-shadow go together");
      return cmd_score(s_image, s_regressor, s_sr_clear, s_sr_shadow, s_have_clear);
    }
    if (report->parsed()) return cmd_report(r_evals, r_out);
  } catch (const ValidationError& err) {
    std::cerr << "error: " << err.what() << "\n";
    print_summary({{"status", "error"}, {"kind", "validation"}, {"message", err.what()}});
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    print_summary({{"status", "error"}, {"kind", "runtime"}, {"message", err.what()}});
    return 3;
  }
  return 2;
}
