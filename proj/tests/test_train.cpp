// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "shadowpose/checkpoint.hpp"
#include "shadowpose/dataset.hpp"
#include "shadowpose/png_io.hpp"
#include "shadowpose/train.hpp"
#include "test_util.hpp"

using namespace shadowpose;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("shadowpose_train_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// Tiny haze dataset living at 'dir', returns the manifest path.
fs::path make_tiny_dataset(const fs::path& dir, int n_charts, int size = 16) {
  fs::create_directories(dir / "clear");
  for (int i = 0; i < n_charts; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "c%03d.png", i);
    write_png(dir / "clear" / name, make_chart(size, size, 500 + static_cast<unsigned>(i)));
  }
  HazeParams h;
  h.transmission = 0.65;
  std::vector<DegradationSpec> specs{{"haze", h}};
  generate_dataset(dir / "clear", specs, dir / "data");
  return dir / "data" / "manifest.json";
}

TrainConfig tiny_config(const fs::path& manifest, const fs::path& out, int size = 16) {
  TrainConfig cfg;
  cfg.steps = 12;
  cfg.batch_size = 2;
  cfg.learning_rate = 1e-3;
  cfg.seed = 9;
  cfg.eval_every = 6;
  cfg.dataset = manifest.string();
  cfg.network.input_height = size;
  cfg.network.input_width = size;
  cfg.holdout_count = 1;
  cfg.out_dir = out.string();
  return cfg;
}

}  // namespace

TEST_CASE("config validation rejects zero steps") {
  TrainConfig cfg;
  cfg.steps = 0;
  cfg.dataset = "x.json";
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("config JSON round trip preserves every field") {
  TrainConfig cfg;
  cfg.steps = 77;
  cfg.batch_size = 3;
  cfg.learning_rate = 2e-4;
  cfg.optimizer = "sgd-momentum";
  cfg.seed = 42;
  cfg.toggles.use_perceptual = false;
  cfg.eval_every = 11;
  cfg.dataset = "some/manifest.json";
  cfg.resize_policy = "center-crop";
  cfg.holdout_count = 5;
  cfg.extractor = "stub:4";
  cfg.network.input_height = 64;
  cfg.network.input_width = 64;
  const TrainConfig back = TrainConfig::from_json(cfg.to_json());
  CHECK(back.to_json() == cfg.to_json());
}

TEST_CASE("schedule is a pure function covering each epoch exactly once") {
  const std::size_t n = 7;
  for (std::int64_t epoch = 0; epoch < 3; ++epoch) {
    std::vector<bool> seen(n, false);
    for (std::size_t pos = 0; pos < n; ++pos) {
      const std::size_t idx =
          schedule_index(5, epoch * static_cast<std::int64_t>(n) +
                                static_cast<std::int64_t>(pos), n);
      CHECK(idx < n);
      CHECK(!seen[idx]);
      seen[idx] = true;
    }
  }
  // pure: same arguments, same answer
  CHECK(schedule_index(5, 13, n) == schedule_index(5, 13, n));
}

TEST_CASE("singleton overfit: loss at the last step is below the first step") {
  const fs::path dir = fresh_dir("overfit");
  fs::create_directories(dir / "clear");
  write_png(dir / "clear" / "only.png", make_chart(16, 16, 77));
  HazeParams h;
  h.transmission = 0.6;
  generate_dataset(dir / "clear", {{"haze", h}}, dir / "data");

  TrainConfig cfg = tiny_config(dir / "data" / "manifest.json", dir / "out");
  cfg.steps = 60;
  cfg.batch_size = 1;
  cfg.holdout_count = 0;
  cfg.eval_every = 100;
  const TrainResult r = train(cfg);
  CHECK(!r.aborted);
  CHECK(r.final_total < r.first_total);
}

TEST_CASE("training is deterministic: identical configs give identical logs") {
  const fs::path dir = fresh_dir("determinism");
  const fs::path manifest = make_tiny_dataset(dir, 4);
  TrainConfig cfg = tiny_config(manifest, dir / "out_a");
  const TrainResult a = train(cfg);
  cfg.out_dir = (dir / "out_b").string();
  const TrainResult b = train(cfg);
  REQUIRE(a.log.steps.size() == b.log.steps.size());
  for (std::size_t i = 0; i < a.log.steps.size(); ++i) {
    CHECK(a.log.steps[i].loss.total == b.log.steps[i].loss.total);
    CHECK(a.log.steps[i].loss.sl == b.log.steps[i].loss.sl);
  }
}

TEST_CASE("logged breakdowns are non-negative, additive, steps strictly increase") {
  const fs::path dir = fresh_dir("invariants");
  const fs::path manifest = make_tiny_dataset(dir, 3);
  TrainConfig cfg = tiny_config(manifest, dir / "out");
  const TrainResult r = train(cfg);
  std::int64_t prev = 0;
  for (const auto& rec : r.log.steps) {
    CHECK(rec.step > prev);
    prev = rec.step;
    CHECK(rec.loss.sl >= 0.0);
    CHECK(rec.loss.pl >= 0.0);
    CHECK(rec.loss.el >= 0.0);
    CHECK(rec.loss.total ==
          doctest::Approx(rec.loss.sl + rec.loss.pl + rec.loss.el).epsilon(1e-12));
    CHECK(std::isfinite(rec.loss.total));
  }
  // a checkpoint exists at the final step
  CHECK(fs::exists(r.checkpoint_path));
  const auto archive = read_checkpoint(r.checkpoint_path);
  CHECK(archive.meta.step == cfg.steps);
}

TEST_CASE("split-run equals straight run bitwise") {
  const fs::path dir = fresh_dir("splitrun");
  const fs::path manifest = make_tiny_dataset(dir, 4);

  TrainConfig full = tiny_config(manifest, dir / "out_full");
  full.steps = 10;
  const TrainResult rf = train(full);

  TrainConfig half = tiny_config(manifest, dir / "out_half");
  half.steps = 5;
  const TrainResult rh = train(half);
  TrainConfig rest = half;
  rest.steps = 10;
  rest.out_dir = (dir / "out_rest").string();
  const TrainResult rr = resume(rh.checkpoint_path, rest);

  const auto a = read_checkpoint(rf.checkpoint_path);
  const auto b = read_checkpoint(rr.checkpoint_path);
  REQUIRE(a.tensors.size() == b.tensors.size());
  for (const auto& [name, t] : a.tensors) {
    REQUIRE(b.tensors.count(name) == 1);
    const auto& u = b.tensors.at(name);
    REQUIRE(u.data.size() == t.data.size());
    for (std::size_t i = 0; i < t.data.size(); ++i) CHECK(t.data[i] == u.data[i]);
  }
  // log continues monotonically across the resume point
  CHECK(rr.log.steps.front().step == 6);
  CHECK(rr.log.steps.back().step == 10);
}

TEST_CASE("resume refuses a changed architecture") {
  const fs::path dir = fresh_dir("resume_arch");
  const fs::path manifest = make_tiny_dataset(dir, 3);
  TrainConfig cfg = tiny_config(manifest, dir / "out");
  cfg.steps = 3;
  const TrainResult r = train(cfg);

  TrainConfig wider = cfg;
  wider.steps = 6;
  wider.network.conv_channels = 16;
  CHECK_THROWS_AS(resume(r.checkpoint_path, wider), ValidationError);
}

TEST_CASE("resume refuses non-whitelisted config changes") {
  const fs::path dir = fresh_dir("resume_cfg");
  const fs::path manifest = make_tiny_dataset(dir, 3);
  TrainConfig cfg = tiny_config(manifest, dir / "out");
  cfg.steps = 3;
  const TrainResult r = train(cfg);

  TrainConfig changed = cfg;
  changed.steps = 6;
  changed.learning_rate = 5e-3;  // not whitelisted
  CHECK_THROWS_AS(resume(r.checkpoint_path, changed), ValidationError);

  TrainConfig ok = cfg;
  ok.steps = 6;
  ok.eval_every = 2;  // whitelisted
  ok.out_dir = (dir / "out2").string();
  const TrainResult rr = resume(r.checkpoint_path, ok);
  CHECK(rr.last_step == 6);
}

TEST_CASE("non-finite loss aborts with the last good checkpoint") {
  const fs::path dir = fresh_dir("abort");
  const fs::path manifest = make_tiny_dataset(dir, 3);
  TrainConfig cfg = tiny_config(manifest, dir / "out");
  cfg.steps = 50;
  cfg.learning_rate = 1e18;  // drives the weights to overflow
  cfg.grad_clip_norm = 1e30;
  const TrainResult r = train(cfg);
  CHECK(r.aborted);
  CHECK(!r.abort_reason.empty());
  CHECK(fs::exists(r.checkpoint_path));
  const auto archive = read_checkpoint(r.checkpoint_path);
  CHECK(archive.meta.step == r.last_step);
  for (const auto& [name, t] : archive.tensors)
    for (double v : t.data) CHECK(std::isfinite(v));
}

TEST_CASE("eval snapshots appear at the configured cadence") {
  const fs::path dir = fresh_dir("evals");
  const fs::path manifest = make_tiny_dataset(dir, 4);
  TrainConfig cfg = tiny_config(manifest, dir / "out");
  cfg.steps = 12;
  cfg.eval_every = 5;
  const TrainResult r = train(cfg);
  REQUIRE(r.log.evals.size() == 3);  // steps 5, 10 and the final 12
  CHECK(r.log.evals[0].step == 5);
  CHECK(r.log.evals[1].step == 10);
  CHECK(r.log.evals[2].step == 12);
  for (const auto& e : r.log.evals) {
    CHECK(e.holdout_mean_ssim > -1.0);
    CHECK(e.holdout_mean_ssim <= 1.0);
  }
}
