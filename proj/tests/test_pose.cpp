// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "shadowpose/dataset.hpp"
#include "shadowpose/evaluate.hpp"
#include "shadowpose/png_io.hpp"
#include "shadowpose/synth.hpp"
#include "test_util.hpp"

using namespace shadowpose;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("shadowpose_pose_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

std::string keypoints_json(const std::vector<Skeleton>& people) {
  std::string out = "{\"people\":[";
  for (std::size_t i = 0; i < people.size(); ++i) {
    if (i) out += ",";
    out += "{\"pose_keypoints_2d\":[";
    for (std::size_t k = 0; k < people[i].keypoints.size(); ++k) {
      const auto& kp = people[i].keypoints[k];
      if (k) out += ",";
      char buf[96];
      std::snprintf(buf, sizeof buf, "%.4f,%.4f,%.4f", kp.x, kp.y, kp.confidence);
      out += buf;
    }
    out += "]}";
  }
  out += "]}";
  return out;
}

// Single random skeleton; absent slots get confidence 0.
Skeleton random_skeleton(Rng& rng, int parts, double absent_prob) {
  Skeleton s;
  for (int p = 0; p < parts; ++p) {
    Keypoint k;
    k.part_id = p;
    if (rng.uniform01() < absent_prob) {
      k.confidence = 0.0;
    } else {
      k.x = rng.uniform(0, 640);
      k.y = rng.uniform(0, 480);
      k.confidence = rng.uniform(0.1, 1.0);
    }
    s.keypoints.push_back(k);
  }
  return s;
}

}  // namespace

TEST_CASE("empty scene parses to an empty list") {
  CHECK(parse_pose_json("{\"people\":[]}").empty());
}

TEST_CASE("18 triples with 3 zero-confidence parse to 15 present keypoints") {
  Skeleton s;
  Rng rng(1);
  s = random_skeleton(rng, 18, 0.0);
  s.keypoints[2].confidence = 0.0;
  s.keypoints[7].confidence = 0.0;
  s.keypoints[11].confidence = 0.0;
  const auto parsed = parse_pose_json(keypoints_json({s}));
  REQUIRE(parsed.size() == 1);
  CHECK(parsed[0].keypoints.size() == 18);
  CHECK(parsed[0].present_count() == 15);
}

TEST_CASE("part count is read from the array length (25-part model)") {
  Rng rng(2);
  const auto parsed = parse_pose_json(keypoints_json({random_skeleton(rng, 25, 0.2)}));
  CHECK(parsed[0].keypoints.size() == 25);
}

TEST_CASE("malformed JSON reports a byte offset") {
  try {
    parse_pose_json("{\"people\":[{\"pose_keypoints_2d\":[1,2,");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("byte") != std::string::npos);
  }
}

TEST_CASE("non-multiple-of-3 arrays are rejected") {
  CHECK_THROWS_AS(parse_pose_json("{\"people\":[{\"pose_keypoints_2d\":[1,2]}]}"),
                  ParseError);
}

TEST_CASE("fixture files round trip exactly") {
  const fs::path dir = fresh_dir("fixture");
  Rng rng(3);
  const Skeleton s = random_skeleton(rng, 18, 0.3);
  write_text(dir / "img_keypoints.json", keypoints_json({s}));
  const auto loaded = load_pose_json(dir / "img_keypoints.json");
  REQUIRE(loaded.size() == 1);
  for (int p = 0; p < 18; ++p) {
    CHECK(loaded[0].keypoints[static_cast<std::size_t>(p)].present() ==
          s.keypoints[static_cast<std::size_t>(p)].present());
    if (s.keypoints[static_cast<std::size_t>(p)].present()) {
      CHECK(loaded[0].keypoints[static_cast<std::size_t>(p)].x ==
            doctest::Approx(s.keypoints[static_cast<std::size_t>(p)].x).epsilon(1e-4));
    }
  }
}

TEST_CASE("detection rate arithmetic") {
  Rng rng(4);
  Skeleton clear = random_skeleton(rng, 18, 0.0);
  Skeleton enh = clear;
  CHECK(detection_rate({enh}, {clear}) == 1.0);

  for (int p = 12; p < 18; ++p) enh.keypoints[static_cast<std::size_t>(p)].confidence = 0.0;
  CHECK(detection_rate({enh}, {clear}) == doctest::Approx(12.0 / 18.0).epsilon(1e-12));
}

TEST_CASE("detection rate requires clear detections") {
  Rng rng(5);
  Skeleton empty;
  for (int p = 0; p < 18; ++p) empty.keypoints.push_back({p, 0, 0, 0.0});
  CHECK_THROWS_AS(detection_rate({random_skeleton(rng, 18, 0.0)}, {empty}),
                  ValidationError);
}

TEST_CASE("smap trivia: all within threshold, threshold arithmetic") {
  Rng rng(6);
  Skeleton clear = random_skeleton(rng, 18, 0.0);
  Skeleton enh = clear;
  for (auto& k : enh.keypoints) {
    k.x += 3.0;  // displacement 5 px
    k.y += 4.0;
  }
  CHECK(smap({enh}, {clear}, MatchConfig{}) == 1.0);

  // 10 detected, 7 within 10 px, 3 at 15 px -> 0.7
  Skeleton c2, e2;
  for (int p = 0; p < 10; ++p) {
    Keypoint k{p, 100.0 + 30 * p, 200.0, 0.9};
    c2.keypoints.push_back(k);
    Keypoint ke = k;
    if (p < 7)
      ke.x += 6.0;  // within
    else
      ke.x += 15.0;  // outside
    e2.keypoints.push_back(ke);
  }
  CHECK(smap({e2}, {c2}, MatchConfig{}) == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("a distance of exactly 10 counts as precise") {
  Skeleton clear, enh;
  Keypoint k{0, 100.0, 100.0, 1.0};
  clear.keypoints.push_back(k);
  k.x += 6.0;  // 6-8-10 triangle: distance exactly 10
  k.y += 8.0;
  enh.keypoints.push_back(k);
  CHECK(smap({enh}, {clear}, MatchConfig{}) == 1.0);
  // and just beyond the boundary fails
  enh.keypoints[0].x += 1e-9;
  CHECK(smap({enh}, {clear}, MatchConfig{}) == 0.0);
}

TEST_CASE("DR and SmAP match brute-force counting oracles on random pairs") {
  Rng rng(7);
  const MatchConfig m;
  for (int trial = 0; trial < 100; ++trial) {
    Skeleton clear = random_skeleton(rng, 18, 0.25);
    Skeleton enh;
    for (int p = 0; p < 18; ++p) {
      Keypoint k = clear.keypoints[static_cast<std::size_t>(p)];
      if (rng.uniform01() < 0.2) k.confidence = 0.0;
      if (k.present()) {
        if (rng.uniform01() < 0.25) {
          k.x += 6.0;  // exactly on the boundary
          k.y += 8.0;
        } else {
          k.x += rng.uniform(-14, 14);
          k.y += rng.uniform(-14, 14);
        }
      }
      enh.keypoints.push_back(k);
    }

    // oracle: explicit loops with an explicit <= comparison
    long long n_c = 0, n_e = 0, n_te = 0;
    for (int p = 0; p < 18; ++p) {
      const auto& kc = clear.keypoints[static_cast<std::size_t>(p)];
      const auto& ke = enh.keypoints[static_cast<std::size_t>(p)];
      if (kc.confidence > 0) ++n_c;
      if (ke.confidence > 0) ++n_e;
      if (kc.confidence > 0 && ke.confidence > 0) {
        const double d = std::hypot(ke.x - kc.x, ke.y - kc.y);
        if (d <= 10.0) ++n_te;
      }
    }
    if (n_c == 0) {
      CHECK_THROWS_AS(detection_rate({enh}, {clear}), ValidationError);
      continue;
    }
    CHECK(detection_rate({enh}, {clear}) ==
          static_cast<double>(n_e) / static_cast<double>(n_c));
    const auto counts = smap_counts({enh}, {clear}, m);
    CHECK(counts.n_e == n_e);
    CHECK(counts.n_te == n_te);
    if (n_e > 0)
      CHECK(smap({enh}, {clear}, m) ==
            static_cast<double>(n_te) / static_cast<double>(n_e));
  }
}

TEST_CASE("metrics are independent of skeleton order (multi-person pairing)") {
  Rng rng(8);
  Skeleton a = random_skeleton(rng, 18, 0.1);
  Skeleton b = random_skeleton(rng, 18, 0.1);
  // displace centroids far apart so pairing is unambiguous
  for (auto& k : b.keypoints) {
    k.x += 2000.0;
    k.y += 2000.0;
  }
  Skeleton ae = a, be = b;
  for (auto& k : ae.keypoints) k.x += 4.0;
  for (auto& k : be.keypoints) k.y += 25.0;  // all imprecise

  const MatchConfig m;
  const auto c1 = smap_counts({ae, be}, {a, b}, m);
  const auto c2 = smap_counts({be, ae}, {b, a}, m);
  CHECK(c1.n_e == c2.n_e);
  CHECK(c1.n_te == c2.n_te);
  // only the a/ae pair is precise (ae is a 4 px shift of a)
  long long both_present = 0;
  for (std::size_t p = 0; p < 18; ++p)
    if (a.keypoints[p].present() && ae.keypoints[p].present()) ++both_present;
  CHECK(c1.n_te == both_present);
}

TEST_CASE("unpaired extra skeletons count toward N_e but not N_te") {
  Rng rng(9);
  Skeleton real = random_skeleton(rng, 18, 0.0);
  Skeleton ghost = random_skeleton(rng, 18, 0.0);
  for (auto& k : ghost.keypoints) k.x += 5000.0;
  Skeleton enh = real;
  for (auto& k : enh.keypoints) k.x += 1.0;

  const auto counts = smap_counts({enh, ghost}, {real}, MatchConfig{});
  CHECK(counts.n_e == enh.present_count() + ghost.present_count());
  CHECK(counts.n_te == real.present_count());  // only the paired skeleton scores
}

TEST_CASE("evaluate_dataset: enhanced == clear gives DR = SmAP = 1 on every image") {
  const fs::path dir = fresh_dir("eval_perfect");
  fs::create_directories(dir / "clear");
  for (int i = 0; i < 3; ++i)
    write_png(dir / "clear" / ("c" + std::to_string(i) + ".png"),
              make_chart(32, 32, 700 + static_cast<unsigned>(i)));
  HazeParams h;
  generate_dataset(dir / "clear", {{"haze", h}}, dir / "data");
  auto manifest = load_manifest(dir / "data" / "manifest.json");

  // fixtures: same skeletons for clear and degraded variants of each image
  const fs::path fixtures = dir / "fixtures";
  fs::create_directories(fixtures);
  Rng rng(10);
  for (int i = 0; i < 3; ++i) {
    const Skeleton s = random_skeleton(rng, 18, 0.2);
    const std::string json = keypoints_json({s});
    write_text(fixtures / ("c" + std::to_string(i) + "_keypoints.json"), json);
    write_text(fixtures / ("c" + std::to_string(i) + "__haze_keypoints.json"), json);
  }

  PoseEstimator est(EstimatorConfig{EstimatorConfig::Mode::mock, fixtures.string()});
  const auto report = evaluate_dataset(manifest, est, MatchConfig{}, std::nullopt);
  CHECK(report.failures == 0);
  REQUIRE(report.rows.size() == 3);
  for (const auto& row : report.rows) {
    CHECK(!row.excluded);
    CHECK(row.dr == 1.0);
    CHECK(row.smap == 1.0);
  }
  REQUIRE(report.aggregates.size() == 1);
  CHECK(report.aggregates[0].images == 3);
  CHECK(report.aggregates[0].dr_mean == 1.0);
  CHECK(report.aggregates[0].smap_mean == 1.0);
}

TEST_CASE("evaluate_dataset aggregates hand-built fixtures to hand-computed means") {
  const fs::path dir = fresh_dir("eval_hand");
  fs::create_directories(dir / "clear");
  for (int i = 0; i < 2; ++i)
    write_png(dir / "clear" / ("im" + std::to_string(i) + ".png"),
              make_chart(32, 32, 800 + static_cast<unsigned>(i)));
  HazeParams h;
  generate_dataset(dir / "clear", {{"haze", h}}, dir / "data");
  auto manifest = load_manifest(dir / "data" / "manifest.json");

  const fs::path fixtures = dir / "fixtures";
  fs::create_directories(fixtures);
  // image 0: clear has 4 keypoints; degraded has 2, one precise (5px), one at 20px
  Skeleton c0;
  for (int p = 0; p < 4; ++p) c0.keypoints.push_back({p, 50.0 * p, 60.0, 1.0});
  Skeleton d0;
  d0.keypoints.push_back({0, 0.0 + 5.0, 60.0, 0.8});
  d0.keypoints.push_back({1, 50.0 + 20.0, 60.0, 0.8});
  d0.keypoints.push_back({2, 0, 0, 0.0});
  d0.keypoints.push_back({3, 0, 0, 0.0});
  write_text(fixtures / "im0_keypoints.json", keypoints_json({c0}));
  write_text(fixtures / "im0__haze_keypoints.json", keypoints_json({d0}));
  // image 1: clear has 2, degraded has 2, both precise
  Skeleton c1;
  c1.keypoints.push_back({0, 10.0, 10.0, 1.0});
  c1.keypoints.push_back({1, 90.0, 10.0, 1.0});
  Skeleton d1 = c1;
  for (auto& k : d1.keypoints) k.y += 2.0;
  write_text(fixtures / "im1_keypoints.json", keypoints_json({c1}));
  write_text(fixtures / "im1__haze_keypoints.json", keypoints_json({d1}));

  PoseEstimator est(EstimatorConfig{EstimatorConfig::Mode::mock, fixtures.string()});
  const auto report = evaluate_dataset(manifest, est, MatchConfig{}, std::nullopt);
  REQUIRE(report.aggregates.size() == 1);
  const auto& agg = report.aggregates[0];
  // DR: (2/4 + 2/2)/2 = 0.75 ; SmAP: (1/2 + 2/2)/2 = 0.75
  CHECK(agg.dr_mean == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(agg.smap_mean == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(agg.n_c == 6);
  CHECK(agg.n_e == 4);
  CHECK(agg.n_te == 3);
}

TEST_CASE("evaluate_dataset groups by condition label") {
  const fs::path dir = fresh_dir("eval_groups");
  fs::create_directories(dir / "clear");
  write_png(dir / "clear" / "a.png", make_chart(32, 32, 900));
  std::vector<DegradationSpec> specs;
  for (int layers = 1; layers <= 3; ++layers) {
    FilmFilterParams p;
    p.layers = layers;
    specs.push_back({"film-" + std::to_string(layers), p});
  }
  generate_dataset(dir / "clear", specs, dir / "data");
  auto manifest = load_manifest(dir / "data" / "manifest.json");

  const fs::path fixtures = dir / "fixtures";
  fs::create_directories(fixtures);
  Rng rng(11);
  const Skeleton s = random_skeleton(rng, 18, 0.0);
  write_text(fixtures / "a_keypoints.json", keypoints_json({s}));
  for (int layers = 1; layers <= 3; ++layers)
    write_text(fixtures / ("a__film-" + std::to_string(layers) + "_keypoints.json"),
               keypoints_json({s}));

  PoseEstimator est(EstimatorConfig{EstimatorConfig::Mode::mock, fixtures.string()});
  const auto report = evaluate_dataset(manifest, est, MatchConfig{}, std::nullopt);
  CHECK(report.aggregates.size() == 3);  // one row per condition, degraded only
}

TEST_CASE("estimator failures are recorded and excluded, not fatal") {
  const fs::path dir = fresh_dir("eval_fail");
  fs::create_directories(dir / "clear");
  write_png(dir / "clear" / "a.png", make_chart(32, 32, 901));
  write_png(dir / "clear" / "b.png", make_chart(32, 32, 902));
  HazeParams h;
  generate_dataset(dir / "clear", {{"haze", h}}, dir / "data");
  auto manifest = load_manifest(dir / "data" / "manifest.json");

  const fs::path fixtures = dir / "fixtures";
  fs::create_directories(fixtures);
  Rng rng(12);
  const Skeleton s = random_skeleton(rng, 18, 0.0);
  // only image 'a' has fixtures; 'b' will fail on the clear image
  write_text(fixtures / "a_keypoints.json", keypoints_json({s}));
  write_text(fixtures / "a__haze_keypoints.json", keypoints_json({s}));

  PoseEstimator est(EstimatorConfig{EstimatorConfig::Mode::mock, fixtures.string()});
  const auto report = evaluate_dataset(manifest, est, MatchConfig{}, std::nullopt);
  CHECK(report.failures == 1);
  REQUIRE(report.aggregates.size() == 1);
  CHECK(report.aggregates[0].images == 1);
}

TEST_CASE("external estimator mode drives a fake binary end to end") {
  const fs::path dir = fresh_dir("external");
  write_png(dir / "img.png", make_chart(32, 32, 903));

  // fake pose binary: writes a fixed skeleton JSON for every image it sees
  const fs::path script = dir / "fake_pose.sh";
  write_text(script,
             "#!/bin/sh\n"
             "imgdir=\"\"; outdir=\"\"\n"
             "while [ $# -gt 0 ]; do\n"
             "  case \"$1\" in\n"
             "    --image_dir) imgdir=\"$2\"; shift 2;;\n"
             "    --write_json) outdir=\"$2\"; shift 2;;\n"
             "    *) shift;;\n"
             "  esac\n"
             "done\n"
             "for f in \"$imgdir\"/*; do\n"
             "  stem=$(basename \"$f\"); stem=${stem%.*}\n"
             "  printf '{\"people\":[{\"pose_keypoints_2d\":[10,20,0.9,30,40,0.8]}]}' "
             "> \"$outdir/${stem}_keypoints.json\"\n"
             "done\n");
  fs::permissions(script, fs::perms::owner_all);

  PoseEstimator est(EstimatorConfig{EstimatorConfig::Mode::external, script.string()});
  const auto skeletons = est.run(dir / "img.png");
  REQUIRE(skeletons.size() == 1);
  CHECK(skeletons[0].keypoints.size() == 2);
  CHECK(skeletons[0].keypoints[0].x == 10.0);

  // failing binary surfaces diagnostics
  const fs::path bad = dir / "bad_pose.sh";
  write_text(bad, "#!/bin/sh\necho boom >&2\nexit 3\n");
  fs::permissions(bad, fs::perms::owner_all);
  PoseEstimator bad_est(EstimatorConfig{EstimatorConfig::Mode::external, bad.string()});
  try {
    bad_est.run(dir / "img.png");
    FAIL("expected IoError");
  } catch (const IoError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("boom") != std::string::npos);
    CHECK(msg.find("code 3") != std::string::npos);
  }
}

TEST_CASE("eval report CSV has the pinned column layout") {
  EvalReport r;
  EvalAggregate a;
  a.condition = "film-2";
  a.comparison = "enhanced";
  a.images = 5;
  a.n_c = 90;
  a.n_e = 80;
  a.n_te = 72;
  a.dr_mean = 0.888889;
  a.smap_mean = 0.9;
  r.aggregates.push_back(a);
  const std::string csv = r.to_csv();
  CHECK(csv.find("condition,comparison,images,N_c,N_e,N_te,DR_mean,SmAP_mean\n") == 0);
  CHECK(csv.find("film-2,enhanced,5,90,80,72,0.888889,0.900000") != std::string::npos);
}
