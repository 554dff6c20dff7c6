// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "shadowpose/kernels.hpp"
#include "shadowpose/sseq.hpp"
#include "shadowpose/synth.hpp"
#include "test_util.hpp"

using namespace shadowpose;
namespace fs = std::filesystem;
using test_util::random_image;

namespace {

fs::path write_json(const std::string& name, const std::string& text) {
  const fs::path p = fs::temp_directory_path() / name;
  std::ofstream out(p);
  out << text;
  return p;
}

}  // namespace

TEST_CASE("constant image: zero entropies everywhere, proxy score 100") {
  const auto img = ImageTensor::constant(64, 64, 3, 0.5);
  const auto f = sseq_features(img);
  for (double v : f.v) CHECK(v == 0.0);
  const auto q = quality_score(f, std::nullopt);
  CHECK(q.value == 100.0);
  CHECK(q.source == "proxy");
}

TEST_CASE("two equiprobable values in a block give exactly 1 bit") {
  std::vector<double> block(64);
  for (std::size_t i = 0; i < 64; ++i) block[i] = (i % 2 == 0) ? 0.2 : 0.8;
  CHECK(spatial_entropy_block(block) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("spectral entropy: single AC basis function carries zero entropy") {
  // x[y][x] = basis_u=0(y) * basis_v=1(x): all energy in one AC coefficient
  std::vector<double> block(64);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x)
      block[static_cast<std::size_t>(y) * 8 + x] =
          std::sqrt(1.0 / 8) * std::sqrt(2.0 / 8) *
          std::cos((2.0 * x + 1.0) * 1.0 * 3.14159265358979323846 / 16.0);
  CHECK(spectral_entropy_block(block) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("spectral entropy: two equal-energy AC coefficients give 1 bit") {
  std::vector<double> block(64, 0.0);
  const double pi = 3.14159265358979323846;
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) {
      const double b01 = std::sqrt(1.0 / 8) * std::sqrt(2.0 / 8) *
                         std::cos((2.0 * x + 1.0) * pi / 16.0);
      const double b10 = std::sqrt(2.0 / 8) * std::sqrt(1.0 / 8) *
                         std::cos((2.0 * y + 1.0) * pi / 16.0);
      block[static_cast<std::size_t>(y) * 8 + x] = b01 + b10;
    }
  CHECK(spectral_entropy_block(block) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("spectral entropy of an all-zero block is 0 by convention") {
  std::vector<double> block(64, 0.0);
  CHECK(spectral_entropy_block(block) == 0.0);
}

TEST_CASE("blurring uniform noise strictly lowers mean spatial entropy") {
  Rng rng(1);
  ImageTensor noise(64, 64, 1);
  for (auto& v : noise.values) v = rng.uniform01();
  ImageTensor blurred(64, 64, 1);
  kernels::gaussian_blur(noise.values.data(), blurred.values.data(), 64, 64, 2.0);
  const auto fn = sseq_features(noise);
  const auto fb = sseq_features(blurred);
  CHECK(fb.v[0] < fn.v[0]);
}

TEST_CASE("features are deterministic and offset-invariant modulo binning") {
  auto img = random_image(64, 64, 1, 2);
  // snap to bin centers so a +10/256 shift moves every pixel one whole bin
  for (auto& v : img.values)
    v = (std::floor(v * 256.0) + 0.5) / 256.0 * (200.0 / 256.0);  // keep headroom
  const auto f1 = sseq_features(img);
  const auto f2 = sseq_features(img);
  for (std::size_t i = 0; i < 12; ++i) CHECK(f1.v[i] == f2.v[i]);

  ImageTensor shifted = img;
  for (auto& v : shifted.values) v += 10.0 / 256.0;
  const auto fs = sseq_features(shifted);
  CHECK(fs.v[0] == doctest::Approx(f1.v[0]).epsilon(1e-12));
  CHECK(fs.v[1] == doctest::Approx(f1.v[1]).epsilon(1e-9));
}

TEST_CASE("images below one coarse-scale block are rejected") {
  CHECK_THROWS_AS(sseq_features(ImageTensor(20, 64, 1)), ValidationError);
}

TEST_CASE("proxy score rises with film layers on a chart set") {
  double prev = -1e9;
  const auto chart = make_chart(64, 64, 3);
  const auto f_clear = sseq_features(chart);
  prev = quality_score(f_clear, std::nullopt).value;
  for (int layers = 1; layers <= 3; ++layers) {
    FilmFilterParams p;
    p.layers = layers;
    const auto filtered = apply_film_filter(chart, p);
    const double score = quality_score(sseq_features(filtered), std::nullopt).value;
    CHECK(score >= prev);
    prev = score;
  }
}

TEST_CASE("injected scores pass through unchanged") {
  CHECK(injected_score(42.7710).value == 42.7710);
  CHECK(injected_score(42.7710).source == "injected");
}

TEST_CASE("shadow ratio reproduces the published three-row arithmetic") {
  CHECK(shadow_ratio(injected_score(42.7710), injected_score(52.6125)) ==
        doctest::Approx(0.2301).epsilon(1e-4));
  CHECK(shadow_ratio(injected_score(42.7596), injected_score(58.4768)) ==
        doctest::Approx(0.3676).epsilon(1e-4));
  CHECK(shadow_ratio(injected_score(39.0658), injected_score(57.7562)) ==
        doctest::Approx(0.4784).epsilon(1e-4));
}

TEST_CASE("shadow ratio edge cases") {
  CHECK(shadow_ratio(injected_score(50.0), injected_score(50.0)) == 0.0);
  CHECK_THROWS_AS(shadow_ratio(injected_score(0.0), injected_score(1.0)),
                  ValidationError);
  QualityScore proxy{10.0, "proxy"};
  CHECK_THROWS_AS(shadow_ratio(injected_score(1.0), proxy), ValidationError);
}

TEST_CASE("affine regressor applies weights in the declared order") {
  const fs::path p = write_json(
      "shadowpose_regressor.json",
      R"({"type":"affine","weights":[1.0,2.0],"bias":5.0,"feature_order":[0,4]})");
  const Regressor r = load_regressor(p);
  SseqFeatures f;
  f.v[0] = 3.0;
  f.v[4] = 0.5;
  const auto q = quality_score(f, r);
  CHECK(q.value == doctest::Approx(5.0 + 3.0 + 1.0).epsilon(1e-12));
  CHECK(q.source == "regressor");
}

TEST_CASE("malformed regressor files are rejected") {
  const fs::path bad1 = write_json("shadowpose_regressor_bad1.json", "{not json");
  CHECK_THROWS_AS(load_regressor(bad1), ParseError);
  const fs::path bad2 =
      write_json("shadowpose_regressor_bad2.json", R"({"type":"rbf","weights":[1]})");
  CHECK_THROWS_AS(load_regressor(bad2), ValidationError);
  const fs::path bad3 = write_json(
      "shadowpose_regressor_bad3.json",
      R"({"type":"affine","weights":[1.0],"feature_order":[99]})");
  CHECK_THROWS_AS(load_regressor(bad3), ValidationError);
}

TEST_CASE("same features and config give identical scores") {
  const auto img = make_chart(64, 64, 9);
  const auto q1 = quality_score(sseq_features(img), std::nullopt);
  const auto q2 = quality_score(sseq_features(img), std::nullopt);
  CHECK(q1.value == q2.value);
}
