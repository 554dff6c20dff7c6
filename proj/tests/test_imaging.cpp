// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "shadowpose/imaging.hpp"
#include "shadowpose/kernels.hpp"
#include "test_util.hpp"

using namespace shadowpose;
using test_util::random_image;

namespace {

// Brute-force windowed-SSIM oracle: explicit per-pixel window gather with the
// same reflection rule, plain population moments, direct formula evaluation.
double ssim_oracle_at(const ImageTensor& e, const ImageTensor& c, int y, int x,
                      int ch, const SsimParams& p) {
  const int r = p.window / 2;
  std::vector<double> we, wc;
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx) {
      const int yy = kernels::reflect_index(y + dy, e.height);
      const int xx = kernels::reflect_index(x + dx, e.width);
      we.push_back(e.at(yy, xx, ch));
      wc.push_back(c.at(yy, xx, ch));
    }
  const double n = static_cast<double>(we.size());
  double mu_e = 0, mu_c = 0;
  for (std::size_t i = 0; i < we.size(); ++i) {
    mu_e += we[i];
    mu_c += wc[i];
  }
  mu_e /= n;
  mu_c /= n;
  double ve = 0, vc = 0, cov = 0;
  for (std::size_t i = 0; i < we.size(); ++i) {
    ve += (we[i] - mu_e) * (we[i] - mu_e);
    vc += (wc[i] - mu_c) * (wc[i] - mu_c);
    cov += (we[i] - mu_e) * (wc[i] - mu_c);
  }
  ve /= n;
  vc /= n;
  cov /= n;
  return ((2 * mu_e * mu_c + p.d1) * (2 * cov + p.d2)) /
         ((mu_e * mu_e + mu_c * mu_c + p.d1) * (ve + vc + p.d2));
}

// Direct 3x3 tap convolution oracle for the Sobel magnitude.
double sobel_oracle_at(const ImageTensor& gray, int y, int x) {
  static const double kx[3][3] = {{-1, 0, 1}, {-2, 0, 2}, {-1, 0, 1}};
  static const double ky[3][3] = {{-1, -2, -1}, {0, 0, 0}, {1, 2, 1}};
  double gx = 0, gy = 0;
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx) {
      const double v = gray.at(kernels::reflect_index(y + dy, gray.height),
                               kernels::reflect_index(x + dx, gray.width), 0);
      gx += kx[dy + 1][dx + 1] * v;
      gy += ky[dy + 1][dx + 1] * v;
    }
  return std::sqrt(gx * gx + gy * gy);
}

}  // namespace

TEST_CASE("to_grayscale: white maps to ones, red to 0.299") {
  const auto white = ImageTensor::constant(4, 5, 3, 1.0);
  const auto g = to_grayscale(white);
  CHECK(g.channels == 1);
  CHECK(g.height == 4);
  CHECK(g.width == 5);
  for (double v : g.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));

  ImageTensor red(4, 5, 3);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 5; ++x) red.at(y, x, 0) = 1.0;
  const auto gr = to_grayscale(red);
  for (double v : gr.values) CHECK(v == doctest::Approx(0.299).epsilon(1e-12));
}

TEST_CASE("to_grayscale matches the per-pixel weighted-sum oracle exactly") {
  const auto img = random_image(8, 8, 3, 11);
  const auto g = to_grayscale(img);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) {
      const double want =
          0.299 * img.at(y, x, 0) + 0.587 * img.at(y, x, 1) + 0.114 * img.at(y, x, 2);
      CHECK(g.at(y, x, 0) == want);
    }
}

TEST_CASE("to_grayscale rejects single-channel input") {
  CHECK_THROWS_AS(to_grayscale(ImageTensor(4, 4, 1)), ValidationError);
}

TEST_CASE("ssim_map(e, e) is exactly 1 everywhere") {
  const auto e = random_image(16, 16, 3, 1);
  const auto m = ssim_map(e, e, SsimParams{});
  for (double v : m.values) CHECK(v == 1.0);
}

TEST_CASE("ssim_map on constant 0 vs constant 1") {
  const auto e = ImageTensor::constant(16, 16, 3, 0.0);
  const auto c = ImageTensor::constant(16, 16, 3, 1.0);
  const auto m = ssim_map(e, c, SsimParams{});
  // d1 / (1 + d1) with d1 = 1e-4
  for (double v : m.values) CHECK(v == doctest::Approx(9.9990000999e-5).epsilon(1e-6));
}

TEST_CASE("ssim_map matches the brute-force windowed oracle") {
  const SsimParams p;
  const auto e = random_image(16, 16, 3, 2);
  const auto c = random_image(16, 16, 3, 3);
  const auto m = ssim_map(e, c, p);
  double worst = 0.0;
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x)
      for (int ch = 0; ch < 3; ++ch)
        worst = std::max(worst,
                         std::abs(m.at(y, x, ch) - ssim_oracle_at(e, c, y, x, ch, p)));
  CHECK(worst < 1e-6);
}

TEST_CASE("ssim_map is symmetric in its arguments") {
  const auto a = random_image(12, 14, 3, 4);
  const auto b = random_image(12, 14, 3, 5);
  const auto ab = ssim_map(a, b, SsimParams{});
  const auto ba = ssim_map(b, a, SsimParams{});
  for (std::size_t i = 0; i < ab.values.size(); ++i) CHECK(ab.values[i] == ba.values[i]);
}

TEST_CASE("ssim_map values stay within [-1, 1]") {
  const auto a = random_image(20, 20, 1, 6);
  const auto b = random_image(20, 20, 1, 7);
  const auto m = ssim_map(a, b, SsimParams{});
  for (double v : m.values) {
    CHECK(v <= 1.0);
    CHECK(v >= -1.0);
  }
}

TEST_CASE("ssim_map rejects shape mismatch naming both shapes") {
  const auto a = random_image(8, 8, 3, 8);
  const auto b = random_image(8, 9, 3, 9);
  try {
    ssim_map(a, b, SsimParams{});
    FAIL("expected ValidationError");
  } catch (const ValidationError& err) {
    const std::string msg = err.what();
    CHECK(msg.find("8x8x3") != std::string::npos);
    CHECK(msg.find("8x9x3") != std::string::npos);
  }
}

TEST_CASE("window_stats variances are non-negative up to tolerance") {
  const auto e = random_image(10, 10, 1, 12);
  const auto c = random_image(10, 10, 1, 13);
  const auto s = window_stats(e.values, c.values, 10, 10, SsimParams{});
  for (double v : s.var_e) CHECK(v >= -1e-9);
  for (double v : s.var_c) CHECK(v >= -1e-9);
}

TEST_CASE("sobel_edge_map of a constant image is zero") {
  const auto img = ImageTensor::constant(9, 9, 3, 0.42);
  const auto m = sobel_edge_map(img);
  for (double v : m.values) CHECK(v <= 1e-9);
}

TEST_CASE("sobel_edge_map of a horizontal ramp has constant interior response") {
  const int w = 9, h = 6;
  ImageTensor img(h, w, 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img.at(y, x, 0) = static_cast<double>(x) / (w - 1);
  const auto m = sobel_edge_map(img);
  const double want = 8.0 / (w - 1);
  for (int y = 0; y < h; ++y)
    for (int x = 1; x < w - 1; ++x)
      CHECK(m.at(y, x, 0) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("sobel_edge_map matches the direct convolution oracle on a point image") {
  ImageTensor img(5, 5, 1);
  img.at(2, 2, 0) = 1.0;
  const auto m = sobel_edge_map(img);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 5; ++x)
      CHECK(m.at(y, x, 0) == doctest::Approx(sobel_oracle_at(img, y, x)).epsilon(1e-12));
}

TEST_CASE("sobel_edge_map is non-negative and positive somewhere for non-constant input") {
  const auto img = random_image(8, 8, 3, 14);
  const auto m = sobel_edge_map(img);
  double maxv = 0.0;
  for (double v : m.values) {
    CHECK(v >= 0.0);
    maxv = std::max(maxv, v);
  }
  CHECK(maxv > 1e-9);
}

TEST_CASE("sobel_edge_map rejects images smaller than 3x3") {
  CHECK_THROWS_AS(sobel_edge_map(ImageTensor(2, 5, 1)), ValidationError);
}
