// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>

#include "shadowpose/imaging.hpp"
#include "shadowpose/losses.hpp"
#include "test_util.hpp"

using namespace shadowpose;
using test_util::random_image;

namespace {

// Central finite differences w.r.t. every element of e.
ImageTensor fd_gradient(const std::function<double(const ImageTensor&)>& f,
                        const ImageTensor& e, double h = 1e-6) {
  ImageTensor g(e.height, e.width, e.channels);
  ImageTensor probe = e;
  for (std::size_t i = 0; i < e.values.size(); ++i) {
    probe.values[i] = e.values[i] + h;
    const double up = f(probe);
    probe.values[i] = e.values[i] - h;
    const double down = f(probe);
    probe.values[i] = e.values[i];
    g.values[i] = (up - down) / (2.0 * h);
  }
  return g;
}

double relative_grad_error(const ImageTensor& analytic, const ImageTensor& fd) {
  double max_diff = 0.0, max_ref = 0.0;
  for (std::size_t i = 0; i < analytic.values.size(); ++i) {
    max_diff = std::max(max_diff, std::abs(analytic.values[i] - fd.values[i]));
    max_ref = std::max(max_ref, std::abs(fd.values[i]));
  }
  return max_diff / std::max(max_ref, 1e-12);
}

}  // namespace

TEST_CASE("structural loss is 0 at e == c and ~1 for 0-vs-1 constants") {
  const auto e = random_image(16, 16, 3, 1);
  CHECK(structural_loss(e, e, SsimParams{}) == 0.0);

  const auto zero = ImageTensor::constant(16, 16, 3, 0.0);
  const auto one = ImageTensor::constant(16, 16, 3, 1.0);
  CHECK(structural_loss(zero, one, SsimParams{}) ==
        doctest::Approx(1.0 - 9.9990000999e-5).epsilon(1e-8));
}

TEST_CASE("structural loss equals 1 - mean of the ssim map") {
  const auto e = random_image(16, 16, 3, 2);
  const auto c = random_image(16, 16, 3, 3);
  const auto m = ssim_map(e, c, SsimParams{});
  double mean = 0.0;
  for (double v : m.values) mean += v;
  mean /= static_cast<double>(m.values.size());
  CHECK(structural_loss(e, c, SsimParams{}) == doctest::Approx(1.0 - mean).epsilon(1e-7));
}

TEST_CASE("structural loss stays in [0, 2]") {
  for (std::uint64_t s = 0; s < 8; ++s) {
    const auto e = random_image(12, 12, 3, 100 + s);
    const auto c = random_image(12, 12, 3, 200 + s);
    const double v = structural_loss(e, c, SsimParams{});
    CHECK(v >= 0.0);
    CHECK(v <= 2.0);
  }
}

TEST_CASE("structural loss gradient matches finite differences") {
  const auto e = random_image(8, 8, 3, 4);
  const auto c = random_image(8, 8, 3, 5);
  ImageTensor analytic;
  const double loss = structural_loss_grad(e, c, SsimParams{}, analytic);
  CHECK(loss == doctest::Approx(structural_loss(e, c, SsimParams{})).epsilon(1e-10));
  const auto fd = fd_gradient(
      [&](const ImageTensor& probe) { return structural_loss(probe, c, SsimParams{}); }, e);
  CHECK(relative_grad_error(analytic, fd) < 1e-5);
}

TEST_CASE("perceptual loss is zero at e == c") {
  const auto e = random_image(8, 8, 3, 6);
  IdentityExtractor id;
  const auto parts = perceptual_loss(e, e, id);
  CHECK(parts.mse == 0.0);
  CHECK(parts.mae == 0.0);
  CHECK(parts.feat == 0.0);
  CHECK(parts.combined == 0.0);
}

TEST_CASE("perceptual loss constant-image arithmetic with the identity extractor") {
  const auto e = ImageTensor::constant(8, 8, 3, 0.0);
  const auto c = ImageTensor::constant(8, 8, 3, 0.5);
  IdentityExtractor id;
  const auto parts = perceptual_loss(e, c, id);
  const double m = 8.0 * 8.0 * 3.0;
  CHECK(parts.mse == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(parts.mae == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(parts.feat == doctest::Approx(std::sqrt(m * 0.25)).epsilon(1e-12));
  CHECK(parts.combined ==
        doctest::Approx(0.25 + 1.0 + std::sqrt(m * 0.25)).epsilon(1e-12));
}

TEST_CASE("perceptual loss matches a hand computation with the stub extractor") {
  const auto e = random_image(6, 6, 3, 7);
  const auto c = random_image(6, 6, 3, 8);
  StubLinearExtractor stub(123, 32);
  const auto parts = perceptual_loss(e, c, stub);

  const std::size_t n = e.values.size();
  double se = 0.0, sa = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = e.values[i] - c.values[i];
    se += d * d;
    sa += std::abs(d);
  }
  double sf = 0.0;
  for (std::size_t k = 0; k < 32; ++k) {
    double fe = 0.0, fc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      fe += stub.coefficient(k, j, n) * e.values[j];
      fc += stub.coefficient(k, j, n) * c.values[j];
    }
    sf += (fe - fc) * (fe - fc);
  }
  const double want = se / n + 2.0 * (sa / n) + std::sqrt(sf);
  CHECK(parts.combined == doctest::Approx(want).epsilon(1e-6));
}

TEST_CASE("pixel terms (mse + 2 mae) gradient matches finite differences") {
  const auto e = random_image(8, 8, 3, 9);
  const auto c = random_image(8, 8, 3, 10);
  // stub with 0 output channels is not allowed; use identity and subtract the
  // feature part by evaluating the pixel terms directly
  IdentityExtractor id;
  ImageTensor analytic;
  perceptual_loss_grad(e, c, id, analytic);
  // isolate: with the identity extractor, combined = mse + 2 mae + ||e-c||;
  // check the full combined against finite differences instead
  const auto fd = fd_gradient(
      [&](const ImageTensor& probe) { return perceptual_loss(probe, c, id).combined; }, e);
  CHECK(relative_grad_error(analytic, fd) < 1e-5);
}

TEST_CASE("perceptual gradient with the stub extractor matches finite differences") {
  const auto e = random_image(8, 8, 3, 11);
  const auto c = random_image(8, 8, 3, 12);
  StubLinearExtractor stub(7, 32);
  ImageTensor analytic;
  perceptual_loss_grad(e, c, stub, analytic);
  const auto fd = fd_gradient(
      [&](const ImageTensor& probe) { return perceptual_loss(probe, c, stub).combined; },
      e);
  CHECK(relative_grad_error(analytic, fd) < 1e-5);
}

TEST_CASE("edge loss trivia: zero at e == c and for constant pairs") {
  const auto e = random_image(8, 8, 3, 13);
  CHECK(edge_loss(e, e) == 0.0);
  // documented insensitivity: Sobel kills constants
  const auto a = ImageTensor::constant(8, 8, 3, 0.2);
  const auto b = ImageTensor::constant(8, 8, 3, 0.9);
  CHECK(edge_loss(a, b) <= 1e-9);
}

TEST_CASE("edge loss equals the norm of the edge-map difference") {
  const auto e = random_image(10, 10, 3, 14);
  const auto c = random_image(10, 10, 3, 15);
  const auto me = sobel_edge_map(e);
  const auto mc = sobel_edge_map(c);
  double s = 0.0;
  for (std::size_t i = 0; i < me.values.size(); ++i) {
    const double d = me.values[i] - mc.values[i];
    s += d * d;
  }
  CHECK(edge_loss(e, c) == doctest::Approx(std::sqrt(s)).epsilon(1e-12));
}

TEST_CASE("edge loss gradient matches finite differences") {
  const auto e = random_image(8, 8, 3, 16);
  const auto c = random_image(8, 8, 3, 17);
  ImageTensor analytic;
  const double v = edge_loss_grad(e, c, analytic);
  CHECK(v == doctest::Approx(edge_loss(e, c)).epsilon(1e-12));
  const auto fd =
      fd_gradient([&](const ImageTensor& probe) { return edge_loss(probe, c); }, e);
  CHECK(relative_grad_error(analytic, fd) < 1e-5);
}

TEST_CASE("composite loss additivity holds for all 7 toggle combinations") {
  const auto e = random_image(8, 8, 3, 18);
  const auto c = random_image(8, 8, 3, 19);
  StubLinearExtractor stub(3, 32);
  for (int mask = 1; mask < 8; ++mask) {
    LossToggles t;
    t.use_structural = mask & 1;
    t.use_perceptual = mask & 2;
    t.use_edge = mask & 4;
    const auto b = composite_loss(e, c, t, stub);
    const double want = (t.use_structural ? b.sl : 0.0) +
                        (t.use_perceptual ? b.pl : 0.0) + (t.use_edge ? b.el : 0.0);
    CHECK(b.total == want);  // exact: total is computed as this sum
    CHECK(b.total == doctest::Approx(b.sl + b.pl + b.el -
                                     (t.use_structural ? 0.0 : b.sl) -
                                     (t.use_perceptual ? 0.0 : b.pl) -
                                     (t.use_edge ? 0.0 : b.el))
                         .epsilon(1e-7));
  }
}

TEST_CASE("composite loss with all terms disabled is rejected") {
  const auto e = random_image(8, 8, 3, 20);
  StubLinearExtractor stub;
  LossToggles t;
  t.use_structural = t.use_perceptual = t.use_edge = false;
  CHECK_THROWS_AS(composite_loss(e, e, t, stub), ValidationError);
}

TEST_CASE("composite loss at e == c is zero with all terms on") {
  const auto e = random_image(8, 8, 3, 21);
  StubLinearExtractor stub;
  const auto b = composite_loss(e, e, LossToggles{}, stub);
  CHECK(b.total == 0.0);
}

TEST_CASE("disabled terms are excluded from the total but reportable") {
  const auto e = random_image(8, 8, 3, 22);
  const auto c = random_image(8, 8, 3, 23);
  StubLinearExtractor stub;
  LossToggles t;
  t.use_structural = false;
  LossOptions opt;
  opt.report_disabled_terms = true;
  const auto b = composite_loss(e, c, t, stub, opt);
  CHECK(b.sl > 0.0);                       // computed for reporting
  CHECK(b.total == b.pl + b.el);           // but excluded from the sum
}

TEST_CASE("composite gradient equals the sum of enabled term gradients") {
  const auto e = random_image(8, 8, 3, 24);
  const auto c = random_image(8, 8, 3, 25);
  StubLinearExtractor stub(9, 32);
  LossToggles t;
  t.use_perceptual = false;
  ImageTensor g_comp, g_sl, g_el;
  const auto b = composite_loss_grad(e, c, t, stub, g_comp);
  structural_loss_grad(e, c, SsimParams{}, g_sl);
  edge_loss_grad(e, c, g_el);
  CHECK(b.total == doctest::Approx(b.sl + b.el).epsilon(1e-12));
  for (std::size_t i = 0; i < g_comp.values.size(); ++i)
    CHECK(g_comp.values[i] ==
          doctest::Approx(g_sl.values[i] + g_el.values[i]).epsilon(1e-10));
}

TEST_CASE("every term is non-negative on random pairs") {
  for (std::uint64_t s = 0; s < 4; ++s) {
    const auto e = random_image(9, 9, 3, 300 + s);
    const auto c = random_image(9, 9, 3, 400 + s);
    StubLinearExtractor stub;
    const auto b = composite_loss(e, c, LossToggles{}, stub);
    CHECK(b.sl >= 0.0);
    CHECK(b.pl_mse >= 0.0);
    CHECK(b.pl_mae >= 0.0);
    CHECK(b.pl_feat >= 0.0);
    CHECK(b.el >= 0.0);
  }
}

TEST_CASE("mean-normalization options rescale the norm terms") {
  const auto e = random_image(8, 8, 3, 26);
  const auto c = random_image(8, 8, 3, 27);
  LossOptions raw, normed;
  normed.normalize_edge_norm = true;
  const double n = 8.0 * 8.0;
  CHECK(edge_loss(e, c, normed) ==
        doctest::Approx(edge_loss(e, c, raw) / std::sqrt(n)).epsilon(1e-12));

  StubLinearExtractor stub(5, 32);
  normed.normalize_feature_norm = true;
  const auto p_raw = perceptual_loss(e, c, stub, raw);
  const auto p_norm = perceptual_loss(e, c, stub, normed);
  CHECK(p_norm.feat == doctest::Approx(p_raw.feat / std::sqrt(32.0)).epsilon(1e-12));
}
