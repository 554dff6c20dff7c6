// SPDX-License-Identifier: Apache-2.0
#include "shadowpose/imaging.hpp"

#include <cmath>

#include "shadowpose/kernels.hpp"

namespace shadowpose {

ImageTensor to_grayscale(const ImageTensor& img) {
  if (img.channels != 3)
    throw ValidationError("to_grayscale: expected 3 channels, got " +
                          std::to_string(img.channels));
  ImageTensor out(img.height, img.width, 1);
  const std::size_t n = img.pixel_count();
  const double* src = img.values.data();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    const double* px = src + static_cast<std::size_t>(i) * 3;
    out.values[static_cast<std::size_t>(i)] =
        0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2];
  }
  return out;
}

WindowStats window_stats(const std::vector<double>& e, const std::vector<double>& c,
                         int h, int w, const SsimParams& p) {
  p.validate();
  const std::size_t n = static_cast<std::size_t>(h) * w;
  if (e.size() != n || c.size() != n)
    throw ValidationError("window_stats: plane size mismatch");
  WindowStats s;
  s.height = h;
  s.width = w;
  s.mu_e.resize(n);
  s.mu_c.resize(n);
  s.var_e.resize(n);
  s.var_c.resize(n);
  s.cov_ec.resize(n);

  std::vector<double> ee(n), cc(n), ec(n), m_ee(n), m_cc(n), m_ec(n);
  for (std::size_t i = 0; i < n; ++i) {
    ee[i] = e[i] * e[i];
    cc[i] = c[i] * c[i];
    ec[i] = e[i] * c[i];
  }
  kernels::box_mean(e.data(), s.mu_e.data(), h, w, p.window);
  kernels::box_mean(c.data(), s.mu_c.data(), h, w, p.window);
  kernels::box_mean(ee.data(), m_ee.data(), h, w, p.window);
  kernels::box_mean(cc.data(), m_cc.data(), h, w, p.window);
  kernels::box_mean(ec.data(), m_ec.data(), h, w, p.window);
  for (std::size_t i = 0; i < n; ++i) {
    s.var_e[i] = m_ee[i] - s.mu_e[i] * s.mu_e[i];
    s.var_c[i] = m_cc[i] - s.mu_c[i] * s.mu_c[i];
    s.cov_ec[i] = m_ec[i] - s.mu_e[i] * s.mu_c[i];
  }
  return s;
}

namespace {

// The numerator/denominator pairs are arranged so that when e == c they are
// computed by the same floating-point expressions, making the map exactly 1.
void ssim_plane(const WindowStats& s, const SsimParams& p, double* out) {
  const std::size_t n = static_cast<std::size_t>(s.height) * s.width;
  for (std::size_t i = 0; i < n; ++i) {
    const double dm = s.mu_e[i] - s.mu_c[i];
    const double a1 = 2.0 * (s.mu_e[i] * s.mu_c[i]) + p.d1;
    const double b1 = dm * dm + a1;  // mu_e^2 + mu_c^2 + d1
    const double a2 = 2.0 * s.cov_ec[i] + p.d2;
    const double b2 = (s.var_e[i] - s.cov_ec[i]) + (s.var_c[i] - s.cov_ec[i]) + a2;
    out[i] = (a1 * a2) / (b1 * b2);
  }
}

}  // namespace

ImageTensor ssim_map(const ImageTensor& e, const ImageTensor& c, const SsimParams& p) {
  require_same_shape(e, c, "ssim_map");
  p.validate();
  ImageTensor out(e.height, e.width, e.channels);
  std::vector<double> plane(e.pixel_count());
  for (int ch = 0; ch < e.channels; ++ch) {
    const auto pe = channel_plane(e, ch);
    const auto pc = channel_plane(c, ch);
    const WindowStats s = window_stats(pe, pc, e.height, e.width, p);
    ssim_plane(s, p, plane.data());
    set_channel(out, ch, plane);
  }
  return out;
}

double mean_ssim(const ImageTensor& e, const ImageTensor& c, const SsimParams& p) {
  const ImageTensor m = ssim_map(e, c, p);
  return deterministic_sum(m.values.data(), m.values.size()) /
         static_cast<double>(m.values.size());
}

ImageTensor sobel_edge_map(const ImageTensor& img) {
  const ImageTensor gray = img.channels == 3 ? to_grayscale(img) : img;
  const int h = gray.height, w = gray.width;
  std::vector<double> gx(gray.pixel_count()), gy(gray.pixel_count());
  kernels::sobel_gradients(gray.values.data(), gx.data(), gy.data(), h, w);
  ImageTensor out(h, w, 1);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(gray.pixel_count()); ++i) {
    const std::size_t k = static_cast<std::size_t>(i);
    out.values[k] = std::sqrt(gx[k] * gx[k] + gy[k] * gy[k]);
  }
  return out;
}

}  // namespace shadowpose
