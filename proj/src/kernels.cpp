// SPDX-License-Identifier: Apache-2.0
#include "shadowpose/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

namespace shadowpose::kernels {

namespace {

using kernels::reflect_index;

// --- separable 1D passes (reflect boundary), used by the parallel kernels ---

void pass_horiz_row(const double* inrow, double* outrow, int w, const double* taps,
                    int radius) {
  for (int x = 0; x < w; ++x) {
    double s = 0.0;
    for (int t = -radius; t <= radius; ++t)
      s += taps[t + radius] * inrow[reflect_index(x + t, w)];
    outrow[x] = s;
  }
}

void pass_vert_row(const double* in, double* outrow, int h, int w, int y,
                   const double* taps, int radius) {
  for (int x = 0; x < w; ++x) outrow[x] = 0.0;
  for (int t = -radius; t <= radius; ++t) {
    const double* srcrow = in + static_cast<std::size_t>(reflect_index(y + t, h)) * w;
    const double k = taps[t + radius];
    for (int x = 0; x < w; ++x) outrow[x] += k * srcrow[x];
  }
}

// Adjoint of pass_horiz for one row: scatter within the row.
void adjoint_horiz_row(const double* grow, double* outrow, int w, const double* taps,
                       int radius) {
  for (int x = 0; x < w; ++x) {
    const double g = grow[x];
    for (int t = -radius; t <= radius; ++t)
      outrow[reflect_index(x + t, w)] += taps[t + radius] * g;
  }
}

// Adjoint of pass_vert for one column: scatter within the column.
void adjoint_vert_col(const double* g, double* out, int h, int w, int x,
                      const double* taps, int radius) {
  for (int y = 0; y < h; ++y) {
    const double gv = g[static_cast<std::size_t>(y) * w + x];
    for (int t = -radius; t <= radius; ++t)
      out[static_cast<std::size_t>(reflect_index(y + t, h)) * w + x] +=
          taps[t + radius] * gv;
  }
}

void separable_filter(const double* in, double* out, int h, int w,
                      const double* taps, int radius, bool parallel) {
  std::vector<double> tmp(static_cast<std::size_t>(h) * w);
#pragma omp parallel for schedule(static) if (parallel)
  for (int y = 0; y < h; ++y)
    pass_horiz_row(in + static_cast<std::size_t>(y) * w,
                   tmp.data() + static_cast<std::size_t>(y) * w, w, taps, radius);
#pragma omp parallel for schedule(static) if (parallel)
  for (int y = 0; y < h; ++y)
    pass_vert_row(tmp.data(), out + static_cast<std::size_t>(y) * w, h, w, y, taps,
                  radius);
}

// Adjoint of separable_filter: vertical adjoint first, then horizontal.
void separable_filter_adjoint(const double* g, double* out, int h, int w,
                              const double* taps, int radius, bool parallel) {
  std::vector<double> tmp(static_cast<std::size_t>(h) * w, 0.0);
#pragma omp parallel for schedule(static) if (parallel)
  for (int x = 0; x < w; ++x) adjoint_vert_col(g, tmp.data(), h, w, x, taps, radius);
  std::memset(out, 0, sizeof(double) * static_cast<std::size_t>(h) * w);
#pragma omp parallel for schedule(static) if (parallel)
  for (int y = 0; y < h; ++y)
    adjoint_horiz_row(tmp.data() + static_cast<std::size_t>(y) * w,
                      out + static_cast<std::size_t>(y) * w, w, taps, radius);
}

// Two-axis separable filter with distinct horizontal/vertical taps.
void separable_filter_hv(const double* in, double* out, int h, int w,
                         const double* htaps, const double* vtaps, int radius,
                         bool parallel) {
  std::vector<double> tmp(static_cast<std::size_t>(h) * w);
#pragma omp parallel for schedule(static) if (parallel)
  for (int y = 0; y < h; ++y)
    pass_horiz_row(in + static_cast<std::size_t>(y) * w,
                   tmp.data() + static_cast<std::size_t>(y) * w, w, htaps, radius);
#pragma omp parallel for schedule(static) if (parallel)
  for (int y = 0; y < h; ++y)
    pass_vert_row(tmp.data(), out + static_cast<std::size_t>(y) * w, h, w, y, vtaps,
                  radius);
}

void separable_filter_hv_adjoint(const double* g, double* out, int h, int w,
                                 const double* htaps, const double* vtaps, int radius,
                                 bool parallel) {
  std::vector<double> tmp(static_cast<std::size_t>(h) * w, 0.0);
#pragma omp parallel for schedule(static) if (parallel)
  for (int x = 0; x < w; ++x) adjoint_vert_col(g, tmp.data(), h, w, x, vtaps, radius);
#pragma omp parallel for schedule(static) if (parallel)
  for (int y = 0; y < h; ++y)
    adjoint_horiz_row(tmp.data() + static_cast<std::size_t>(y) * w,
                      out + static_cast<std::size_t>(y) * w, w, htaps, radius);
}

const double kSmoothTaps[3] = {1.0, 2.0, 1.0};
const double kDerivTaps[3] = {-1.0, 0.0, 1.0};

std::vector<double> gaussian_taps(double sigma, int* radius_out) {
  if (!(sigma > 0.0)) throw ValidationError("gaussian_blur: sigma must be > 0");
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int t = -radius; t <= radius; ++t) {
    const double v = std::exp(-0.5 * (t / sigma) * (t / sigma));
    taps[static_cast<std::size_t>(t + radius)] = v;
    sum += v;
  }
  for (auto& v : taps) v /= sum;
  *radius_out = radius;
  return taps;
}

// --- planar conv / pool workers ---

void conv3x3_forward_impl(const double* in, int ci, int h, int w, const double* wgt,
                          const double* bias, int co, double* out, bool parallel) {
  const std::size_t plane = static_cast<std::size_t>(h) * w;
#pragma omp parallel for schedule(static) if (parallel)
  for (int oc = 0; oc < co; ++oc) {
    double* op = out + static_cast<std::size_t>(oc) * plane;
    const double b = bias[oc];
    for (std::size_t i = 0; i < plane; ++i) op[i] = b;
    for (int ic = 0; ic < ci; ++ic) {
      const double* ip = in + static_cast<std::size_t>(ic) * plane;
      const double* k = wgt + (static_cast<std::size_t>(oc) * ci + ic) * 9;
      for (int y = 0; y < h; ++y) {
        double* orow = op + static_cast<std::size_t>(y) * w;
        for (int ky = 0; ky < 3; ++ky) {
          const int yy = y + ky - 1;
          if (yy < 0 || yy >= h) continue;
          const double* row = ip + static_cast<std::size_t>(yy) * w;
          const double k0 = k[ky * 3 + 0], k1 = k[ky * 3 + 1], k2 = k[ky * 3 + 2];
          for (int x = 1; x < w - 1; ++x)
            orow[x] += k0 * row[x - 1] + k1 * row[x] + k2 * row[x + 1];
          orow[0] += k1 * row[0] + (w > 1 ? k2 * row[1] : 0.0);
          if (w > 1) orow[w - 1] += k0 * row[w - 2] + k1 * row[w - 1];
        }
      }
    }
  }
}

void conv3x3_backward_data_impl(const double* gout, int co, int h, int w,
                                const double* wgt, int ci, double* gin,
                                bool parallel) {
  const std::size_t plane = static_cast<std::size_t>(h) * w;
#pragma omp parallel for schedule(static) if (parallel)
  for (int ic = 0; ic < ci; ++ic) {
    double* gp = gin + static_cast<std::size_t>(ic) * plane;
    for (std::size_t i = 0; i < plane; ++i) gp[i] = 0.0;
    for (int oc = 0; oc < co; ++oc) {
      const double* go = gout + static_cast<std::size_t>(oc) * plane;
      const double* k = wgt + (static_cast<std::size_t>(oc) * ci + ic) * 9;
      for (int y = 0; y < h; ++y) {
        double* grow = gp + static_cast<std::size_t>(y) * w;
        // gin[y][x] += sum_{dy,dx} gout[y+dy][x+dx] * w[1-dy][1-dx]
        for (int dy = -1; dy <= 1; ++dy) {
          const int yy = y + dy;
          if (yy < 0 || yy >= h) continue;
          const double* row = go + static_cast<std::size_t>(yy) * w;
          const double k0 = k[(1 - dy) * 3 + 2];  // dx = -1 -> kx = 2
          const double k1 = k[(1 - dy) * 3 + 1];
          const double k2 = k[(1 - dy) * 3 + 0];  // dx = +1 -> kx = 0
          for (int x = 1; x < w - 1; ++x)
            grow[x] += k0 * row[x - 1] + k1 * row[x] + k2 * row[x + 1];
          grow[0] += k1 * row[0] + (w > 1 ? k2 * row[1] : 0.0);
          if (w > 1) grow[w - 1] += k0 * row[w - 2] + k1 * row[w - 1];
        }
      }
    }
  }
}

void conv3x3_backward_filter_impl(const double* in, int ci, const double* gout,
                                  int co, int h, int w, double* gw, double* gb,
                                  bool parallel) {
  const std::size_t plane = static_cast<std::size_t>(h) * w;
#pragma omp parallel for schedule(static) if (parallel)
  for (int oc = 0; oc < co; ++oc) {
    const double* go = gout + static_cast<std::size_t>(oc) * plane;
    double bsum = 0.0;
    for (std::size_t i = 0; i < plane; ++i) bsum += go[i];
    gb[oc] += bsum;
    for (int ic = 0; ic < ci; ++ic) {
      const double* ip = in + static_cast<std::size_t>(ic) * plane;
      double* k = gw + (static_cast<std::size_t>(oc) * ci + ic) * 9;
      for (int ky = 0; ky < 3; ++ky) {
        for (int kx = 0; kx < 3; ++kx) {
          double s = 0.0;
          for (int y = 0; y < h; ++y) {
            const int yy = y + ky - 1;
            if (yy < 0 || yy >= h) continue;
            const double* grow = go + static_cast<std::size_t>(y) * w;
            const double* irow = ip + static_cast<std::size_t>(yy) * w;
            const int x0 = std::max(0, 1 - kx), x1 = std::min(w, w + 1 - kx);
            for (int x = x0; x < x1; ++x) s += grow[x] * irow[x + kx - 1];
          }
          k[ky * 3 + kx] += s;
        }
      }
    }
  }
}

void maxpool3_forward_impl(const double* in, int c, int h, int w, double* out,
                           std::int32_t* argmax, bool parallel) {
  const std::size_t plane = static_cast<std::size_t>(h) * w;
#pragma omp parallel for schedule(static) if (parallel)
  for (int ch = 0; ch < c; ++ch) {
    const double* ip = in + static_cast<std::size_t>(ch) * plane;
    double* op = out + static_cast<std::size_t>(ch) * plane;
    std::int32_t* ap = argmax + static_cast<std::size_t>(ch) * plane;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double best = -std::numeric_limits<double>::infinity();
        std::int32_t best_idx = 0;
        for (int dy = -1; dy <= 1; ++dy) {
          const int yy = y + dy;
          if (yy < 0 || yy >= h) continue;
          for (int dx = -1; dx <= 1; ++dx) {
            const int xx = x + dx;
            if (xx < 0 || xx >= w) continue;
            const double v = ip[static_cast<std::size_t>(yy) * w + xx];
            if (v > best) {
              best = v;
              best_idx = static_cast<std::int32_t>(yy * w + xx);
            }
          }
        }
        op[static_cast<std::size_t>(y) * w + x] = best;
        ap[static_cast<std::size_t>(y) * w + x] = best_idx;
      }
    }
  }
}

void maxpool3_backward_impl(const double* gout, const std::int32_t* argmax, int c,
                            int h, int w, double* gin, bool parallel) {
  const std::size_t plane = static_cast<std::size_t>(h) * w;
#pragma omp parallel for schedule(static) if (parallel)
  for (int ch = 0; ch < c; ++ch) {
    const double* go = gout + static_cast<std::size_t>(ch) * plane;
    const std::int32_t* ap = argmax + static_cast<std::size_t>(ch) * plane;
    double* gp = gin + static_cast<std::size_t>(ch) * plane;
    for (std::size_t i = 0; i < plane; ++i) gp[i] = 0.0;
    for (std::size_t i = 0; i < plane; ++i)
      gp[static_cast<std::size_t>(ap[i])] += go[i];
  }
}

ImageTensor resize_bilinear_impl(const ImageTensor& in, int oh, int ow,
                                 bool parallel) {
  if (oh <= 0 || ow <= 0) throw ValidationError("resize: target size must be positive");
  ImageTensor out(oh, ow, in.channels);
  const double sy = static_cast<double>(in.height) / oh;
  const double sx = static_cast<double>(in.width) / ow;
#pragma omp parallel for schedule(static) if (parallel)
  for (int y = 0; y < oh; ++y) {
    const double fy = (y + 0.5) * sy - 0.5;
    int y0 = static_cast<int>(std::floor(fy));
    double wy = fy - y0;
    int y1 = y0 + 1;
    y0 = std::clamp(y0, 0, in.height - 1);
    y1 = std::clamp(y1, 0, in.height - 1);
    for (int x = 0; x < ow; ++x) {
      const double fx = (x + 0.5) * sx - 0.5;
      int x0 = static_cast<int>(std::floor(fx));
      double wx = fx - x0;
      int x1 = x0 + 1;
      x0 = std::clamp(x0, 0, in.width - 1);
      x1 = std::clamp(x1, 0, in.width - 1);
      for (int ch = 0; ch < in.channels; ++ch) {
        const double v = (1.0 - wy) * ((1.0 - wx) * in.at(y0, x0, ch) + wx * in.at(y0, x1, ch)) +
                         wy * ((1.0 - wx) * in.at(y1, x0, ch) + wx * in.at(y1, x1, ch));
        out.at(y, x, ch) = v;
      }
    }
  }
  return out;
}

}  // namespace

// --- OpenMP-parallel entry points ---

void box_mean(const double* in, double* out, int h, int w, int window) {
  if (window < 1 || window % 2 == 0)
    throw ValidationError("box_mean: window must be odd and >= 1");
  const int radius = window / 2;
  std::vector<double> taps(static_cast<std::size_t>(window), 1.0 / window);
  separable_filter(in, out, h, w, taps.data(), radius, true);
}

void box_mean_adjoint(const double* g, double* out, int h, int w, int window) {
  const int radius = window / 2;
  std::vector<double> taps(static_cast<std::size_t>(window), 1.0 / window);
  separable_filter_adjoint(g, out, h, w, taps.data(), radius, true);
}

void sobel_gradients(const double* in, double* gx, double* gy, int h, int w) {
  if (h < 3 || w < 3)
    throw ValidationError("sobel: image must be at least 3x3, got " +
                          std::to_string(h) + "x" + std::to_string(w));
  separable_filter_hv(in, gx, h, w, kDerivTaps, kSmoothTaps, 1, true);
  separable_filter_hv(in, gy, h, w, kSmoothTaps, kDerivTaps, 1, true);
}

void sobel_adjoint(const double* ggx, const double* ggy, double* out, int h, int w) {
  std::vector<double> acc(static_cast<std::size_t>(h) * w);
  separable_filter_hv_adjoint(ggx, out, h, w, kDerivTaps, kSmoothTaps, 1, true);
  separable_filter_hv_adjoint(ggy, acc.data(), h, w, kSmoothTaps, kDerivTaps, 1, true);
  const std::size_t n = static_cast<std::size_t>(h) * w;
  for (std::size_t i = 0; i < n; ++i) out[i] += acc[i];
}

void gaussian_blur(const double* in, double* out, int h, int w, double sigma) {
  int radius = 0;
  const auto taps = gaussian_taps(sigma, &radius);
  separable_filter(in, out, h, w, taps.data(), radius, true);
}

void conv3x3_forward(const double* in, int ci, int h, int w, const double* wgt,
                     const double* bias, int co, double* out) {
  conv3x3_forward_impl(in, ci, h, w, wgt, bias, co, out, true);
}

void conv3x3_backward_data(const double* gout, int co, int h, int w,
                           const double* wgt, int ci, double* gin) {
  conv3x3_backward_data_impl(gout, co, h, w, wgt, ci, gin, true);
}

void conv3x3_backward_filter(const double* in, int ci, const double* gout, int co,
                             int h, int w, double* gw, double* gb) {
  conv3x3_backward_filter_impl(in, ci, gout, co, h, w, gw, gb, true);
}

void maxpool3_forward(const double* in, int c, int h, int w, double* out,
                      std::int32_t* argmax) {
  maxpool3_forward_impl(in, c, h, w, out, argmax, true);
}

void maxpool3_backward(const double* gout, const std::int32_t* argmax, int c, int h,
                       int w, double* gin) {
  maxpool3_backward_impl(gout, argmax, c, h, w, gin, true);
}

ImageTensor resize_bilinear(const ImageTensor& in, int oh, int ow) {
  return resize_bilinear_impl(in, oh, ow, true);
}

ImageTensor resize_bilinear_adjoint(const ImageTensor& g, int ih, int iw) {
  ImageTensor out(ih, iw, g.channels);
  const double sy = static_cast<double>(ih) / g.height;
  const double sx = static_cast<double>(iw) / g.width;
  // Scatter: channels are independent, positions within a channel collide.
#pragma omp parallel for schedule(static)
  for (int ch = 0; ch < g.channels; ++ch) {
    for (int y = 0; y < g.height; ++y) {
      const double fy = (y + 0.5) * sy - 0.5;
      int y0 = static_cast<int>(std::floor(fy));
      double wy = fy - y0;
      int y1 = y0 + 1;
      y0 = std::clamp(y0, 0, ih - 1);
      y1 = std::clamp(y1, 0, ih - 1);
      for (int x = 0; x < g.width; ++x) {
        const double fx = (x + 0.5) * sx - 0.5;
        int x0 = static_cast<int>(std::floor(fx));
        double wx = fx - x0;
        int x1 = x0 + 1;
        x0 = std::clamp(x0, 0, iw - 1);
        x1 = std::clamp(x1, 0, iw - 1);
        const double gv = g.at(y, x, ch);
        out.at(y0, x0, ch) += (1.0 - wy) * (1.0 - wx) * gv;
        out.at(y0, x1, ch) += (1.0 - wy) * wx * gv;
        out.at(y1, x0, ch) += wy * (1.0 - wx) * gv;
        out.at(y1, x1, ch) += wy * wx * gv;
      }
    }
  }
  return out;
}

// --- serial reference implementations (naive direct forms) ---

namespace serial {

void box_mean(const double* in, double* out, int h, int w, int window) {
  if (window < 1 || window % 2 == 0)
    throw ValidationError("box_mean: window must be odd and >= 1");
  const int r = window / 2;
  const double inv = 1.0 / (static_cast<double>(window) * window);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx)
          s += in[static_cast<std::size_t>(reflect_index(y + dy, h)) * w +
                  reflect_index(x + dx, w)];
      out[static_cast<std::size_t>(y) * w + x] = s * inv;
    }
  }
}

void box_mean_adjoint(const double* g, double* out, int h, int w, int window) {
  const int r = window / 2;
  const double inv = 1.0 / (static_cast<double>(window) * window);
  std::memset(out, 0, sizeof(double) * static_cast<std::size_t>(h) * w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double gv = g[static_cast<std::size_t>(y) * w + x] * inv;
      for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx)
          out[static_cast<std::size_t>(reflect_index(y + dy, h)) * w +
              reflect_index(x + dx, w)] += gv;
    }
}

void sobel_gradients(const double* in, double* gx, double* gy, int h, int w) {
  if (h < 3 || w < 3)
    throw ValidationError("sobel: image must be at least 3x3, got " +
                          std::to_string(h) + "x" + std::to_string(w));
  static const double kx[3][3] = {{-1, 0, 1}, {-2, 0, 2}, {-1, 0, 1}};
  static const double ky[3][3] = {{-1, -2, -1}, {0, 0, 0}, {1, 2, 1}};
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double sx = 0.0, sy = 0.0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const double v = in[static_cast<std::size_t>(reflect_index(y + dy, h)) * w +
                              reflect_index(x + dx, w)];
          sx += kx[dy + 1][dx + 1] * v;
          sy += ky[dy + 1][dx + 1] * v;
        }
      gx[static_cast<std::size_t>(y) * w + x] = sx;
      gy[static_cast<std::size_t>(y) * w + x] = sy;
    }
}

void sobel_adjoint(const double* ggx, const double* ggy, double* out, int h, int w) {
  static const double kx[3][3] = {{-1, 0, 1}, {-2, 0, 2}, {-1, 0, 1}};
  static const double ky[3][3] = {{-1, -2, -1}, {0, 0, 0}, {1, 2, 1}};
  std::memset(out, 0, sizeof(double) * static_cast<std::size_t>(h) * w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double gxv = ggx[static_cast<std::size_t>(y) * w + x];
      const double gyv = ggy[static_cast<std::size_t>(y) * w + x];
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx)
          out[static_cast<std::size_t>(reflect_index(y + dy, h)) * w +
              reflect_index(x + dx, w)] +=
              kx[dy + 1][dx + 1] * gxv + ky[dy + 1][dx + 1] * gyv;
    }
}

void gaussian_blur(const double* in, double* out, int h, int w, double sigma) {
  int radius = 0;
  const auto taps = gaussian_taps(sigma, &radius);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx)
          s += taps[static_cast<std::size_t>(dy + radius)] *
               taps[static_cast<std::size_t>(dx + radius)] *
               in[static_cast<std::size_t>(reflect_index(y + dy, h)) * w +
                  reflect_index(x + dx, w)];
      out[static_cast<std::size_t>(y) * w + x] = s;
    }
}

void conv3x3_forward(const double* in, int ci, int h, int w, const double* wgt,
                     const double* bias, int co, double* out) {
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  for (int oc = 0; oc < co; ++oc)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double s = bias[oc];
        for (int ic = 0; ic < ci; ++ic)
          for (int ky = 0; ky < 3; ++ky)
            for (int kx = 0; kx < 3; ++kx) {
              const int yy = y + ky - 1, xx = x + kx - 1;
              if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
              s += in[static_cast<std::size_t>(ic) * plane + static_cast<std::size_t>(yy) * w + xx] *
                   wgt[(static_cast<std::size_t>(oc) * ci + ic) * 9 + ky * 3 + kx];
            }
        out[static_cast<std::size_t>(oc) * plane + static_cast<std::size_t>(y) * w + x] = s;
      }
}

void conv3x3_backward_data(const double* gout, int co, int h, int w,
                           const double* wgt, int ci, double* gin) {
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  std::memset(gin, 0, sizeof(double) * static_cast<std::size_t>(ci) * plane);
  for (int oc = 0; oc < co; ++oc)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const double g = gout[static_cast<std::size_t>(oc) * plane + static_cast<std::size_t>(y) * w + x];
        for (int ic = 0; ic < ci; ++ic)
          for (int ky = 0; ky < 3; ++ky)
            for (int kx = 0; kx < 3; ++kx) {
              const int yy = y + ky - 1, xx = x + kx - 1;
              if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
              gin[static_cast<std::size_t>(ic) * plane + static_cast<std::size_t>(yy) * w + xx] +=
                  g * wgt[(static_cast<std::size_t>(oc) * ci + ic) * 9 + ky * 3 + kx];
            }
      }
}

void conv3x3_backward_filter(const double* in, int ci, const double* gout, int co,
                             int h, int w, double* gw, double* gb) {
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  for (int oc = 0; oc < co; ++oc)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const double g = gout[static_cast<std::size_t>(oc) * plane + static_cast<std::size_t>(y) * w + x];
        gb[oc] += g;
        for (int ic = 0; ic < ci; ++ic)
          for (int ky = 0; ky < 3; ++ky)
            for (int kx = 0; kx < 3; ++kx) {
              const int yy = y + ky - 1, xx = x + kx - 1;
              if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
              gw[(static_cast<std::size_t>(oc) * ci + ic) * 9 + ky * 3 + kx] +=
                  g * in[static_cast<std::size_t>(ic) * plane + static_cast<std::size_t>(yy) * w + xx];
            }
      }
}

void maxpool3_forward(const double* in, int c, int h, int w, double* out,
                      std::int32_t* argmax) {
  maxpool3_forward_impl(in, c, h, w, out, argmax, false);
}

void maxpool3_backward(const double* gout, const std::int32_t* argmax, int c, int h,
                       int w, double* gin) {
  maxpool3_backward_impl(gout, argmax, c, h, w, gin, false);
}

ImageTensor resize_bilinear(const ImageTensor& in, int oh, int ow) {
  return resize_bilinear_impl(in, oh, ow, false);
}

}  // namespace serial

}  // namespace shadowpose::kernels
