// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "shadowpose/image.hpp"

// Data-parallel pixel kernels. The default entry points are OpenMP-parallel;
// shadowpose::kernels::serial holds plain single-threaded reference versions
// with identical per-element arithmetic, kept for testing and benchmarking.
// Parallel and serial variants produce bit-identical results because every
// output element is owned by exactly one loop iteration and inner reduction
// order is fixed.
//
// Boundary conventions:
//   - imaging kernels (box_mean, sobel, gaussian_blur) reflect at borders
//     (edge-repeating mirror: a b c | c b a);
//   - network kernels (conv3x3, maxpool3) use CNN-style zero padding /
//     valid-window max.
namespace shadowpose::kernels {

// Uniform window mean, window x window, odd window >= 1.
void box_mean(const double* in, double* out, int h, int w, int window);
// Exact adjoint of box_mean (same reflection index map).
void box_mean_adjoint(const double* g, double* out, int h, int w, int window);

// 3x3 Sobel responses; gx detects horizontal gradients, gy vertical.
void sobel_gradients(const double* in, double* gx, double* gy, int h, int w);
// Adjoint: accumulates d(gx), d(gy) back onto the input plane.
void sobel_adjoint(const double* ggx, const double* ggy, double* out, int h, int w);

// Separable Gaussian, radius = ceil(3*sigma), sigma > 0.
void gaussian_blur(const double* in, double* out, int h, int w, double sigma);

// Planar (CHW) 3x3 convolution, stride 1, zero padding. wgt layout:
// [co][ci][3][3]; bias one per output channel.
void conv3x3_forward(const double* in, int ci, int h, int w, const double* wgt,
                     const double* bias, int co, double* out);
void conv3x3_backward_data(const double* gout, int co, int h, int w,
                           const double* wgt, int ci, double* gin);
// Accumulates into gw / gb (callers zero them once per batch).
void conv3x3_backward_filter(const double* in, int ci, const double* gout, int co,
                             int h, int w, double* gw, double* gb);

// 3x3 max pooling, stride 1, same size; max over the valid window. argmax
// stores the plane-local linear index of the winning element (first in
// ky,kx scan order on ties).
void maxpool3_forward(const double* in, int c, int h, int w, double* out,
                      std::int32_t* argmax);
void maxpool3_backward(const double* gout, const std::int32_t* argmax, int c,
                       int h, int w, double* gin);

// Half-pixel-centered bilinear resize (HWC image) and its adjoint.
ImageTensor resize_bilinear(const ImageTensor& in, int oh, int ow);
ImageTensor resize_bilinear_adjoint(const ImageTensor& g, int ih, int iw);

namespace serial {
void box_mean(const double* in, double* out, int h, int w, int window);
void box_mean_adjoint(const double* g, double* out, int h, int w, int window);
void sobel_gradients(const double* in, double* gx, double* gy, int h, int w);
void sobel_adjoint(const double* ggx, const double* ggy, double* out, int h, int w);
void gaussian_blur(const double* in, double* out, int h, int w, double sigma);
void conv3x3_forward(const double* in, int ci, int h, int w, const double* wgt,
                     const double* bias, int co, double* out);
void conv3x3_backward_data(const double* gout, int co, int h, int w,
                           const double* wgt, int ci, double* gin);
void conv3x3_backward_filter(const double* in, int ci, const double* gout, int co,
                             int h, int w, double* gw, double* gb);
void maxpool3_forward(const double* in, int c, int h, int w, double* out,
                      std::int32_t* argmax);
void maxpool3_backward(const double* gout, const std::int32_t* argmax, int c,
                       int h, int w, double* gin);
ImageTensor resize_bilinear(const ImageTensor& in, int oh, int ow);
}  // namespace serial

// Reflection index map shared by the imaging kernels and their oracles.
inline int reflect_index(int i, int n) {
  while (i < 0 || i >= n) {
    if (i < 0) i = -i - 1;
    if (i >= n) i = 2 * n - 1 - i;
  }
  return i;
}

}  // namespace shadowpose::kernels
