// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "shadowpose/image.hpp"

namespace shadowpose {

struct SsimParams {
  int window = 11;       // odd, >= 3
  double d1 = 0.0001;    // luminance stability constant
  double d2 = 0.0009;    // contrast stability constant

  void validate() const {
    if (window < 3 || window % 2 == 0)
      throw ValidationError("SsimParams: window must be odd and >= 3, got " +
                            std::to_string(window));
    if (!(d1 > 0.0) || !(d2 > 0.0))
      throw ValidationError("SsimParams: d1 and d2 must be > 0");
  }
};

// Per-pixel local moments over the uniform window (one channel).
struct WindowStats {
  int height = 0, width = 0;
  std::vector<double> mu_e, mu_c, var_e, var_c, cov_ec;
};

// BT.601 luminance: 0.299 R + 0.587 G + 0.114 B.
ImageTensor to_grayscale(const ImageTensor& img);

WindowStats window_stats(const std::vector<double>& e, const std::vector<double>& c,
                         int h, int w, const SsimParams& p);

// Per-pixel, per-channel SSIM map; values in [-1, 1], exactly 1 where the
// inputs agree. Uniform window, reflective padding.
ImageTensor ssim_map(const ImageTensor& e, const ImageTensor& c, const SsimParams& p);

// Mean of ssim_map over pixels and channels.
double mean_ssim(const ImageTensor& e, const ImageTensor& c, const SsimParams& p);

// Sobel gradient magnitude of the luminance plane; same H x W, 1 channel.
ImageTensor sobel_edge_map(const ImageTensor& img);

}  // namespace shadowpose
