// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "shadowpose/image.hpp"

namespace shadowpose {

// Parametric translucent-film simulator. Each layer applies, in order:
// Gaussian blur, a blend toward the global light color, and a
// mean-preserving contrast reduction. Layer count is the privacy knob.
struct FilmFilterParams {
  int layers = 1;
  double blur_sigma = 2.5;                           // pixels, per layer
  double scatter_alpha = 0.28;                       // blend weight toward light_color
  double contrast_gain = 0.80;                       // multiplicative, in (0, 1]
  std::array<double, 3> light_color = {0.92, 0.94, 0.97};
  std::uint64_t seed = 0;

  void validate() const;
};

// Atmospheric scattering model I = J*t + A*(1-t). Transmission is a scalar
// by default; a per-pixel map is accepted for depth-aware synthesis.
struct HazeParams {
  std::array<double, 3> atmospheric_light = {0.9, 0.9, 0.9};
  double transmission = 0.7;
  std::optional<ImageTensor> transmission_map;  // 1 channel, same H x W as input

  void validate() const;
};

ImageTensor apply_film_filter(const ImageTensor& img, const FilmFilterParams& p);
ImageTensor synthesize_haze(const ImageTensor& clear, const HazeParams& h);

// Deterministic synthetic test chart: gradient background, random rectangles,
// ellipses and stripe bands, mild texture noise. Used for desk-scale datasets.
ImageTensor make_chart(int h, int w, std::uint64_t seed);

}  // namespace shadowpose
