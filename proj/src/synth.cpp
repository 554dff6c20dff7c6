// SPDX-License-Identifier: Apache-2.0
#include "shadowpose/synth.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "shadowpose/kernels.hpp"

namespace shadowpose {

void FilmFilterParams::validate() const {
  if (layers < 1)
    throw ValidationError("FilmFilterParams.layers must be >= 1, got " +
                          std::to_string(layers));
  if (!(blur_sigma > 0.0))
    throw ValidationError("FilmFilterParams.blur_sigma must be > 0");
  if (!(scatter_alpha >= 0.0 && scatter_alpha < 1.0))
    throw ValidationError("FilmFilterParams.scatter_alpha must be in [0, 1)");
  if (!(contrast_gain > 0.0 && contrast_gain <= 1.0))
    throw ValidationError("FilmFilterParams.contrast_gain must be in (0, 1]");
  for (double c : light_color)
    if (!(c >= 0.0 && c <= 1.0))
      throw ValidationError("FilmFilterParams.light_color must be in [0, 1]");
}

void HazeParams::validate() const {
  for (double a : atmospheric_light)
    if (!(a >= 0.0 && a <= 1.0))
      throw ValidationError("HazeParams.atmospheric_light must be in [0, 1]");
  if (transmission_map) {
    if (transmission_map->channels != 1)
      throw ValidationError("HazeParams.transmission_map must have 1 channel");
    for (double t : transmission_map->values)
      if (!(t > 0.0 && t <= 1.0))
        throw ValidationError("HazeParams.transmission_map values must be in (0, 1]");
  } else if (!(transmission > 0.0 && transmission <= 1.0)) {
    throw ValidationError("HazeParams.transmission must be in (0, 1], got " +
                          std::to_string(transmission));
  }
}

ImageTensor apply_film_filter(const ImageTensor& img, const FilmFilterParams& p) {
  p.validate();
  if (img.channels != 3)
    throw ValidationError("apply_film_filter: expected 3 channels, got " +
                          std::to_string(img.channels));
  ImageTensor cur = img;
  const std::size_t npx = img.pixel_count();
  std::vector<double> plane(npx), blurred(npx);
  for (int layer = 0; layer < p.layers; ++layer) {
    for (int ch = 0; ch < 3; ++ch) {
      const int stride = cur.channels;
      double* base = cur.values.data() + ch;
      for (std::size_t i = 0; i < npx; ++i) plane[i] = base[i * stride];
      kernels::gaussian_blur(plane.data(), blurred.data(), cur.height, cur.width,
                             p.blur_sigma);
      // scatter blend toward the light color
      const double light = p.light_color[static_cast<std::size_t>(ch)];
      double mean = 0.0;
      for (std::size_t i = 0; i < npx; ++i) {
        blurred[i] = (1.0 - p.scatter_alpha) * blurred[i] + p.scatter_alpha * light;
        mean += blurred[i];
      }
      mean /= static_cast<double>(npx);
      // contrast reduction about the channel mean
      for (std::size_t i = 0; i < npx; ++i)
        base[i * stride] = mean + p.contrast_gain * (blurred[i] - mean);
    }
  }
  cur.clamp01();
  return cur;
}

ImageTensor synthesize_haze(const ImageTensor& clear, const HazeParams& h) {
  h.validate();
  if (h.transmission_map &&
      (h.transmission_map->height != clear.height ||
       h.transmission_map->width != clear.width))
    throw ValidationError("synthesize_haze: transmission map shape " +
                          h.transmission_map->shape_string() +
                          " does not match image " + clear.shape_string());
  ImageTensor out(clear.height, clear.width, clear.channels);
  const std::size_t npx = clear.pixel_count();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(npx); ++i) {
    const std::size_t k = static_cast<std::size_t>(i);
    const double t = h.transmission_map ? h.transmission_map->values[k] : h.transmission;
    for (int ch = 0; ch < clear.channels; ++ch) {
      const double a = h.atmospheric_light[static_cast<std::size_t>(ch % 3)];
      const double v = clear.values[k * clear.channels + ch] * t + a * (1.0 - t);
      out.values[k * clear.channels + ch] = std::clamp(v, 0.0, 1.0);
    }
  }
  return out;
}

ImageTensor make_chart(int h, int w, std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0xC4A27));
  ImageTensor img(h, w, 3);
  // oriented gradient background
  const double gx = rng.uniform(-1, 1), gy = rng.uniform(-1, 1);
  std::array<double, 3> base = {rng.uniform(0.25, 0.75), rng.uniform(0.25, 0.75),
                                rng.uniform(0.25, 0.75)};
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double g = 0.25 * (gx * x / std::max(1, w - 1) + gy * y / std::max(1, h - 1));
      for (int ch = 0; ch < 3; ++ch) img.at(y, x, ch) = base[static_cast<std::size_t>(ch)] + g;
    }
  // rectangles and ellipses
  const int shapes = 6 + static_cast<int>(rng.bounded(5));
  for (int s = 0; s < shapes; ++s) {
    const bool ellipse = rng.bounded(2) == 0;
    const int cx = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(w)));
    const int cy = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(h)));
    const int rx = 2 + static_cast<int>(rng.bounded(static_cast<std::uint64_t>(w / 3 + 1)));
    const int ry = 2 + static_cast<int>(rng.bounded(static_cast<std::uint64_t>(h / 3 + 1)));
    std::array<double, 3> col = {rng.uniform01(), rng.uniform01(), rng.uniform01()};
    for (int y = std::max(0, cy - ry); y < std::min(h, cy + ry); ++y)
      for (int x = std::max(0, cx - rx); x < std::min(w, cx + rx); ++x) {
        if (ellipse) {
          const double dx = (x - cx) / static_cast<double>(rx);
          const double dy = (y - cy) / static_cast<double>(ry);
          if (dx * dx + dy * dy > 1.0) continue;
        }
        for (int ch = 0; ch < 3; ++ch) img.at(y, x, ch) = col[static_cast<std::size_t>(ch)];
      }
  }
  // stripe band
  const int period = 3 + static_cast<int>(rng.bounded(5));
  const int band_y = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(std::max(1, h - h / 4))));
  for (int y = band_y; y < std::min(h, band_y + h / 4); ++y)
    for (int x = 0; x < w; ++x)
      if ((x / period) % 2 == 0)
        for (int ch = 0; ch < 3; ++ch)
          img.at(y, x, ch) = (ch == 0) ? 0.9 : 0.1;
  // texture noise
  for (auto& v : img.values) v += rng.uniform(-0.04, 0.04);
  img.clamp01();
  return img;
}

}  // namespace shadowpose
