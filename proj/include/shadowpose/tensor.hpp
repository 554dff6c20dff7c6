// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "shadowpose/image.hpp"

namespace shadowpose {

// Planar (CHW) tensor used by the network kernels.
struct Tensor {
  int channels = 0, height = 0, width = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(int c, int h, int w)
      : channels(c), height(h), width(w),
        data(static_cast<std::size_t>(c) * h * w, 0.0) {}

  std::size_t plane_size() const { return static_cast<std::size_t>(height) * width; }
  std::size_t size() const { return data.size(); }
  double* plane(int c) { return data.data() + static_cast<std::size_t>(c) * plane_size(); }
  const double* plane(int c) const {
    return data.data() + static_cast<std::size_t>(c) * plane_size();
  }
  bool same_shape(const Tensor& o) const {
    return channels == o.channels && height == o.height && width == o.width;
  }
};

inline Tensor to_planar(const ImageTensor& img) {
  Tensor t(img.channels, img.height, img.width);
  const std::size_t npx = img.pixel_count();
  for (int c = 0; c < img.channels; ++c) {
    double* p = t.plane(c);
    const double* src = img.values.data() + c;
    for (std::size_t i = 0; i < npx; ++i) p[i] = src[i * img.channels];
  }
  return t;
}

inline ImageTensor to_image(const Tensor& t, bool clamp = false) {
  ImageTensor img(t.height, t.width, t.channels);
  const std::size_t npx = img.pixel_count();
  for (int c = 0; c < t.channels; ++c) {
    const double* p = t.plane(c);
    double* dst = img.values.data() + c;
    for (std::size_t i = 0; i < npx; ++i) dst[i * t.channels] = p[i];
  }
  if (clamp) img.clamp01();
  return img;
}

}  // namespace shadowpose
