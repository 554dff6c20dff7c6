// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include "shadowpose/common.hpp"

namespace shadowpose {

// H x W x C image, channel-last (interleaved) layout, values nominally in
// [0, 1]. Operations that promise normalized output clamp before returning;
// intermediate tensors (e.g. network activations under a loss) may exceed
// the range.
struct ImageTensor {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<double> values;

  ImageTensor() = default;
  ImageTensor(int h, int w, int c)
      : height(h), width(w), channels(c),
        values(static_cast<std::size_t>(h) * w * c, 0.0) {
    check_dims();
  }

  static ImageTensor constant(int h, int w, int c, double v) {
    ImageTensor img(h, w, c);
    for (auto& x : img.values) x = v;
    return img;
  }

  double& at(int y, int x, int c) {
    return values[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  double at(int y, int x, int c) const {
    return values[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }

  std::size_t size() const { return values.size(); }
  std::size_t pixel_count() const { return static_cast<std::size_t>(height) * width; }

  bool same_shape(const ImageTensor& o) const {
    return height == o.height && width == o.width && channels == o.channels;
  }

  void check_dims() const {
    if (height <= 0 || width <= 0)
      throw ValidationError("image dimensions must be positive, got " +
                            std::to_string(height) + "x" + std::to_string(width));
    if (channels != 1 && channels != 3)
      throw ValidationError("channels must be 1 or 3, got " + std::to_string(channels));
  }

  void clamp01() {
    for (auto& v : values) {
      if (v < 0.0) v = 0.0;
      if (v > 1.0) v = 1.0;
    }
  }

  std::string shape_string() const {
    return std::to_string(height) + "x" + std::to_string(width) + "x" +
           std::to_string(channels);
  }
};

inline void require_same_shape(const ImageTensor& a, const ImageTensor& b,
                               const char* what) {
  if (!a.same_shape(b))
    throw ValidationError(std::string(what) + ": shape mismatch, " +
                          a.shape_string() + " vs " + b.shape_string());
}

// Extract channel c as a contiguous plane (row-major H*W).
std::vector<double> channel_plane(const ImageTensor& img, int c);
void set_channel(ImageTensor& img, int c, const std::vector<double>& plane);

}  // namespace shadowpose
