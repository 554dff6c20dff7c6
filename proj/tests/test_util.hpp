// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <vector>

#include "shadowpose/common.hpp"
#include "shadowpose/image.hpp"

namespace test_util {

inline shadowpose::ImageTensor random_image(int h, int w, int c, std::uint64_t seed) {
  shadowpose::Rng rng(seed);
  shadowpose::ImageTensor img(h, w, c);
  for (auto& v : img.values) v = rng.uniform01();
  return img;
}

inline std::vector<double> random_plane(int h, int w, std::uint64_t seed) {
  shadowpose::Rng rng(seed);
  std::vector<double> p(static_cast<std::size_t>(h) * w);
  for (auto& v : p) v = rng.uniform01();
  return p;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace test_util
