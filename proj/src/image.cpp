// SPDX-License-Identifier: Apache-2.0
#include "shadowpose/image.hpp"

namespace shadowpose {

std::vector<double> channel_plane(const ImageTensor& img, int c) {
  std::vector<double> plane(img.pixel_count());
  const int stride = img.channels;
  const double* src = img.values.data() + c;
  for (std::size_t i = 0; i < plane.size(); ++i) plane[i] = src[i * stride];
  return plane;
}

void set_channel(ImageTensor& img, int c, const std::vector<double>& plane) {
  if (plane.size() != img.pixel_count())
    throw ValidationError("set_channel: plane size does not match image");
  const int stride = img.channels;
  double* dst = img.values.data() + c;
  for (std::size_t i = 0; i < plane.size(); ++i) dst[i * stride] = plane[i];
}

}  // namespace shadowpose
