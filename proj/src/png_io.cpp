// SPDX-License-Identifier: Apache-2.0
#include "shadowpose/png_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <vector>

namespace shadowpose {

ImageTensor read_png(const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str()))
    throw IoError("failed to open PNG '" + path.string() + "': " + image.message);

  const bool gray = (image.format & PNG_FORMAT_FLAG_COLOR) == 0;
  image.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  const int channels = gray ? 1 : 3;
  std::vector<unsigned char> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    png_image_free(&image);
    throw IoError("failed to decode PNG '" + path.string() + "': " + image.message);
  }

  ImageTensor img(static_cast<int>(image.height), static_cast<int>(image.width),
                  channels);
  for (std::size_t i = 0; i < img.values.size(); ++i) img.values[i] = buffer[i] / 255.0;
  return img;
}

void write_png(const std::filesystem::path& path, const ImageTensor& img) {
  img.check_dims();
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  image.format = img.channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;

  std::vector<unsigned char> buffer(img.values.size());
  for (std::size_t i = 0; i < buffer.size(); ++i) {
    double v = img.values[i];
    if (v < 0.0) v = 0.0;
    if (v > 1.0) v = 1.0;
    buffer[i] = static_cast<unsigned char>(std::lround(v * 255.0));
  }
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, buffer.data(), 0,
                               nullptr))
    throw IoError("failed to write PNG '" + path.string() + "': " + image.message);
}

ImageTensor quantize8(const ImageTensor& img) {
  ImageTensor out = img;
  for (auto& v : out.values) {
    double c = v;
    if (c < 0.0) c = 0.0;
    if (c > 1.0) c = 1.0;
    v = std::lround(c * 255.0) / 255.0;
  }
  return out;
}

}  // namespace shadowpose
