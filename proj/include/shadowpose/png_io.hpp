// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>

#include "shadowpose/image.hpp"

namespace shadowpose {

// 8-bit PNG decode; gray and gray+alpha load as 1 channel, everything else
// as 3 (alpha dropped). Values scaled to [0,1].
ImageTensor read_png(const std::filesystem::path& path);

// 8-bit PNG encode, round(v*255) quantization, deterministic bytes.
void write_png(const std::filesystem::path& path, const ImageTensor& img);

// Quantize to the 8-bit grid the codec stores, without touching disk.
ImageTensor quantize8(const ImageTensor& img);

}  // namespace shadowpose
