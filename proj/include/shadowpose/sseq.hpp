// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shadowpose/image.hpp"

namespace shadowpose {

// No-reference quality features: block spatial/spectral entropies pooled
// over 3 dyadic scales. Layout per scale s in {0,1,2}:
//   [4s] spatial mean, [4s+1] spatial skew, [4s+2] spectral mean, [4s+3] spectral skew.
struct SseqFeatures {
  std::array<double, 12> v{};
};

// Shannon entropy (bits) of the 256-bin intensity histogram of one block.
double spatial_entropy_block(std::span<const double> block);

// Shannon entropy (bits) of the normalized squared 8x8 DCT-II coefficients,
// DC excluded; 0 by convention when there is no AC energy.
double spectral_entropy_block(std::span<const double> block8x8);

// Requires at least one 8x8 block at the coarsest (quarter) scale,
// i.e. min(h, w) >= 32.
SseqFeatures sseq_features(const ImageTensor& img);

struct QualityScore {
  double value = 0.0;
  std::string source;  // injected | regressor | proxy
};

QualityScore injected_score(double value);

struct Regressor {
  std::string type;  // "affine"
  std::vector<double> weights;
  double bias = 0.0;
  std::vector<int> feature_order;

  double apply(const SseqFeatures& f) const;
};

Regressor load_regressor(const std::filesystem::path& path);

// With a regressor: its score. Otherwise a proxy, 100 * (1 - normalized mean
// spatial entropy), oriented so degradation increases the value.
QualityScore quality_score(const SseqFeatures& f,
                           const std::optional<Regressor>& regressor);

// (shadow - clear) / clear; both scores must come from the same source.
double shadow_ratio(const QualityScore& clear, const QualityScore& shadow);

}  // namespace shadowpose
