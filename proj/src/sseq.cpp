// SPDX-License-Identifier: Apache-2.0
#include "shadowpose/sseq.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "shadowpose/imaging.hpp"

namespace shadowpose {

namespace {

constexpr int kBlock = 8;
constexpr int kBins = 256;

// orthonormal DCT-II basis, row u evaluated at sample y
const std::array<std::array<double, kBlock>, kBlock>& dct_basis() {
  static const auto basis = [] {
    std::array<std::array<double, kBlock>, kBlock> b{};
    for (int u = 0; u < kBlock; ++u) {
      const double a = u == 0 ? std::sqrt(1.0 / kBlock) : std::sqrt(2.0 / kBlock);
      for (int y = 0; y < kBlock; ++y)
        b[static_cast<std::size_t>(u)][static_cast<std::size_t>(y)] =
            a * std::cos((2.0 * y + 1.0) * u * 3.14159265358979323846 / (2.0 * kBlock));
    }
    return b;
  }();
  return basis;
}

double shannon_bits(const double* p, int n) {
  double h = 0.0;
  for (int i = 0; i < n; ++i)
    if (p[i] > 0.0) h -= p[i] * std::log2(p[i]);
  return h;
}

std::vector<double> downsample2(const std::vector<double>& in, int h, int w, int* oh,
                                int* ow) {
  *oh = h / 2;
  *ow = w / 2;
  std::vector<double> out(static_cast<std::size_t>(*oh) * *ow);
  for (int y = 0; y < *oh; ++y)
    for (int x = 0; x < *ow; ++x)
      out[static_cast<std::size_t>(y) * *ow + x] =
          0.25 * (in[static_cast<std::size_t>(2 * y) * w + 2 * x] +
                  in[static_cast<std::size_t>(2 * y) * w + 2 * x + 1] +
                  in[static_cast<std::size_t>(2 * y + 1) * w + 2 * x] +
                  in[static_cast<std::size_t>(2 * y + 1) * w + 2 * x + 1]);
  return out;
}

struct PooledStats {
  double mean = 0.0;
  double skew = 0.0;
};

// Keep the central 60% of the sorted list, then mean and standardized skew.
PooledStats pool_central(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  const std::size_t lo = static_cast<std::size_t>(0.2 * static_cast<double>(n));
  const std::size_t hi = n - lo;
  PooledStats stats;
  const std::size_t m = hi - lo;
  for (std::size_t i = lo; i < hi; ++i) stats.mean += values[i];
  stats.mean /= static_cast<double>(m);
  double m2 = 0.0, m3 = 0.0;
  for (std::size_t i = lo; i < hi; ++i) {
    const double d = values[i] - stats.mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= static_cast<double>(m);
  m3 /= static_cast<double>(m);
  stats.skew = m2 > 1e-300 ? m3 / std::pow(m2, 1.5) : 0.0;
  return stats;
}

}  // namespace

double spatial_entropy_block(std::span<const double> block) {
  std::array<double, kBins> hist{};
  for (double v : block) {
    int bin = static_cast<int>(v * kBins);
    if (bin < 0) bin = 0;
    if (bin >= kBins) bin = kBins - 1;
    hist[static_cast<std::size_t>(bin)] += 1.0;
  }
  const double n = static_cast<double>(block.size());
  for (auto& h : hist) h /= n;
  return shannon_bits(hist.data(), kBins);
}

double spectral_entropy_block(std::span<const double> block8x8) {
  if (block8x8.size() != kBlock * kBlock)
    throw ValidationError("spectral_entropy_block expects an 8x8 block");
  const auto& basis = dct_basis();
  // C = B X B^T
  std::array<double, kBlock * kBlock> tmp{}, coeff{};
  for (int u = 0; u < kBlock; ++u)
    for (int x = 0; x < kBlock; ++x) {
      double s = 0.0;
      for (int y = 0; y < kBlock; ++y)
        s += basis[static_cast<std::size_t>(u)][static_cast<std::size_t>(y)] *
             block8x8[static_cast<std::size_t>(y) * kBlock + x];
      tmp[static_cast<std::size_t>(u) * kBlock + x] = s;
    }
  for (int u = 0; u < kBlock; ++u)
    for (int v = 0; v < kBlock; ++v) {
      double s = 0.0;
      for (int x = 0; x < kBlock; ++x)
        s += tmp[static_cast<std::size_t>(u) * kBlock + x] *
             basis[static_cast<std::size_t>(v)][static_cast<std::size_t>(x)];
      coeff[static_cast<std::size_t>(u) * kBlock + v] = s;
    }
  double total = 0.0;
  std::array<double, kBlock * kBlock> p{};
  for (int i = 1; i < kBlock * kBlock; ++i) {  // index 0 is DC
    const std::size_t u = static_cast<std::size_t>(i) / kBlock;
    const std::size_t v = static_cast<std::size_t>(i) % kBlock;
    if (u == 0 && v == 0) continue;
    const double e = coeff[u * kBlock + v] * coeff[u * kBlock + v];
    p[static_cast<std::size_t>(i)] = e;
    total += e;
  }
  // guard: DCT rounding noise on flat blocks is ~1e-28 energy, real content
  // is many orders above this
  if (total <= 1e-20) return 0.0;  // no AC energy
  for (auto& e : p) e /= total;
  return shannon_bits(p.data(), kBlock * kBlock);
}

SseqFeatures sseq_features(const ImageTensor& img) {
  const ImageTensor gray = img.channels == 3 ? to_grayscale(img) : img;
  SseqFeatures f;
  std::vector<double> plane = gray.values;
  int h = gray.height, w = gray.width;
  for (int scale = 0; scale < 3; ++scale) {
    if (h < kBlock || w < kBlock)
      throw ValidationError("sseq_features: image too small for one 8x8 block at scale " +
                            std::to_string(scale) + " (" + std::to_string(h) + "x" +
                            std::to_string(w) + ")");
    std::vector<double> spatial, spectral;
    std::array<double, kBlock * kBlock> block{};
    for (int by = 0; by + kBlock <= h; by += kBlock)
      for (int bx = 0; bx + kBlock <= w; bx += kBlock) {
        for (int y = 0; y < kBlock; ++y)
          for (int x = 0; x < kBlock; ++x)
            block[static_cast<std::size_t>(y) * kBlock + x] =
                plane[static_cast<std::size_t>(by + y) * w + (bx + x)];
        spatial.push_back(spatial_entropy_block(block));
        spectral.push_back(spectral_entropy_block(block));
      }
    const PooledStats sp = pool_central(std::move(spatial));
    const PooledStats se = pool_central(std::move(spectral));
    f.v[static_cast<std::size_t>(4 * scale)] = sp.mean;
    f.v[static_cast<std::size_t>(4 * scale + 1)] = sp.skew;
    f.v[static_cast<std::size_t>(4 * scale + 2)] = se.mean;
    f.v[static_cast<std::size_t>(4 * scale + 3)] = se.skew;
    if (scale < 2) {
      int oh = 0, ow = 0;
      plane = downsample2(plane, h, w, &oh, &ow);
      h = oh;
      w = ow;
    }
  }
  for (double v : f.v)
    if (!std::isfinite(v)) throw ValidationError("sseq_features: non-finite feature");
  return f;
}

QualityScore injected_score(double value) { return {value, "injected"}; }

double Regressor::apply(const SseqFeatures& f) const {
  double s = bias;
  for (std::size_t i = 0; i < weights.size(); ++i)
    s += weights[i] * f.v[static_cast<std::size_t>(feature_order[i])];
  return s;
}

Regressor load_regressor(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open regressor '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& err) {
    throw ParseError("regressor '" + path.string() + "': " + err.what());
  }
  Regressor r;
  r.type = j.value("type", "");
  if (r.type != "affine")
    throw ValidationError("regressor '" + path.string() +
                          "': unsupported type '" + r.type + "' (expected 'affine')");
  if (!j.contains("weights") || !j.at("weights").is_array())
    throw ValidationError("regressor: missing 'weights' array");
  r.weights = j.at("weights").get<std::vector<double>>();
  r.bias = j.value("bias", 0.0);
  if (j.contains("feature_order"))
    r.feature_order = j.at("feature_order").get<std::vector<int>>();
  else {
    r.feature_order.resize(r.weights.size());
    for (std::size_t i = 0; i < r.feature_order.size(); ++i)
      r.feature_order[i] = static_cast<int>(i);
  }
  if (r.feature_order.size() != r.weights.size())
    throw ValidationError("regressor: weights and feature_order sizes differ");
  for (int idx : r.feature_order)
    if (idx < 0 || idx >= 12)
      throw ValidationError("regressor: feature_order index out of range");
  return r;
}

QualityScore quality_score(const SseqFeatures& f,
                           const std::optional<Regressor>& regressor) {
  if (regressor) return {regressor->apply(f), "regressor"};
  // max spatial entropy with 256 bins over a 64-sample block is 6 bits, but
  // normalize against the 8-bit histogram ceiling for a stable [0,100] range
  const double mean_spatial = (f.v[0] + f.v[4] + f.v[8]) / 3.0;
  return {100.0 * (1.0 - mean_spatial / 8.0), "proxy"};
}

double shadow_ratio(const QualityScore& clear, const QualityScore& shadow) {
  if (clear.source != shadow.source)
    throw ValidationError("shadow_ratio: scores come from different sources ('" +
                          clear.source + "' vs '" + shadow.source + "')");
  if (clear.value == 0.0)
    throw ValidationError("shadow_ratio: clear score is zero (division by zero)");
  return (shadow.value - clear.value) / clear.value;
}

}  // namespace shadowpose
