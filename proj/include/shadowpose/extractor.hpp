// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "shadowpose/image.hpp"

namespace shadowpose {

// Frozen feature map used by the perceptual loss. Implementations are
// deterministic and immutable after construction; feature_grad applies the
// transpose Jacobian, which is all the loss needs.
class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;
  virtual std::string name() const = 0;
  // Declared input size; 0 means any size is accepted as-is.
  virtual int input_height() const { return 0; }
  virtual int input_width() const { return 0; }
  virtual std::vector<double> features(const ImageTensor& img) const = 0;
  virtual ImageTensor feature_grad(const ImageTensor& img,
                                   const std::vector<double>& dfeat) const = 0;
};

// phi(x) = x. Keeps the perceptual term purely pixel-space.
class IdentityExtractor final : public FeatureExtractor {
 public:
  std::string name() const override { return "identity"; }
  std::vector<double> features(const ImageTensor& img) const override {
    return img.values;
  }
  ImageTensor feature_grad(const ImageTensor& img,
                           const std::vector<double>& dfeat) const override;
};

// Fixed random linear map with hash-derived coefficients; the test stub.
// P[k][j] = (2 u(seed,k,j) - 1) / sqrt(n_in), features = P x.
class StubLinearExtractor final : public FeatureExtractor {
 public:
  explicit StubLinearExtractor(std::uint64_t seed = 0, int out_dim = 32)
      : seed_(seed), out_dim_(out_dim) {}
  std::string name() const override { return "stub"; }
  std::vector<double> features(const ImageTensor& img) const override;
  ImageTensor feature_grad(const ImageTensor& img,
                           const std::vector<double>& dfeat) const override;
  double coefficient(std::size_t k, std::size_t j, std::size_t n_in) const;

 private:
  std::uint64_t seed_;
  int out_dim_;
};

// Conv/ReLU stack with weights loaded from an archive file (format in
// docs/extractor_format.md). Stands in for a pretrained-backbone slice;
// declared input normalization is applied inside.
class ConvStackExtractor final : public FeatureExtractor {
 public:
  struct Layer {
    std::string name;
    int in_ch = 0, out_ch = 0, stride = 1;
    bool relu = true;
    std::vector<double> w, b;
  };

  static ConvStackExtractor load(const std::filesystem::path& path);

  std::string name() const override { return "conv_stack:" + source_; }
  int input_height() const override { return input_h_; }
  int input_width() const override { return input_w_; }
  std::vector<double> features(const ImageTensor& img) const override;
  ImageTensor feature_grad(const ImageTensor& img,
                           const std::vector<double>& dfeat) const override;

  // Writes an archive in the documented format (also used by tests).
  static void save(const std::filesystem::path& path, const std::vector<Layer>& layers,
                   const std::array<double, 3>& norm_mean,
                   const std::array<double, 3>& norm_std, int input_h, int input_w);

 private:
  std::string source_;
  int input_h_ = 0, input_w_ = 0;
  std::array<double, 3> norm_mean_ = {0.0, 0.0, 0.0};
  std::array<double, 3> norm_std_ = {1.0, 1.0, 1.0};
  std::vector<Layer> layers_;
};

// spec: "identity" | "stub" | "stub:<seed>" | "file:<path>"
std::shared_ptr<FeatureExtractor> make_extractor(const std::string& spec);

}  // namespace shadowpose
