// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>

#include "shadowpose/extractor.hpp"
#include "shadowpose/image.hpp"
#include "shadowpose/imaging.hpp"

namespace shadowpose {

struct LossToggles {
  bool use_structural = true;
  bool use_perceptual = true;
  bool use_edge = true;

  void validate() const {
    if (!use_structural && !use_perceptual && !use_edge)
      throw ValidationError("loss toggles: at least one term must be enabled");
  }
};

struct LossOptions {
  SsimParams ssim;
  // Eq-style norms are unnormalized Euclidean norms by default; these switch
  // the feature / edge terms to ||d|| / sqrt(N).
  bool normalize_feature_norm = false;
  bool normalize_edge_norm = false;
  // When a term is toggled off: compute it for reporting (true) or skip it
  // entirely and report 0 (false). Never enters the total either way.
  bool report_disabled_terms = false;
};

// Per-term values; total is exactly the sum of the enabled terms.
struct LossBreakdown {
  double sl = 0.0;
  double pl_mse = 0.0;
  double pl_mae = 0.0;
  double pl_feat = 0.0;
  double pl = 0.0;  // pl_mse + 2*pl_mae + pl_feat
  double el = 0.0;
  double total = 0.0;
};

struct PerceptualParts {
  double mse = 0.0, mae = 0.0, feat = 0.0, combined = 0.0;
};

// 1 - mean per-channel windowed similarity; in [0, 2], 0 iff e == c windows.
double structural_loss(const ImageTensor& e, const ImageTensor& c, const SsimParams& p);
double structural_loss_grad(const ImageTensor& e, const ImageTensor& c,
                            const SsimParams& p, ImageTensor& grad_e);

PerceptualParts perceptual_loss(const ImageTensor& e, const ImageTensor& c,
                                const FeatureExtractor& phi,
                                const LossOptions& opt = {});
PerceptualParts perceptual_loss_grad(const ImageTensor& e, const ImageTensor& c,
                                     const FeatureExtractor& phi, ImageTensor& grad_e,
                                     const LossOptions& opt = {});

double edge_loss(const ImageTensor& e, const ImageTensor& c, const LossOptions& opt = {});
double edge_loss_grad(const ImageTensor& e, const ImageTensor& c, ImageTensor& grad_e,
                      const LossOptions& opt = {});

LossBreakdown composite_loss(const ImageTensor& e, const ImageTensor& c,
                             const LossToggles& toggles, const FeatureExtractor& phi,
                             const LossOptions& opt = {});
LossBreakdown composite_loss_grad(const ImageTensor& e, const ImageTensor& c,
                                  const LossToggles& toggles,
                                  const FeatureExtractor& phi, ImageTensor& grad_e,
                                  const LossOptions& opt = {});

}  // namespace shadowpose
