// SPDX-License-Identifier: Apache-2.0
#include "shadowpose/losses.hpp"

#include <cmath>

#include "shadowpose/kernels.hpp"

namespace shadowpose {

double structural_loss(const ImageTensor& e, const ImageTensor& c, const SsimParams& p) {
  require_same_shape(e, c, "structural_loss");
  if (e.channels != 3)
    throw ValidationError("structural_loss: expected 3 channels, got " +
                          std::to_string(e.channels));
  return 1.0 - mean_ssim(e, c, p);
}

double structural_loss_grad(const ImageTensor& e, const ImageTensor& c,
                            const SsimParams& p, ImageTensor& grad_e) {
  require_same_shape(e, c, "structural_loss");
  if (e.channels != 3)
    throw ValidationError("structural_loss: expected 3 channels, got " +
                          std::to_string(e.channels));
  p.validate();
  const int h = e.height, w = e.width;
  const std::size_t n = e.pixel_count();
  grad_e = ImageTensor(h, w, e.channels);
  // d(loss)/d(ssim at pixel/channel) = -1 / (channels * pixels)
  const double u = -1.0 / (static_cast<double>(e.channels) * static_cast<double>(n));

  double loss_sum = 0.0;
  std::vector<double> m_e(n), m_c(n), m_ee(n), m_cc(n), m_ec(n);
  std::vector<double> bm(n), bq(n), br(n), tmp(n), grad_plane(n), work(n);
  for (int ch = 0; ch < e.channels; ++ch) {
    const auto pe = channel_plane(e, ch);
    const auto pc = channel_plane(c, ch);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = pe[i] * pe[i];
    kernels::box_mean(tmp.data(), m_ee.data(), h, w, p.window);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = pc[i] * pc[i];
    kernels::box_mean(tmp.data(), m_cc.data(), h, w, p.window);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = pe[i] * pc[i];
    kernels::box_mean(tmp.data(), m_ec.data(), h, w, p.window);
    kernels::box_mean(pe.data(), m_e.data(), h, w, p.window);
    kernels::box_mean(pc.data(), m_c.data(), h, w, p.window);

    for (std::size_t i = 0; i < n; ++i) {
      const double mu_e = m_e[i], mu_c = m_c[i];
      const double var_e = m_ee[i] - mu_e * mu_e;
      const double var_c = m_cc[i] - mu_c * mu_c;
      const double cov = m_ec[i] - mu_e * mu_c;
      const double a1 = 2.0 * mu_e * mu_c + p.d1;
      const double b1 = mu_e * mu_e + mu_c * mu_c + p.d1;
      const double a2 = 2.0 * cov + p.d2;
      const double b2 = var_e + var_c + p.d2;
      const double inv_bb = 1.0 / (b1 * b2);
      const double s = a1 * a2 * inv_bb;
      loss_sum += s;
      // partials w.r.t. the three e-dependent box outputs:
      //   m = box(e), q = box(e*e), r = box(e*c)
      const double s_m = 2.0 * mu_c * (a2 - a1) * inv_bb + 2.0 * mu_e * s * (1.0 / b2 - 1.0 / b1);
      const double s_q = -s / b2;
      const double s_r = 2.0 * a1 * inv_bb;
      bm[i] = u * s_m;
      bq[i] = u * s_q;
      br[i] = u * s_r;
    }
    kernels::box_mean_adjoint(bm.data(), grad_plane.data(), h, w, p.window);
    kernels::box_mean_adjoint(bq.data(), work.data(), h, w, p.window);
    for (std::size_t i = 0; i < n; ++i) grad_plane[i] += 2.0 * pe[i] * work[i];
    kernels::box_mean_adjoint(br.data(), work.data(), h, w, p.window);
    for (std::size_t i = 0; i < n; ++i) grad_plane[i] += pc[i] * work[i];
    set_channel(grad_e, ch, grad_plane);
  }
  return 1.0 - loss_sum / (static_cast<double>(e.channels) * static_cast<double>(n));
}

namespace {

std::vector<double> extractor_features(const FeatureExtractor& phi, const ImageTensor& img,
                                       ImageTensor* resized_out) {
  const int ih = phi.input_height(), iw = phi.input_width();
  if (ih > 0 && iw > 0 && (img.height != ih || img.width != iw)) {
    ImageTensor resized = kernels::resize_bilinear(img, ih, iw);
    if (resized_out) *resized_out = resized;
    return phi.features(resized);
  }
  if (resized_out) *resized_out = img;
  return phi.features(resized_out ? *resized_out : img);
}

}  // namespace

PerceptualParts perceptual_loss(const ImageTensor& e, const ImageTensor& c,
                                const FeatureExtractor& phi, const LossOptions& opt) {
  require_same_shape(e, c, "perceptual_loss");
  PerceptualParts parts;
  const std::size_t n = e.values.size();
  double se = 0.0, sa = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = e.values[i] - c.values[i];
    se += d * d;
    sa += std::abs(d);
  }
  parts.mse = se / static_cast<double>(n);
  parts.mae = sa / static_cast<double>(n);

  std::vector<double> fe, fc;
  try {
    fe = extractor_features(phi, e, nullptr);
    fc = extractor_features(phi, c, nullptr);
  } catch (const std::exception& err) {
    throw ValidationError("perceptual_loss: extractor '" + phi.name() +
                          "' failed: " + err.what());
  }
  double sf = 0.0;
  for (std::size_t i = 0; i < fe.size(); ++i) {
    const double d = fe[i] - fc[i];
    sf += d * d;
  }
  parts.feat = std::sqrt(sf);
  if (opt.normalize_feature_norm)
    parts.feat /= std::sqrt(static_cast<double>(fe.size()));
  parts.combined = parts.mse + 2.0 * parts.mae + parts.feat;
  return parts;
}

PerceptualParts perceptual_loss_grad(const ImageTensor& e, const ImageTensor& c,
                                     const FeatureExtractor& phi, ImageTensor& grad_e,
                                     const LossOptions& opt) {
  require_same_shape(e, c, "perceptual_loss");
  const std::size_t n = e.values.size();
  grad_e = ImageTensor(e.height, e.width, e.channels);
  PerceptualParts parts;

  double se = 0.0, sa = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = e.values[i] - c.values[i];
    se += d * d;
    sa += std::abs(d);
    // d(mse)/de = 2 d / n ; d(2*mae)/de = 2 sign(d) / n
    const double sign = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
    grad_e.values[i] = (2.0 * d + 2.0 * sign) / static_cast<double>(n);
  }
  parts.mse = se / static_cast<double>(n);
  parts.mae = sa / static_cast<double>(n);

  ImageTensor e_in, c_in;
  std::vector<double> fe, fc;
  try {
    fe = extractor_features(phi, e, &e_in);
    fc = extractor_features(phi, c, &c_in);
  } catch (const std::exception& err) {
    throw ValidationError("perceptual_loss: extractor '" + phi.name() +
                          "' failed: " + err.what());
  }
  double sf = 0.0;
  std::vector<double> dfeat(fe.size());
  for (std::size_t i = 0; i < fe.size(); ++i) {
    dfeat[i] = fe[i] - fc[i];
    sf += dfeat[i] * dfeat[i];
  }
  const double raw = std::sqrt(sf);
  const double scale = opt.normalize_feature_norm
                           ? 1.0 / std::sqrt(static_cast<double>(fe.size()))
                           : 1.0;
  parts.feat = raw * scale;
  if (raw > 0.0) {
    for (auto& d : dfeat) d *= scale / raw;
    ImageTensor gf = phi.feature_grad(e_in, dfeat);
    if (gf.height != e.height || gf.width != e.width)
      gf = kernels::resize_bilinear_adjoint(gf, e.height, e.width);
    for (std::size_t i = 0; i < n; ++i) grad_e.values[i] += gf.values[i];
  }
  parts.combined = parts.mse + 2.0 * parts.mae + parts.feat;
  return parts;
}

double edge_loss(const ImageTensor& e, const ImageTensor& c, const LossOptions& opt) {
  require_same_shape(e, c, "edge_loss");
  const ImageTensor me = sobel_edge_map(e);
  const ImageTensor mc = sobel_edge_map(c);
  double s = 0.0;
  for (std::size_t i = 0; i < me.values.size(); ++i) {
    const double d = me.values[i] - mc.values[i];
    s += d * d;
  }
  double v = std::sqrt(s);
  if (opt.normalize_edge_norm) v /= std::sqrt(static_cast<double>(me.values.size()));
  return v;
}

double edge_loss_grad(const ImageTensor& e, const ImageTensor& c, ImageTensor& grad_e,
                      const LossOptions& opt) {
  require_same_shape(e, c, "edge_loss");
  const int h = e.height, w = e.width;
  const std::size_t n = e.pixel_count();
  grad_e = ImageTensor(h, w, e.channels);

  const ImageTensor ge = e.channels == 3 ? to_grayscale(e) : e;
  const ImageTensor gc = c.channels == 3 ? to_grayscale(c) : c;
  std::vector<double> gx_e(n), gy_e(n), gx_c(n), gy_c(n);
  kernels::sobel_gradients(ge.values.data(), gx_e.data(), gy_e.data(), h, w);
  kernels::sobel_gradients(gc.values.data(), gx_c.data(), gy_c.data(), h, w);

  std::vector<double> mag_e(n), diff(n);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mag_e[i] = std::sqrt(gx_e[i] * gx_e[i] + gy_e[i] * gy_e[i]);
    const double mag_c = std::sqrt(gx_c[i] * gx_c[i] + gy_c[i] * gy_c[i]);
    diff[i] = mag_e[i] - mag_c;
    s += diff[i] * diff[i];
  }
  const double raw = std::sqrt(s);
  const double scale =
      opt.normalize_edge_norm ? 1.0 / std::sqrt(static_cast<double>(n)) : 1.0;
  if (raw == 0.0) return 0.0;

  // d(value)/d(mag_e[i]) = scale * diff[i] / raw, then through the magnitude
  // and the Sobel operator
  std::vector<double> ggx(n), ggy(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double um = scale * diff[i] / raw;
    if (mag_e[i] > 0.0) {
      ggx[i] = um * gx_e[i] / mag_e[i];
      ggy[i] = um * gy_e[i] / mag_e[i];
    } else {
      ggx[i] = 0.0;
      ggy[i] = 0.0;
    }
  }
  std::vector<double> grad_gray(n);
  kernels::sobel_adjoint(ggx.data(), ggy.data(), grad_gray.data(), h, w);

  if (e.channels == 3) {
    static const double lum[3] = {0.299, 0.587, 0.114};
    for (std::size_t i = 0; i < n; ++i)
      for (int ch = 0; ch < 3; ++ch)
        grad_e.values[i * 3 + static_cast<std::size_t>(ch)] = lum[ch] * grad_gray[i];
  } else {
    grad_e.values = grad_gray;
  }
  return raw * scale;
}

LossBreakdown composite_loss(const ImageTensor& e, const ImageTensor& c,
                             const LossToggles& toggles, const FeatureExtractor& phi,
                             const LossOptions& opt) {
  toggles.validate();
  LossBreakdown b;
  if (toggles.use_structural || opt.report_disabled_terms)
    b.sl = structural_loss(e, c, opt.ssim);
  if (toggles.use_perceptual || opt.report_disabled_terms) {
    const PerceptualParts parts = perceptual_loss(e, c, phi, opt);
    b.pl_mse = parts.mse;
    b.pl_mae = parts.mae;
    b.pl_feat = parts.feat;
    b.pl = parts.combined;
  }
  if (toggles.use_edge || opt.report_disabled_terms) b.el = edge_loss(e, c, opt);
  b.total = (toggles.use_structural ? b.sl : 0.0) + (toggles.use_perceptual ? b.pl : 0.0) +
            (toggles.use_edge ? b.el : 0.0);
  return b;
}

LossBreakdown composite_loss_grad(const ImageTensor& e, const ImageTensor& c,
                                  const LossToggles& toggles,
                                  const FeatureExtractor& phi, ImageTensor& grad_e,
                                  const LossOptions& opt) {
  toggles.validate();
  LossBreakdown b;
  grad_e = ImageTensor(e.height, e.width, e.channels);
  ImageTensor g;
  if (toggles.use_structural) {
    b.sl = structural_loss_grad(e, c, opt.ssim, g);
    for (std::size_t i = 0; i < grad_e.values.size(); ++i)
      grad_e.values[i] += g.values[i];
  } else if (opt.report_disabled_terms) {
    b.sl = structural_loss(e, c, opt.ssim);
  }
  if (toggles.use_perceptual) {
    const PerceptualParts parts = perceptual_loss_grad(e, c, phi, g, opt);
    b.pl_mse = parts.mse;
    b.pl_mae = parts.mae;
    b.pl_feat = parts.feat;
    b.pl = parts.combined;
    for (std::size_t i = 0; i < grad_e.values.size(); ++i)
      grad_e.values[i] += g.values[i];
  } else if (opt.report_disabled_terms) {
    const PerceptualParts parts = perceptual_loss(e, c, phi, opt);
    b.pl_mse = parts.mse;
    b.pl_mae = parts.mae;
    b.pl_feat = parts.feat;
    b.pl = parts.combined;
  }
  if (toggles.use_edge) {
    b.el = edge_loss_grad(e, c, g, opt);
    for (std::size_t i = 0; i < grad_e.values.size(); ++i)
      grad_e.values[i] += g.values[i];
  } else if (opt.report_disabled_terms) {
    b.el = edge_loss(e, c, opt);
  }
  b.total = (toggles.use_structural ? b.sl : 0.0) + (toggles.use_perceptual ? b.pl : 0.0) +
            (toggles.use_edge ? b.el : 0.0);
  return b;
}

}  // namespace shadowpose
