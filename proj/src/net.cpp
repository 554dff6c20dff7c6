// SPDX-License-Identifier: Apache-2.0
#include "shadowpose/net.hpp"

#include <cmath>

#include "shadowpose/kernels.hpp"

namespace shadowpose {

void NetworkConfig::validate() const {
  if (input_height <= 0 || input_width <= 0)
    throw ValidationError("NetworkConfig: input size must be positive");
  if (input_channels != 3)
    throw ValidationError("NetworkConfig: input_channels must be 3");
  if (em_count < 1) throw ValidationError("NetworkConfig: em_count must be >= 1");
  if (blocks_per_em < 1)
    throw ValidationError("NetworkConfig: blocks_per_em must be >= 1");
  if (conv_channels <= 0)
    throw ValidationError("NetworkConfig: conv_channels must be > 0");
  if (kernel % 2 == 0) throw ValidationError("NetworkConfig: kernel must be odd");
  if (kernel != 3)
    throw ValidationError("NetworkConfig: only kernel = 3 is supported");
  if (pool_window != 3)
    throw ValidationError("NetworkConfig: only pool_window = 3 is supported");
  if (shortcut_merge != "add")
    throw ValidationError("NetworkConfig: shortcut_merge must be 'add' "
                          "(element counts of merged branches match by construction)");
}

nlohmann::json NetworkConfig::to_json() const {
  return {{"input_height", input_height},
          {"input_width", input_width},
          {"input_channels", input_channels},
          {"em_count", em_count},
          {"blocks_per_em", blocks_per_em},
          {"conv_channels", conv_channels},
          {"kernel", kernel},
          {"pool_window", pool_window},
          {"shortcut_merge", shortcut_merge}};
}

NetworkConfig NetworkConfig::from_json(const nlohmann::json& j) {
  NetworkConfig c;
  c.input_height = j.value("input_height", c.input_height);
  c.input_width = j.value("input_width", c.input_width);
  c.input_channels = j.value("input_channels", c.input_channels);
  c.em_count = j.value("em_count", c.em_count);
  c.blocks_per_em = j.value("blocks_per_em", c.blocks_per_em);
  c.conv_channels = j.value("conv_channels", c.conv_channels);
  c.kernel = j.value("kernel", c.kernel);
  c.pool_window = j.value("pool_window", c.pool_window);
  c.shortcut_merge = j.value("shortcut_merge", c.shortcut_merge);
  return c;
}

std::string NetworkConfig::fingerprint() const {
  return hex_u64(fnv1a64(to_json().dump()));
}

namespace {

ConvLayer make_layer(const std::string& name, int in_ch, int out_ch) {
  ConvLayer l;
  l.name = name;
  l.in_ch = in_ch;
  l.out_ch = out_ch;
  l.w.assign(static_cast<std::size_t>(out_ch) * in_ch * 9, 0.0);
  l.b.assign(static_cast<std::size_t>(out_ch), 0.0);
  l.gw.assign(l.w.size(), 0.0);
  l.gb.assign(l.b.size(), 0.0);
  return l;
}

void relu_inplace(Tensor& t) {
  for (auto& v : t.data)
    if (v < 0.0) v = 0.0;
}

// grad *= (activated > 0)
void relu_mask(const Tensor& activated, Tensor& grad) {
  for (std::size_t i = 0; i < grad.data.size(); ++i)
    if (activated.data[i] <= 0.0) grad.data[i] = 0.0;
}

void add_inplace(Tensor& dst, const Tensor& src) {
  for (std::size_t i = 0; i < dst.data.size(); ++i) dst.data[i] += src.data[i];
}

}  // namespace

Network::Network(const NetworkConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  const int cc = cfg_.conv_channels;
  for (int em = 1; em <= cfg_.em_count; ++em) {
    const std::string prefix = "em" + std::to_string(em) + "/";
    em_layer_base_.push_back(layers_.size());
    layers_.push_back(make_layer(prefix + "conv_in", cfg_.input_channels, cc));
    for (int b = 1; b <= cfg_.blocks_per_em; ++b) {
      const std::string bp = prefix + "block" + std::to_string(b) + "/";
      layers_.push_back(make_layer(bp + "conv1", cc, cc));
      layers_.push_back(make_layer(bp + "conv2", cc, cc));
    }
    layers_.push_back(make_layer(prefix + "conv_out", cc, cfg_.input_channels));
  }
}

ConvLayer& Network::layer(const std::string& name) {
  for (auto& l : layers_)
    if (l.name == name) return l;
  throw ValidationError("no such layer: " + name);
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.parameter_count();
  return n;
}

void Network::init_weights(std::uint64_t seed) {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    auto& l = layers_[i];
    Rng rng(mix_seed(seed, i));
    const double scale = std::sqrt(2.0 / (static_cast<double>(l.in_ch) * 9.0));
    for (auto& v : l.w) v = rng.normal() * scale;
    for (auto& v : l.b) v = 0.0;
  }
}

void Network::zero_grads() {
  for (auto& l : layers_) {
    std::fill(l.gw.begin(), l.gw.end(), 0.0);
    std::fill(l.gb.begin(), l.gb.end(), 0.0);
  }
}

Tensor Network::em_forward(int em, const Tensor& input,
                           ForwardCache::EmCache* cache) const {
  const std::size_t base = em_layer_base_[static_cast<std::size_t>(em)];
  const ConvLayer& conv_in = layers_[base];
  const int h = input.height, w = input.width, cc = cfg_.conv_channels;

  Tensor a(cc, h, w);
  kernels::conv3x3_forward(input.data.data(), conv_in.in_ch, h, w, conv_in.w.data(),
                           conv_in.b.data(), conv_in.out_ch, a.data.data());
  relu_inplace(a);

  Tensor pooled(cc, h, w);
  std::vector<std::int32_t> argmax(a.size());
  kernels::maxpool3_forward(a.data.data(), cc, h, w, pooled.data.data(), argmax.data());

  Tensor z = pooled;
  std::vector<ForwardCache::BlockCache> blocks;
  for (int b = 0; b < cfg_.blocks_per_em; ++b) {
    const ConvLayer& c1 = layers_[base + 1 + static_cast<std::size_t>(b) * 2];
    const ConvLayer& c2 = layers_[base + 2 + static_cast<std::size_t>(b) * 2];
    Tensor b1(cc, h, w), b2(cc, h, w);
    kernels::conv3x3_forward(z.data.data(), cc, h, w, c1.w.data(), c1.b.data(), cc,
                             b1.data.data());
    relu_inplace(b1);
    kernels::conv3x3_forward(b1.data.data(), cc, h, w, c2.w.data(), c2.b.data(), cc,
                             b2.data.data());
    Tensor z_out = b2;
    add_inplace(z_out, z);  // residual merge
    relu_inplace(z_out);
    if (cache) blocks.push_back({z, std::move(b1), std::move(b2), z_out});
    z = std::move(z_out);
  }

  // stage-internal shortcut: first block input to last block output
  Tensor sum = z;
  add_inplace(sum, pooled);

  const ConvLayer& conv_out = layers_[base + 1 + static_cast<std::size_t>(cfg_.blocks_per_em) * 2];
  Tensor y(cfg_.input_channels, h, w);
  kernels::conv3x3_forward(sum.data.data(), cc, h, w, conv_out.w.data(),
                           conv_out.b.data(), cfg_.input_channels, y.data.data());

  if (cache) {
    cache->input = input;
    cache->conv_in_out = std::move(a);
    cache->pool_out = std::move(pooled);
    cache->pool_argmax = std::move(argmax);
    cache->blocks = std::move(blocks);
    cache->sum_out = std::move(sum);
  }
  return y;
}

Tensor Network::forward(const Tensor& x) const { return forward(x, nullptr); }

Tensor Network::forward(const Tensor& x, ForwardCache* cache) const {
  if (x.height != cfg_.input_height || x.width != cfg_.input_width)
    throw ValidationError("forward: expected input " +
                          std::to_string(cfg_.input_height) + "x" +
                          std::to_string(cfg_.input_width) + ", got " +
                          std::to_string(x.height) + "x" + std::to_string(x.width));
  if (x.channels != cfg_.input_channels)
    throw ValidationError("forward: expected " + std::to_string(cfg_.input_channels) +
                          " channels, got " + std::to_string(x.channels));
  if (cache) {
    cache->ems.resize(static_cast<std::size_t>(cfg_.em_count));
    cache->em_outputs.clear();
  }
  Tensor out;
  for (int em = 0; em < cfg_.em_count; ++em) {
    Tensor input = (em == 0) ? x : out;
    if (em > 0) add_inplace(input, x);  // network-level input shortcut
    out = em_forward(em, input, cache ? &cache->ems[static_cast<std::size_t>(em)] : nullptr);
    if (cache) cache->em_outputs.push_back(out);
  }
  return out;
}

Tensor Network::em_backward(int em, const Tensor& grad_y,
                            const ForwardCache::EmCache& cache) {
  const std::size_t base = em_layer_base_[static_cast<std::size_t>(em)];
  const int h = grad_y.height, w = grad_y.width, cc = cfg_.conv_channels;

  ConvLayer& conv_out = layers_[base + 1 + static_cast<std::size_t>(cfg_.blocks_per_em) * 2];
  Tensor g_sum(cc, h, w);
  kernels::conv3x3_backward_data(grad_y.data.data(), conv_out.out_ch, h, w,
                                 conv_out.w.data(), cc, g_sum.data.data());
  kernels::conv3x3_backward_filter(cache.sum_out.data.data(), cc, grad_y.data.data(),
                                   conv_out.out_ch, h, w, conv_out.gw.data(),
                                   conv_out.gb.data());

  Tensor g_z = g_sum;          // into the last block output
  Tensor g_pool = g_sum;       // stage-internal shortcut branch

  for (int b = cfg_.blocks_per_em - 1; b >= 0; --b) {
    const auto& bc = cache.blocks[static_cast<std::size_t>(b)];
    ConvLayer& c1 = layers_[base + 1 + static_cast<std::size_t>(b) * 2];
    ConvLayer& c2 = layers_[base + 2 + static_cast<std::size_t>(b) * 2];

    relu_mask(bc.z_out, g_z);  // through the block's output activation
    // g_z now applies to (z_in + b2)
    Tensor g_b1(cc, h, w);
    kernels::conv3x3_backward_data(g_z.data.data(), cc, h, w, c2.w.data(), cc,
                                   g_b1.data.data());
    kernels::conv3x3_backward_filter(bc.b1.data.data(), cc, g_z.data.data(), cc, h, w,
                                     c2.gw.data(), c2.gb.data());
    relu_mask(bc.b1, g_b1);
    Tensor g_zin(cc, h, w);
    kernels::conv3x3_backward_data(g_b1.data.data(), cc, h, w, c1.w.data(), cc,
                                   g_zin.data.data());
    kernels::conv3x3_backward_filter(bc.z_in.data.data(), cc, g_b1.data.data(), cc, h,
                                     w, c1.gw.data(), c1.gb.data());
    add_inplace(g_zin, g_z);  // residual pass-through
    g_z = std::move(g_zin);
  }
  add_inplace(g_z, g_pool);  // both paths land on the pool output

  Tensor g_a(cc, h, w);
  kernels::maxpool3_backward(g_z.data.data(), cache.pool_argmax.data(), cc, h, w,
                             g_a.data.data());
  relu_mask(cache.conv_in_out, g_a);

  ConvLayer& conv_in = layers_[base];
  Tensor g_input(cfg_.input_channels, h, w);
  kernels::conv3x3_backward_data(g_a.data.data(), cc, h, w, conv_in.w.data(),
                                 conv_in.in_ch, g_input.data.data());
  kernels::conv3x3_backward_filter(cache.input.data.data(), conv_in.in_ch,
                                   g_a.data.data(), cc, h, w, conv_in.gw.data(),
                                   conv_in.gb.data());
  return g_input;
}

Tensor Network::backward(const Tensor& grad_out, const Tensor& x,
                         const ForwardCache& cache) {
  Tensor g = grad_out;
  Tensor gx(x.channels, x.height, x.width);
  for (int em = cfg_.em_count - 1; em >= 0; --em) {
    Tensor g_input = em_backward(em, g, cache.ems[static_cast<std::size_t>(em)]);
    add_inplace(gx, g_input);  // every stage input after the first adds x
    g = std::move(g_input);    // toward the previous stage's output
    if (em == 0) break;
  }
  return gx;
}

ImageTensor enhance_image(const Network& net, const ImageTensor& input) {
  const Tensor out = net.forward(to_planar(input));
  return to_image(out, /*clamp=*/true);
}

std::vector<ImageTensor> forward_batch(const Network& net,
                                       const std::vector<ImageTensor>& batch) {
  std::vector<ImageTensor> out;
  out.reserve(batch.size());
  for (const auto& img : batch) out.push_back(enhance_image(net, img));
  return out;
}

}  // namespace shadowpose
