// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "shadowpose/tensor.hpp"

namespace shadowpose {

// Topology constants of the enhancement network: a chain of enhancement
// stages, each built from residual blocks without batch normalization,
// with input shortcuts into every stage after the first.
struct NetworkConfig {
  int input_height = 256;
  int input_width = 256;
  int input_channels = 3;
  int em_count = 3;        // enhancement stages
  int blocks_per_em = 3;   // residual blocks per stage
  int conv_channels = 32;  // working width
  int kernel = 3;          // conv side; this implementation is specialized to 3
  int pool_window = 3;     // max pool side, stride 1, same padding
  std::string shortcut_merge = "add";

  void validate() const;
  nlohmann::json to_json() const;
  static NetworkConfig from_json(const nlohmann::json& j);
  // Stable hash of the canonical JSON form; stored in checkpoints.
  std::string fingerprint() const;
};

struct ConvLayer {
  std::string name;
  int in_ch = 0, out_ch = 0;
  std::vector<double> w;   // [out_ch][in_ch][3][3]
  std::vector<double> b;   // [out_ch]
  std::vector<double> gw;  // gradient accumulators
  std::vector<double> gb;

  std::size_t parameter_count() const { return w.size() + b.size(); }
};

// Activation cache of one forward pass, consumed by backward().
struct ForwardCache {
  struct BlockCache {
    Tensor z_in, b1, b2, z_out;
  };
  struct EmCache {
    Tensor input;         // stage input after the network-level shortcut add
    Tensor conv_in_out;   // post-relu lift to conv_channels
    Tensor pool_out;
    std::vector<std::int32_t> pool_argmax;
    std::vector<BlockCache> blocks;
    Tensor sum_out;       // last block output + pool_out (stage-internal shortcut)
  };
  std::vector<EmCache> ems;
  std::vector<Tensor> em_outputs;  // 3-channel output of every stage
};

class Network {
 public:
  explicit Network(const NetworkConfig& cfg);

  const NetworkConfig& config() const { return cfg_; }
  std::vector<ConvLayer>& layers() { return layers_; }
  const std::vector<ConvLayer>& layers() const { return layers_; }
  ConvLayer& layer(const std::string& name);

  std::size_t parameter_count() const;

  // Fan-in-scaled normal init, zero biases. Per-layer seeded streams.
  void init_weights(std::uint64_t seed);

  // Raw forward pass (no clamping); rejects wrong spatial size.
  Tensor forward(const Tensor& x) const;
  Tensor forward(const Tensor& x, ForwardCache* cache) const;

  // Accumulates parameter gradients for d(loss)/d(output); returns
  // d(loss)/d(input) (the shortcut-summed signal).
  Tensor backward(const Tensor& grad_out, const Tensor& x, const ForwardCache& cache);

  void zero_grads();

 private:
  Tensor em_forward(int em, const Tensor& input, ForwardCache::EmCache* cache) const;
  Tensor em_backward(int em, const Tensor& grad_y, const ForwardCache::EmCache& cache);

  NetworkConfig cfg_;
  std::vector<ConvLayer> layers_;
  std::vector<std::size_t> em_layer_base_;  // index of each stage's first layer
};

// Convenience wrappers used by the CLI and evaluation paths. Input is resized
// by the caller; output is clamped to [0, 1] (inference contract).
ImageTensor enhance_image(const Network& net, const ImageTensor& input);
std::vector<ImageTensor> forward_batch(const Network& net,
                                       const std::vector<ImageTensor>& batch);

}  // namespace shadowpose
