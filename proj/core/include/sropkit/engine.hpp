#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "sropkit/architecture.hpp"
#include "sropkit/image.hpp"
#include "sropkit/spectral.hpp"

namespace sropkit {

// c x n x n activation in float, planar.
struct Activation {
  std::size_t channels = 0;
  std::size_t size = 0;
  std::vector<float> data;

  Activation() = default;
  Activation(std::size_t c, std::size_t n, float fill = 0.0f)
      : channels(c), size(n), data(c * n * n, fill) {}

  TensorShape shape() const noexcept { return {channels, size}; }
  std::span<const float> plane(std::size_t c) const {
    return {data.data() + c * size * size, size * size};
  }
  std::span<float> plane(std::size_t c) {
    return {data.data() + c * size * size, size * size};
  }
};

Activation to_activation(const MultiImage& image);
Activation to_activation(const FeatureMapTensor& tensor);
FeatureMapTensor to_feature_map(const Activation& a, std::string layer_name, MapSource source);

// Convolution kernels laid out as channels_out x channels_in x k x k.
struct ConvWeights {
  std::size_t channels_in = 0;
  std::size_t channels_out = 0;
  std::size_t kernel = 0;
  std::vector<float> values;
};

// He-uniform kernels, U(-sqrt(6 / fan_in), sqrt(6 / fan_in)) with
// fan_in = channels_in * k * k, biases zero. The stream for each layer is
// derived from (seed, layer name), so kernels do not shift when other
// layers are added or removed.
ConvWeights he_uniform_weights(std::size_t channels_in, std::size_t channels_out,
                               std::size_t kernel, std::uint64_t seed,
                               const std::string& layer_name);

// Single-kernel identity convolution (centre tap 1 on the matching channel).
ConvWeights identity_weights(std::size_t channels, std::size_t kernel);

// Applies one layer. `inputs` holds one activation, or the operands of add
// and concat in declaration order. `weights` is only read by conv.
//   conv      zero-padded cross-correlation, no bias
//   maxpool   window maximum (padding never wins)
//   blurpool  optional stride-1 max, then [1 2 1]/4 x [1 2 1]/4 blur with
//             reflect padding and stride 2
//   avgpool   2 x 2 mean, stride 2
//   batchnorm identity (gamma 1, beta 0, zero mean, unit variance)
Activation apply_layer(std::span<const Activation* const> inputs, const LayerSpec& layer,
                       const ConvWeights* weights = nullptr);
Activation apply_layer(const Activation& input, const LayerSpec& layer,
                       const ConvWeights* weights = nullptr);

// A validated architecture with its randomized weights fixed at
// construction. forward() is const and safe to call concurrently.
class RandomizedNetwork {
 public:
  RandomizedNetwork(ArchitectureSpec spec, std::uint64_t seed);

  const ArchitectureSpec& spec() const noexcept { return spec_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const ConvWeights* weights_for(std::size_t layer_index) const;

  // Runs the whole graph and returns the activations of the requested
  // layers. Intermediate activations are released as soon as no later
  // layer reads them.
  std::map<std::string, Activation> forward(const Activation& input,
                                            std::span<const std::string> capture) const;

 private:
  ArchitectureSpec spec_;
  std::uint64_t seed_;
  std::vector<ConvWeights> weights_;  // indexed by layer; empty for non-conv
};

}  // namespace sropkit
