#include "sropkit/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Core>

#include "sropkit/error.hpp"

namespace sropkit {

namespace {

using RowMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

void check_weights(const Activation& x, const LayerSpec& layer, const ConvWeights* w) {
  if (!w) throw InvalidInput("conv layer '" + layer.name + "' has no weights");
  if (w->channels_in != x.channels || w->channels_out != layer.params.channels_out ||
      w->kernel != layer.params.kernel ||
      w->values.size() != w->channels_out * w->channels_in * w->kernel * w->kernel) {
    throw InvalidInput("conv layer '" + layer.name + "': weights do not match input/layer");
  }
}

Activation conv(const Activation& x, const LayerSpec& layer, const ConvWeights& w) {
  const std::size_t k = layer.params.kernel;
  const std::size_t s = layer.params.stride;
  const std::size_t p = layer.params.padding;
  const std::size_t n = x.size;
  if (n + 2 * p < k) throw InvalidInput("conv '" + layer.name + "': kernel exceeds input");
  const std::size_t on = (n + 2 * p - k) / s + 1;
  const std::size_t taps = x.channels * k * k;
  const std::size_t pixels = on * on;

  Activation out(w.channels_out, on);
  Eigen::Map<const RowMatrix> kernels(w.values.data(),
                                      static_cast<Eigen::Index>(w.channels_out),
                                      static_cast<Eigen::Index>(taps));
  Eigen::Map<RowMatrix> result(out.data.data(), static_cast<Eigen::Index>(w.channels_out),
                               static_cast<Eigen::Index>(pixels));

  if (k == 1 && s == 1 && p == 0) {
    Eigen::Map<const RowMatrix> cols(x.data.data(), static_cast<Eigen::Index>(taps),
                                     static_cast<Eigen::Index>(pixels));
    result.noalias() = kernels * cols;
    return out;
  }

  RowMatrix cols(static_cast<Eigen::Index>(taps), static_cast<Eigen::Index>(pixels));
  for (std::size_t c = 0; c < x.channels; ++c) {
    const float* plane = x.data.data() + c * n * n;
    for (std::size_t ky = 0; ky < k; ++ky) {
      for (std::size_t kx = 0; kx < k; ++kx) {
        float* row = cols.data() + ((c * k + ky) * k + kx) * pixels;
        for (std::size_t oy = 0; oy < on; ++oy) {
          const long iy = static_cast<long>(oy * s + ky) - static_cast<long>(p);
          float* dst = row + oy * on;
          if (iy < 0 || iy >= static_cast<long>(n)) {
            std::fill(dst, dst + on, 0.0f);
            continue;
          }
          const float* src = plane + static_cast<std::size_t>(iy) * n;
          for (std::size_t ox = 0; ox < on; ++ox) {
            const long ix = static_cast<long>(ox * s + kx) - static_cast<long>(p);
            dst[ox] = (ix < 0 || ix >= static_cast<long>(n)) ? 0.0f
                                                              : src[static_cast<std::size_t>(ix)];
          }
        }
      }
    }
  }
  result.noalias() = kernels * cols;
  return out;
}

Activation max_window(const Activation& x, std::size_t k, std::size_t s, std::size_t p) {
  const std::size_t n = x.size;
  const std::size_t on = (n + 2 * p - k) / s + 1;
  Activation out(x.channels, on);
  for (std::size_t c = 0; c < x.channels; ++c) {
    const auto in = x.plane(c);
    auto dst = out.plane(c);
    for (std::size_t oy = 0; oy < on; ++oy) {
      for (std::size_t ox = 0; ox < on; ++ox) {
        float best = -std::numeric_limits<float>::infinity();
        for (std::size_t ky = 0; ky < k; ++ky) {
          const long iy = static_cast<long>(oy * s + ky) - static_cast<long>(p);
          if (iy < 0 || iy >= static_cast<long>(n)) continue;
          for (std::size_t kx = 0; kx < k; ++kx) {
            const long ix = static_cast<long>(ox * s + kx) - static_cast<long>(p);
            if (ix < 0 || ix >= static_cast<long>(n)) continue;
            best = std::max(best, in[static_cast<std::size_t>(iy) * n + static_cast<std::size_t>(ix)]);
          }
        }
        dst[oy * on + ox] = best;
      }
    }
  }
  return out;
}

std::size_t reflect(long i, std::size_t n) {
  if (i < 0) return static_cast<std::size_t>(-i);
  if (i >= static_cast<long>(n)) return 2 * n - 2 - static_cast<std::size_t>(i);
  return static_cast<std::size_t>(i);
}

// Separable [1 2 1] / 4 filter, reflect padding, stride 2.
Activation blur_downsample(const Activation& x) {
  const std::size_t n = x.size;
  if (n < 2) throw InvalidInput("blurpool needs at least 2 x 2 input");
  const std::size_t on = (n + 1) / 2;
  constexpr float taps[3] = {0.25f, 0.5f, 0.25f};
  Activation out(x.channels, on);
  std::vector<float> rows(on * n);
  for (std::size_t c = 0; c < x.channels; ++c) {
    const auto in = x.plane(c);
    for (std::size_t y = 0; y < n; ++y) {
      for (std::size_t ox = 0; ox < on; ++ox) {
        float acc = 0.0f;
        for (int t = -1; t <= 1; ++t) {
          acc += taps[t + 1] * in[y * n + reflect(static_cast<long>(2 * ox) + t, n)];
        }
        rows[y * on + ox] = acc;
      }
    }
    auto dst = out.plane(c);
    for (std::size_t oy = 0; oy < on; ++oy) {
      for (std::size_t ox = 0; ox < on; ++ox) {
        float acc = 0.0f;
        for (int t = -1; t <= 1; ++t) {
          acc += taps[t + 1] * rows[reflect(static_cast<long>(2 * oy) + t, n) * on + ox];
        }
        dst[oy * on + ox] = acc;
      }
    }
  }
  return out;
}

Activation avg_pool2(const Activation& x) {
  const std::size_t n = x.size;
  const std::size_t on = n / 2;
  Activation out(x.channels, on);
  for (std::size_t c = 0; c < x.channels; ++c) {
    const auto in = x.plane(c);
    auto dst = out.plane(c);
    for (std::size_t oy = 0; oy < on; ++oy) {
      for (std::size_t ox = 0; ox < on; ++ox) {
        const std::size_t i = 2 * oy * n + 2 * ox;
        dst[oy * on + ox] = 0.25f * (in[i] + in[i + 1] + in[i + n] + in[i + n + 1]);
      }
    }
  }
  return out;
}

}  // namespace

Activation to_activation(const MultiImage& image) {
  if (image.rows != image.cols) throw InvalidInput("network input must be square");
  Activation a(image.channels, image.rows);
  std::transform(image.pixels.begin(), image.pixels.end(), a.data.begin(),
                 [](double v) { return static_cast<float>(v); });
  return a;
}

Activation to_activation(const FeatureMapTensor& tensor) {
  Activation a;
  a.channels = tensor.channels();
  a.size = tensor.size();
  a.data = tensor.data();
  return a;
}

FeatureMapTensor to_feature_map(const Activation& a, std::string layer_name, MapSource source) {
  return FeatureMapTensor(std::move(layer_name), source, a.channels, a.size, a.data);
}

ConvWeights he_uniform_weights(std::size_t channels_in, std::size_t channels_out,
                               std::size_t kernel, std::uint64_t seed,
                               const std::string& layer_name) {
  ConvWeights w{channels_in, channels_out, kernel, {}};
  const std::size_t fan_in = channels_in * kernel * kernel;
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
  std::mt19937_64 rng(splitmix64(seed ^ splitmix64(fnv1a(layer_name))));
  w.values.resize(channels_out * fan_in);
  for (auto& v : w.values) {
    // 53 random bits mapped to [0, 1); avoids the implementation-defined
    // algorithm behind std::uniform_real_distribution.
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    v = static_cast<float>((2.0 * u - 1.0) * bound);
  }
  return w;
}

ConvWeights identity_weights(std::size_t channels, std::size_t kernel) {
  ConvWeights w{channels, channels, kernel, std::vector<float>(channels * channels * kernel * kernel, 0.0f)};
  const std::size_t centre = kernel / 2;
  for (std::size_t c = 0; c < channels; ++c) {
    w.values[((c * channels + c) * kernel + centre) * kernel + centre] = 1.0f;
  }
  return w;
}

Activation apply_layer(std::span<const Activation* const> inputs, const LayerSpec& layer,
                       const ConvWeights* weights) {
  if (inputs.empty() || !inputs.front()) {
    throw InvalidInput("layer '" + layer.name + "' has no input");
  }
  const Activation& x = *inputs.front();
  const auto& p = layer.params;
  switch (layer.op) {
    case LayerOp::conv:
      check_weights(x, layer, weights);
      return conv(x, layer, *weights);
    case LayerOp::maxpool:
      if (x.size + 2 * p.padding < p.kernel) throw InvalidInput("maxpool window exceeds input");
      return max_window(x, p.kernel, p.stride, p.padding);
    case LayerOp::blurpool:
      if (p.max_kernel != 0) {
        if (x.size + 2 * p.max_padding < p.max_kernel) {
          throw InvalidInput("blurpool max window exceeds input");
        }
        return blur_downsample(max_window(x, p.max_kernel, 1, p.max_padding));
      }
      return blur_downsample(x);
    case LayerOp::avgpool:
      return avg_pool2(x);
    case LayerOp::batchnorm:
      return x;
    case LayerOp::relu: {
      Activation out = x;
      for (auto& v : out.data) v = std::max(v, 0.0f);
      return out;
    }
    case LayerOp::add: {
      Activation out = x;
      for (std::size_t i = 1; i < inputs.size(); ++i) {
        if (inputs[i]->shape() != x.shape()) {
          throw InvalidInput("add '" + layer.name + "': operand shapes differ");
        }
        for (std::size_t j = 0; j < out.data.size(); ++j) out.data[j] += inputs[i]->data[j];
      }
      return out;
    }
    case LayerOp::concat: {
      Activation out;
      out.size = x.size;
      for (const auto* in : inputs) {
        if (in->size != x.size) {
          throw InvalidInput("concat '" + layer.name + "': spatial sizes differ");
        }
        out.channels += in->channels;
        out.data.insert(out.data.end(), in->data.begin(), in->data.end());
      }
      return out;
    }
    case LayerOp::avgpool_global: {
      Activation out(x.channels, 1);
      const double area = static_cast<double>(x.size * x.size);
      for (std::size_t c = 0; c < x.channels; ++c) {
        double acc = 0.0;
        for (float v : x.plane(c)) acc += v;
        out.data[c] = static_cast<float>(acc / area);
      }
      return out;
    }
  }
  throw InvalidInput("unknown layer op");
}

Activation apply_layer(const Activation& input, const LayerSpec& layer,
                       const ConvWeights* weights) {
  const Activation* in[] = {&input};
  return apply_layer(std::span<const Activation* const>(in), layer, weights);
}

RandomizedNetwork::RandomizedNetwork(ArchitectureSpec spec, std::uint64_t seed)
    : spec_(std::move(spec)), seed_(seed) {
  if (spec_.shapes.size() != spec_.layers.size()) validate(spec_);
  weights_.resize(spec_.layers.size());
  for (std::size_t i = 0; i < spec_.layers.size(); ++i) {
    const auto& layer = spec_.layers[i];
    if (layer.op != LayerOp::conv) continue;
    const int src = spec_.sources[i].front();
    const std::size_t cin =
        src < 0 ? spec_.input.channels : spec_.shapes[static_cast<std::size_t>(src)].channels;
    weights_[i] = he_uniform_weights(cin, layer.params.channels_out, layer.params.kernel,
                                     seed_, layer.name);
  }
}

const ConvWeights* RandomizedNetwork::weights_for(std::size_t layer_index) const {
  if (layer_index >= weights_.size() || weights_[layer_index].values.empty()) return nullptr;
  return &weights_[layer_index];
}

std::map<std::string, Activation> RandomizedNetwork::forward(
    const Activation& input, std::span<const std::string> capture) const {
  if (input.shape() != spec_.input) {
    throw InvalidInput("network '" + spec_.name + "' expects " +
                       std::to_string(spec_.input.channels) + " x " +
                       std::to_string(spec_.input.size) + " x " +
                       std::to_string(spec_.input.size) + " input");
  }
  const std::size_t count = spec_.layers.size();
  std::vector<bool> keep(count, false);
  for (const auto& name : capture) {
    const auto i = spec_.index_of(name);
    if (!i) throw InvalidInput("cannot capture unknown layer '" + name + "'");
    keep[*i] = true;
  }
  // Last layer index that reads each activation.
  std::vector<std::size_t> last_use(count, 0);
  for (std::size_t i = 0; i < count; ++i) {
    for (int s : spec_.sources[i]) {
      if (s >= 0) last_use[static_cast<std::size_t>(s)] = i;
    }
  }

  std::vector<Activation> values(count);
  std::map<std::string, Activation> captured;
  std::vector<const Activation*> operands;
  for (std::size_t i = 0; i < count; ++i) {
    operands.clear();
    for (int s : spec_.sources[i]) {
      operands.push_back(s < 0 ? &input : &values[static_cast<std::size_t>(s)]);
    }
    values[i] = apply_layer(operands, spec_.layers[i], weights_for(i));
    if (keep[i]) captured.emplace(spec_.layers[i].name, values[i]);
    for (int s : spec_.sources[i]) {
      if (s >= 0 && last_use[static_cast<std::size_t>(s)] == i) {
        values[static_cast<std::size_t>(s)] = Activation{};
      }
    }
  }
  return captured;
}

}  // namespace sropkit
