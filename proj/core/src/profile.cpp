#include "sropkit/profile.hpp"

#include <algorithm>

#include "sropkit/error.hpp"
#include "sropkit/npy.hpp"
#include "sropkit/parallel.hpp"
#include "sropkit/synth.hpp"

namespace sropkit {

namespace {

constexpr double kImagenetMean[3] = {0.485, 0.456, 0.406};
constexpr double kImagenetStd[3] = {0.229, 0.224, 0.225};

std::size_t reference_bins(std::size_t map_size, std::size_t reference_size,
                           BandReference band) {
  return radial_bin_count(band == BandReference::input ? reference_size : map_size);
}

std::vector<std::optional<double>> plane_srops(const Activation& map,
                                               std::size_t reference_size,
                                               const ProfileOptions& options) {
  const std::size_t m_ref = reference_bins(map.size, reference_size, options.band);
  if (radial_bin_count(map.size) > m_ref) {
    throw InvalidInput("map resolution exceeds the reference resolution");
  }
  std::vector<std::optional<double>> out;
  out.reserve(map.channels);
  Image slice(map.size, map.size);
  for (std::size_t c = 0; c < map.channels; ++c) {
    const auto plane = map.plane(c);
    std::copy(plane.begin(), plane.end(), slice.pixels.begin());
    try {
      const SropValue v = srop_2d(slice, options.kappa, options.spectral);
      out.emplace_back(normalize_srop(v.bin, 0, m_ref));
    } catch (const ZeroEnergy&) {
      out.emplace_back(std::nullopt);
    }
  }
  return out;
}

Activation max_pool2(const Activation& x) {
  LayerSpec pool{"ds", LayerOp::maxpool, {}};
  pool.params.kernel = 2;
  pool.params.stride = 2;
  return apply_layer(x, pool);
}

SropReport pooled_report(const std::vector<std::vector<std::optional<double>>>& per_input,
                         const std::string& name, std::size_t resolution) {
  std::vector<std::optional<double>> all;
  for (const auto& v : per_input) all.insert(all.end(), v.begin(), v.end());
  return layer_stats(std::span<const std::optional<double>>(all), name, resolution);
}

}  // namespace

const char* to_string(BandReference band) {
  return band == BandReference::input ? "input" : "per_map";
}

MultiImage prepare_input(const MultiImage& image, const ProfileOptions& options) {
  if (image.rows != image.cols) throw InvalidInput("input image must be square");
  MultiImage out = image;
  if (options.imagenet_normalize && out.channels == 3) {
    for (std::size_t c = 0; c < 3; ++c) {
      for (double& v : out.plane(c)) v = (v - kImagenetMean[c]) / kImagenetStd[c];
    }
  }
  return out;
}

std::vector<std::optional<double>> map_srops(const Activation& map, std::size_t reference_size,
                                             const ProfileOptions& options) {
  return plane_srops(map, reference_size, options);
}

std::vector<SropReport> run_profile(const ArchitectureSpec& spec,
                                    std::span<const MultiImage> inputs, std::uint64_t seed,
                                    const ProfileOptions& options) {
  if (inputs.empty()) throw InvalidInput("run_profile: no input images");
  for (const auto& img : inputs) {
    if (img.channels != spec.input.channels || img.rows != spec.input.size ||
        img.cols != spec.input.size) {
      throw InvalidInput("run_profile: inputs must be " + std::to_string(spec.input.channels) +
                         " x " + std::to_string(spec.input.size) + " x " +
                         std::to_string(spec.input.size));
    }
  }
  const RandomizedNetwork net(spec, seed);
  const auto& taps = net.spec().taps;
  // srops[tap][input] -> per-channel values
  std::vector<std::vector<std::vector<std::optional<double>>>> srops(
      taps.size(), std::vector<std::vector<std::optional<double>>>(inputs.size()));

  parallel_for(inputs.size(), [&](std::size_t i) {
    const auto acts = net.forward(to_activation(prepare_input(inputs[i], options)), taps);
    for (std::size_t t = 0; t < taps.size(); ++t) {
      srops[t][i] = plane_srops(acts.at(taps[t]), spec.input.size, options);
    }
  });

  std::vector<std::size_t> order(taps.size());
  for (std::size_t t = 0; t < taps.size(); ++t) order[t] = t;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return *net.spec().index_of(taps[a]) < *net.spec().index_of(taps[b]);
  });
  std::vector<SropReport> reports;
  for (std::size_t t : order) {
    reports.push_back(pooled_report(srops[t], taps[t], net.spec().shape_of(taps[t]).size));
  }
  return reports;
}

std::vector<SropReport> benchmark_downscale(std::span<const MultiImage> inputs,
                                            const ProfileOptions& options, std::size_t levels) {
  if (inputs.empty()) throw InvalidInput("benchmark_downscale: no input images");
  const std::size_t size = inputs.front().rows;
  for (const auto& img : inputs) {
    if (img.rows != size || img.cols != size) {
      throw InvalidInput("benchmark_downscale: inputs must share one square size");
    }
  }
  std::vector<std::size_t> resolutions{size};
  while (resolutions.size() < levels) {
    const std::size_t next = resolutions.back() / 2;
    if (next < 3) break;
    resolutions.push_back(next);
  }

  std::vector<std::vector<std::vector<std::optional<double>>>> srops(
      resolutions.size(), std::vector<std::vector<std::optional<double>>>(inputs.size()));
  parallel_for(inputs.size(), [&](std::size_t i) {
    MultiImage img = prepare_input(inputs[i], options);
    if (options.luminance && img.channels == 3) img = to_grayscale(img);
    Activation a = to_activation(img);
    for (std::size_t level = 0; level < resolutions.size(); ++level) {
      if (level > 0) a = max_pool2(a);
      srops[level][i] = plane_srops(a, size, options);
    }
  });

  std::vector<SropReport> reports;
  for (std::size_t level = 0; level < resolutions.size(); ++level) {
    reports.push_back(pooled_report(srops[level], "ds" + std::to_string(resolutions[level]),
                                    resolutions[level]));
  }
  return reports;
}

std::vector<SropReport> profile_manifest(const RunManifest& manifest,
                                         const std::filesystem::path& base_dir,
                                         const ProfileOptions& options,
                                         std::size_t input_size) {
  if (manifest.layers.empty()) throw InvalidInput("manifest has no layers");
  std::size_t reference = input_size;
  if (reference == 0) {
    for (const auto& l : manifest.layers) {
      if (l.shape.size() < 3) throw InvalidInput("layer '" + l.name + "' is not c x n x n");
      reference = std::max(reference, l.shape.back());
    }
  }
  std::vector<SropReport> reports;
  for (const auto& layer : manifest.layers) {
    const NpyTensor t = load_npy(base_dir / layer.file);
    const auto& s = t.shape();
    if (s.size() != 3 && s.size() != 4) {
      throw InvalidInput("layer '" + layer.name + "' must be c x n x n or N x c x n x n");
    }
    const std::size_t batch = s.size() == 4 ? s[0] : 1;
    const std::size_t c = s[s.size() - 3];
    const std::size_t n = s[s.size() - 1];
    if (s[s.size() - 2] != n) throw InvalidInput("layer '" + layer.name + "' is not square");
    const auto values = t.to_f32();
    std::vector<std::vector<std::optional<double>>> per_input(batch);
    parallel_for(batch, [&](std::size_t b) {
      Activation a(c, n);
      std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(b * c * n * n), c * n * n,
                  a.data.begin());
      per_input[b] = plane_srops(a, reference, options);
    });
    reports.push_back(pooled_report(per_input, layer.name, n));
  }
  return reports;
}

RunManifest export_activations(const ArchitectureSpec& spec, std::span<const MultiImage> inputs,
                               std::uint64_t seed, const std::filesystem::path& out_dir,
                               const ProfileOptions& options) {
  if (inputs.empty()) throw InvalidInput("export_activations: no input images");
  const RandomizedNetwork net(spec, seed);
  const auto& taps = net.spec().taps;
  std::vector<std::map<std::string, Activation>> acts(inputs.size());
  parallel_for(inputs.size(), [&](std::size_t i) {
    acts[i] = net.forward(to_activation(prepare_input(inputs[i], options)), taps);
  });

  std::filesystem::create_directories(out_dir);
  RunManifest manifest;
  manifest.model_name = spec.name;
  manifest.weights_origin = WeightsOrigin::randomized;
  manifest.input_description = std::to_string(inputs.size()) + " images, " +
                               std::to_string(spec.input.size) + "x" +
                               std::to_string(spec.input.size);
  manifest.seed = seed;
  for (const auto& tap : taps) {
    const TensorShape shape = net.spec().shape_of(tap);
    std::vector<float> batch;
    batch.reserve(inputs.size() * shape.channels * shape.size * shape.size);
    for (const auto& a : acts) {
      const auto& data = a.at(tap).data;
      batch.insert(batch.end(), data.begin(), data.end());
    }
    std::vector<std::size_t> dims{inputs.size(), shape.channels, shape.size, shape.size};
    const std::string file = tap + ".npy";
    save_npy(out_dir / file, NpyTensor::from_f32(dims, batch));
    manifest.layers.push_back({tap, file, dims});
  }
  write_manifest(manifest, out_dir / "manifest.json");
  return manifest;
}

}  // namespace sropkit
