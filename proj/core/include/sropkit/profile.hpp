#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sropkit/architecture.hpp"
#include "sropkit/engine.hpp"
#include "sropkit/image.hpp"
#include "sropkit/manifest.hpp"
#include "sropkit/spectral.hpp"
#include "sropkit/stats.hpp"

namespace sropkit {

// Band against which layer SROP bins are normalized in profiles.
//   input    bin / m(input resolution): every layer is expressed in the
//            frequency units of the network input, so a 2x downscale halves
//            the attainable range. This is the scale the downscaling
//            baseline and layer-wise profiles are reported on.
//   per_map  bin / m(map resolution), i.e. srop_2d's own normalization.
enum class BandReference { input, per_map };

struct ProfileOptions {
  double kappa = kDefaultKappa;
  SpectralOptions spectral;
  BandReference band = BandReference::input;
  // Collapse RGB inputs to Rec.601 luminance before the baseline ladder
  // instead of pooling the per-channel SROPs.
  bool luminance = false;
  // Standard ImageNet mean / std normalization of 3-channel inputs.
  bool imagenet_normalize = true;
};

const char* to_string(BandReference band);

// Applies the ImageNet normalization (or nothing) and checks the size.
MultiImage prepare_input(const MultiImage& image, const ProfileOptions& options);

// Normalized SROPs of every channel of `map`; zero-energy channels are
// std::nullopt.
std::vector<std::optional<double>> map_srops(const Activation& map,
                                             std::size_t reference_size,
                                             const ProfileOptions& options);

// Forward pass per input through the randomized network; at every tap the
// per-channel SROPs of all inputs are pooled into one report. Reports come
// back in layer order.
std::vector<SropReport> run_profile(const ArchitectureSpec& spec,
                                    std::span<const MultiImage> inputs,
                                    std::uint64_t seed, const ProfileOptions& options = {});

// Repeated 2 x 2 / stride 2 max-pool of the inputs, with a report at every
// scale starting from the input itself (224, 112, 56, 28, 14, 7 for
// 224 x 224 inputs). Report names are "ds<resolution>".
inline constexpr std::size_t kBaselineLevels = 6;
std::vector<SropReport> benchmark_downscale(std::span<const MultiImage> inputs,
                                            const ProfileOptions& options = {},
                                            std::size_t levels = kBaselineLevels);

// Reports for every layer of an activation dump. Each layer file holds
// c x n x n or N x c x n x n float data. The input reference resolution is
// `input_size` if positive, otherwise the largest layer resolution.
std::vector<SropReport> profile_manifest(const RunManifest& manifest,
                                         const std::filesystem::path& base_dir,
                                         const ProfileOptions& options = {},
                                         std::size_t input_size = 0);

// Runs the network on `inputs` and writes one N x c x n x n f32 NPY per tap
// plus manifest.json into `out_dir`, in the same layout the pretrained
// exporter produces.
RunManifest export_activations(const ArchitectureSpec& spec, std::span<const MultiImage> inputs,
                               std::uint64_t seed, const std::filesystem::path& out_dir,
                               const ProfileOptions& options = {});

}  // namespace sropkit
