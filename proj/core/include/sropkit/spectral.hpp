#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sropkit/image.hpp"

namespace sropkit {

inline constexpr double kDefaultKappa = 0.85;

enum class SpectrumMode {
  magnitude,  // |F|
  power,      // |F|^2
};

struct SpectralOptions {
  SpectrumMode mode = SpectrumMode::magnitude;
  // Drop the zero-frequency term. In 1-D the default band then starts at
  // bin 1; in 2-D the DC cell is zeroed and the band stays (0, m).
  bool exclude_dc = false;
};

struct Band {
  std::size_t lo = 0;
  std::size_t hi = 0;
};

// One-sided spectrum restricted to [band_lo, band_hi] and normalized to unit
// sum. values[i] belongs to bin band_lo + i.
struct Spectrum1D {
  std::vector<double> values;
  std::size_t band_lo = 0;
  std::size_t band_hi = 0;
};

// DC-centred n x n spectrum grid, row-major. The DC term sits at
// (n / 2, n / 2) for both odd and even n.
struct Spectrum2D {
  std::size_t n = 0;
  std::vector<double> grid;

  std::size_t dc_index() const noexcept { return n / 2; }
  double at(std::size_t r, std::size_t c) const { return grid[r * n + c]; }
};

struct SropValue {
  std::size_t bin = 0;
  double normalized = 0.0;
  double kappa = kDefaultKappa;

  friend bool operator==(const SropValue&, const SropValue&) = default;
};

enum class MapSource { randomized, pretrained, input_image };

const char* to_string(MapSource source);

// c x n x n activation volume captured at one layer.
class FeatureMapTensor {
 public:
  FeatureMapTensor(std::string layer_name, MapSource source,
                   std::size_t channels, std::size_t size,
                   std::vector<float> data);

  const std::string& layer_name() const noexcept { return layer_name_; }
  MapSource source() const noexcept { return source_; }
  std::size_t channels() const noexcept { return channels_; }
  std::size_t size() const noexcept { return size_; }
  const std::vector<float>& data() const noexcept { return data_; }

  std::span<const float> channel(std::size_t c) const;

 private:
  std::string layer_name_;
  MapSource source_;
  std::size_t channels_;
  std::size_t size_;
  std::vector<float> data_;
};

// Normalized one-sided spectrum of a real series. Entries are |F(k)| (or
// |F(k)|^2 in power mode) for k in the band, divided by their sum. The
// default band is (0, floor(len / 2)), or (1, floor(len / 2)) with
// exclude_dc.
Spectrum1D power_spectrum_1d(std::span<const double> signal,
                             std::optional<Band> band = std::nullopt,
                             const SpectralOptions& options = {});

// Smallest bin k whose cumulative mass from band_lo through k reaches
// kappa * total. A cumulative sum within 1e-12 (relative) of the target
// counts as reaching it, so exact-arithmetic ties resolve the same way in
// floating point.
SropValue srop_from_spectrum(const Spectrum1D& spectrum,
                             double kappa = kDefaultKappa);

// (bin - b1) / (b2 - b1), or 0 for a single-bin band.
double normalize_srop(std::size_t bin, std::size_t b1, std::size_t b2);

Spectrum2D power_spectrum_2d(const Image& image,
                             const SpectralOptions& options = {});

// Number of radius bins minus one for an n x n map:
// floor(sqrt(2) * (n - 1) / 2) - 1. The profile covers bins 0..m.
std::size_t radial_bin_count(std::size_t n);

// Unnormalized annulus sums. annulus[k] collects every cell whose distance
// r from the DC cell satisfies k <= r < k + 1, for k <= m. Cells with
// r >= m + 1 (the extreme corners) land in `dropped`.
struct RadialEnergy {
  std::vector<double> annulus;
  double dropped = 0.0;
};

RadialEnergy radial_energy(const Spectrum2D& spectrum);

// radial_energy normalized over band (0, m).
Spectrum1D radial_profile(const Spectrum2D& spectrum);

SropValue srop_2d(const Image& image, double kappa = kDefaultKappa,
                  const SpectralOptions& options = {});

// Per-channel srop_2d. Channels without spectral energy (for example a
// ReLU map that is zero everywhere) come back as std::nullopt.
std::vector<std::optional<SropValue>> srop_feature_map(
    const FeatureMapTensor& tensor, double kappa = kDefaultKappa,
    const SpectralOptions& options = {});

}  // namespace sropkit
