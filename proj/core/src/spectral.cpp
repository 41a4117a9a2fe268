#include "sropkit/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <unordered_map>

#include "sropkit/error.hpp"
#include "sropkit/fft.hpp"

namespace sropkit {

namespace {

constexpr double kTieTolerance = 1e-12;

double spectral_value(const Complex& z, SpectrumMode mode) {
  return mode == SpectrumMode::power ? std::norm(z) : std::abs(z);
}

std::size_t isqrt(std::size_t v) {
  auto r = static_cast<std::size_t>(std::sqrt(static_cast<double>(v)));
  while (r * r > v) --r;
  while ((r + 1) * (r + 1) <= v) ++r;
  return r;
}

// Bin of every cell of a DC-centred n x n grid, or -1 past bin m.
const std::vector<int>& radial_bins(std::size_t n) {
  thread_local std::unordered_map<std::size_t, std::unique_ptr<std::vector<int>>>
      cache;
  auto& slot = cache[n];
  if (!slot) {
    const std::size_t m = radial_bin_count(n);
    const auto centre = static_cast<long>(n / 2);
    slot = std::make_unique<std::vector<int>>(n * n);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < n; ++c) {
        const long dr = static_cast<long>(r) - centre;
        const long dc = static_cast<long>(c) - centre;
        const auto d2 = static_cast<std::size_t>(dr * dr + dc * dc);
        const std::size_t k = isqrt(d2);
        (*slot)[r * n + c] = k <= m ? static_cast<int>(k) : -1;
      }
    }
  }
  return *slot;
}

Spectrum1D normalize_band(std::vector<double> values, std::size_t lo,
                          std::size_t hi) {
  double total = 0.0;
  for (double v : values) total += v;
  if (!(total > 0.0)) {
    throw ZeroEnergy("spectrum has no energy in band; roll-off undefined");
  }
  for (double& v : values) v /= total;
  return Spectrum1D{std::move(values), lo, hi};
}

}  // namespace

const char* to_string(MapSource source) {
  switch (source) {
    case MapSource::randomized:
      return "randomized";
    case MapSource::pretrained:
      return "pretrained";
    case MapSource::input_image:
      return "input_image";
  }
  return "unknown";
}

FeatureMapTensor::FeatureMapTensor(std::string layer_name, MapSource source,
                                   std::size_t channels, std::size_t size,
                                   std::vector<float> data)
    : layer_name_(std::move(layer_name)),
      source_(source),
      channels_(channels),
      size_(size),
      data_(std::move(data)) {
  if (channels_ < 1) throw InvalidInput("feature map needs at least one channel");
  if (size_ < 3) {
    throw TooSmall("feature map size " + std::to_string(size_) +
                   " is below the minimum of 3");
  }
  if (data_.size() != channels_ * size_ * size_) {
    throw InvalidInput("feature map data does not match c x n x n");
  }
}

std::span<const float> FeatureMapTensor::channel(std::size_t c) const {
  if (c >= channels_) throw InvalidInput("channel index out of range");
  return {data_.data() + c * size_ * size_, size_ * size_};
}

Spectrum1D power_spectrum_1d(std::span<const double> signal,
                             std::optional<Band> band,
                             const SpectralOptions& options) {
  if (signal.size() < 2) {
    throw InvalidInput("power_spectrum_1d: signal needs at least 2 samples");
  }
  const std::size_t nyquist = signal.size() / 2;
  Band b = band.value_or(Band{options.exclude_dc ? std::size_t{1} : 0, nyquist});
  if (b.lo > b.hi || b.hi > nyquist) {
    throw InvalidInput("power_spectrum_1d: band outside [0, len/2]");
  }
  const auto spectrum = dft_real(signal);
  std::vector<double> values;
  values.reserve(b.hi - b.lo + 1);
  for (std::size_t k = b.lo; k <= b.hi; ++k) {
    values.push_back(options.exclude_dc && k == 0
                         ? 0.0
                         : spectral_value(spectrum[k], options.mode));
  }
  return normalize_band(std::move(values), b.lo, b.hi);
}

SropValue srop_from_spectrum(const Spectrum1D& spectrum, double kappa) {
  if (!(kappa > 0.0 && kappa <= 1.0)) {
    throw InvalidParameter("kappa must lie in (0, 1]");
  }
  if (spectrum.values.empty() ||
      spectrum.values.size() != spectrum.band_hi - spectrum.band_lo + 1) {
    throw InvalidInput("spectrum length does not match its band");
  }
  double total = 0.0;
  for (double v : spectrum.values) total += v;
  if (!(total > 0.0)) throw ZeroEnergy("spectrum has no energy");

  const double target = kappa * total * (1.0 - kTieTolerance);
  double cumulative = 0.0;
  std::size_t offset = spectrum.values.size() - 1;
  for (std::size_t i = 0; i < spectrum.values.size(); ++i) {
    cumulative += spectrum.values[i];
    if (cumulative >= target) {
      offset = i;
      break;
    }
  }
  const std::size_t bin = spectrum.band_lo + offset;
  return SropValue{bin, normalize_srop(bin, spectrum.band_lo, spectrum.band_hi),
                   kappa};
}

double normalize_srop(std::size_t bin, std::size_t b1, std::size_t b2) {
  if (b1 > b2 || bin < b1 || bin > b2) {
    throw InvalidInput("normalize_srop: bin outside band");
  }
  if (b1 == b2) return 0.0;
  return static_cast<double>(bin - b1) / static_cast<double>(b2 - b1);
}

std::size_t radial_bin_count(std::size_t n) {
  if (n < 3) {
    throw TooSmall("radial profile needs n >= 3, got " + std::to_string(n));
  }
  const double half_diagonal = std::sqrt(2.0) * static_cast<double>(n - 1) / 2.0;
  return static_cast<std::size_t>(std::floor(half_diagonal)) - 1;
}

Spectrum2D power_spectrum_2d(const Image& image, const SpectralOptions& options) {
  if (!image.square()) throw InvalidInput("power_spectrum_2d: image must be square");
  const std::size_t n = image.rows;
  if (n < 3) throw TooSmall("power_spectrum_2d: n must be at least 3");

  const auto spectrum = dft2_real(image.pixels, n, n);
  Spectrum2D out{n, std::vector<double>(n * n)};
  const std::size_t shift = n / 2;
  for (std::size_t u = 0; u < n; ++u) {
    const std::size_t r = (u + shift) % n;
    for (std::size_t v = 0; v < n; ++v) {
      const std::size_t c = (v + shift) % n;
      out.grid[r * n + c] = spectral_value(spectrum[u * n + v], options.mode);
    }
  }
  if (options.exclude_dc) out.grid[shift * n + shift] = 0.0;
  return out;
}

RadialEnergy radial_energy(const Spectrum2D& spectrum) {
  const std::size_t n = spectrum.n;
  if (spectrum.grid.size() != n * n) {
    throw InvalidInput("radial_energy: grid is not n x n");
  }
  const std::size_t m = radial_bin_count(n);
  const auto& bins = radial_bins(n);
  RadialEnergy out{std::vector<double>(m + 1, 0.0), 0.0};
  for (std::size_t i = 0; i < n * n; ++i) {
    const int k = bins[i];
    if (k >= 0) {
      out.annulus[static_cast<std::size_t>(k)] += spectrum.grid[i];
    } else {
      out.dropped += spectrum.grid[i];
    }
  }
  return out;
}

Spectrum1D radial_profile(const Spectrum2D& spectrum) {
  auto energy = radial_energy(spectrum);
  const std::size_t m = energy.annulus.size() - 1;
  return normalize_band(std::move(energy.annulus), 0, m);
}

SropValue srop_2d(const Image& image, double kappa, const SpectralOptions& options) {
  return srop_from_spectrum(radial_profile(power_spectrum_2d(image, options)),
                            kappa);
}

std::vector<std::optional<SropValue>> srop_feature_map(
    const FeatureMapTensor& tensor, double kappa, const SpectralOptions& options) {
  if (!(kappa > 0.0 && kappa <= 1.0)) {
    throw InvalidParameter("kappa must lie in (0, 1]");
  }
  const std::size_t n = tensor.size();
  std::vector<std::optional<SropValue>> out;
  out.reserve(tensor.channels());
  Image slice(n, n);
  for (std::size_t c = 0; c < tensor.channels(); ++c) {
    const auto plane = tensor.channel(c);
    std::copy(plane.begin(), plane.end(), slice.pixels.begin());
    try {
      out.emplace_back(srop_2d(slice, kappa, options));
    } catch (const ZeroEnergy&) {
      out.emplace_back(std::nullopt);
    }
  }
  return out;
}

}  // namespace sropkit
