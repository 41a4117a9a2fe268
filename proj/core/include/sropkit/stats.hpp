#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sropkit {

// Layer-wise summary of per-kernel normalized SROPs.
struct SropReport {
  std::string layer_name;
  std::size_t resolution = 0;
  std::vector<double> kernel_srops;
  double mean = 0.0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double std = 0.0;  // population standard deviation
  std::size_t skipped_channels = 0;
};

// Quantile by linear interpolation between closest ranks:
// h = (n - 1) p, value = x[floor h] + (h - floor h)(x[floor h + 1] - x[floor h]).
double quantile_sorted(std::span<const double> sorted, double p);

// Missing entries (zero-energy channels) are skipped and counted.
// Throws EmptyLayer when nothing remains.
SropReport layer_stats(std::span<const std::optional<double>> srops,
                       std::string layer_name, std::size_t resolution);
SropReport layer_stats(std::span<const double> srops, std::string layer_name,
                       std::size_t resolution);

struct KdeCurve {
  std::vector<double> grid;     // uniform over [0, 1]
  std::vector<double> density;  // >= 0
  double bandwidth = 0.0;
  std::vector<double> peaks;    // grid locations of local maxima
};

// 1.06 * sigma * n^(-1/5) with sigma the sample (n - 1) standard deviation.
double silverman_bandwidth(std::span<const double> values);

// Gaussian KDE evaluated on grid_points uniform points spanning [0, 1].
// Needs at least two distinct values and grid_points >= 16.
KdeCurve kde_estimate(std::span<const double> values, std::size_t grid_points = 256,
                      std::optional<double> bandwidth = std::nullopt);

double trapezoid(std::span<const double> x, std::span<const double> y);

struct ProfileRow {
  std::string layer;
  std::size_t resolution = 0;
  double mean = 0.0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double std = 0.0;
  double log_mean = 0.0;  // natural log; -inf for a zero mean
  std::size_t skipped = 0;

  friend bool operator==(const ProfileRow&, const ProfileRow&) = default;
};

using ProfileTable = std::vector<ProfileRow>;

// Depth-ordered table; layer names must be unique.
ProfileTable profile_series(std::span<const SropReport> reports);

inline constexpr const char* kProfileCsvHeader =
    "layer,resolution,mean,median,q1,q3,std,log_mean,skipped";

// Doubles are written with 17 significant digits so the table re-parses
// exactly.
void write_profile_csv(std::ostream& out, const ProfileTable& table);
std::string profile_csv(const ProfileTable& table);
ProfileTable read_profile_csv(std::istream& in);

}  // namespace sropkit
