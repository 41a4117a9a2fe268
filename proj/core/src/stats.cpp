#include "sropkit/stats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <locale>
#include <numbers>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "sropkit/error.hpp"

namespace sropkit {

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw EmptyLayer("quantile of an empty sample");
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

SropReport layer_stats(std::span<const std::optional<double>> srops,
                       std::string layer_name, std::size_t resolution) {
  std::vector<double> present;
  present.reserve(srops.size());
  for (const auto& v : srops) {
    if (v) present.push_back(*v);
  }
  SropReport report = layer_stats(std::span<const double>(present),
                                  std::move(layer_name), resolution);
  report.skipped_channels = srops.size() - present.size();
  return report;
}

SropReport layer_stats(std::span<const double> srops, std::string layer_name,
                       std::size_t resolution) {
  if (srops.empty()) {
    throw EmptyLayer("layer '" + layer_name + "' has no usable SROP values");
  }
  SropReport r;
  r.layer_name = std::move(layer_name);
  r.resolution = resolution;
  r.kernel_srops.assign(srops.begin(), srops.end());

  std::vector<double> sorted = r.kernel_srops;
  std::sort(sorted.begin(), sorted.end());
  // Summing in sorted order makes the statistics independent of the input
  // permutation down to the last bit.
  const double n = static_cast<double>(sorted.size());
  const double sum = std::accumulate(sorted.begin(), sorted.end(), 0.0);
  r.mean = std::clamp(sum / n, sorted.front(), sorted.back());
  double ss = 0.0;
  for (double v : sorted) ss += (v - r.mean) * (v - r.mean);
  r.std = std::sqrt(ss / n);
  r.q1 = quantile_sorted(sorted, 0.25);
  r.median = quantile_sorted(sorted, 0.5);
  r.q3 = quantile_sorted(sorted, 0.75);
  return r;
}

double silverman_bandwidth(std::span<const double> values) {
  const double n = static_cast<double>(values.size());
  if (values.size() < 2) throw DegenerateSample("bandwidth needs two values");
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sigma = std::sqrt(ss / (n - 1.0));
  return 1.06 * sigma * std::pow(n, -0.2);
}

KdeCurve kde_estimate(std::span<const double> values, std::size_t grid_points,
                      std::optional<double> bandwidth) {
  if (grid_points < 16) throw InvalidParameter("kde: grid_points must be >= 16");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (values.size() < 2 || *lo == *hi) {
    throw DegenerateSample("kde: need at least two distinct values");
  }
  KdeCurve curve;
  curve.bandwidth = bandwidth.value_or(silverman_bandwidth(values));
  if (!(curve.bandwidth > 0.0)) throw InvalidParameter("kde: bandwidth must be positive");

  const double h = curve.bandwidth;
  const double norm = 1.0 / (static_cast<double>(values.size()) * h *
                             std::sqrt(2.0 * std::numbers::pi));
  curve.grid.resize(grid_points);
  curve.density.resize(grid_points);
  for (std::size_t i = 0; i < grid_points; ++i) {
    const double x = static_cast<double>(i) / static_cast<double>(grid_points - 1);
    double acc = 0.0;
    for (double v : values) {
      const double z = (x - v) / h;
      acc += std::exp(-0.5 * z * z);
    }
    curve.grid[i] = x;
    curve.density[i] = acc * norm;
  }

  const auto& d = curve.density;
  // ignore ripples in the numerically empty tails
  const double floor = 1e-6 * *std::max_element(d.begin(), d.end());
  for (std::size_t i = 0; i < grid_points; ++i) {
    if (d[i] <= floor) continue;
    const bool above_left = i == 0 || d[i] > d[i - 1];
    const bool not_below_right = i + 1 == grid_points || d[i] >= d[i + 1];
    if (above_left && not_below_right) curve.peaks.push_back(curve.grid[i]);
  }
  return curve;
}

double trapezoid(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidInput("trapezoid: length mismatch");
  double area = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    area += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  }
  return area;
}

ProfileTable profile_series(std::span<const SropReport> reports) {
  if (reports.empty()) throw InvalidInput("profile_series: no reports");
  std::set<std::string> seen;
  ProfileTable table;
  table.reserve(reports.size());
  for (const auto& r : reports) {
    if (!seen.insert(r.layer_name).second) {
      throw InvalidInput("profile_series: duplicate layer name '" + r.layer_name + "'");
    }
    table.push_back(ProfileRow{r.layer_name, r.resolution, r.mean, r.median, r.q1,
                               r.q3, r.std, std::log(r.mean), r.skipped_channels});
  }
  return table;
}

namespace {

std::string format_double(double v) {
  if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& field) {
  if (field == "-inf") return -std::numeric_limits<double>::infinity();
  if (field == "inf") return std::numeric_limits<double>::infinity();
  if (field == "nan") return std::numeric_limits<double>::quiet_NaN();
  // strtod is locale-sensitive; the classic stream locale is not.
  std::istringstream in(field);
  in.imbue(std::locale::classic());
  double v = 0.0;
  in >> v;
  if (in.fail() || !in.eof()) {
    throw ParseError(ParseErrorKind::bad_value, "csv: not a number: '" + field + "'");
  }
  return v;
}

std::size_t parse_size(const std::string& field) {
  std::size_t v = 0;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (ec != std::errc{} || ptr != end) {
    throw ParseError(ParseErrorKind::bad_value, "csv: not an integer: '" + field + "'");
  }
  return v;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  return fields;
}

}  // namespace

void write_profile_csv(std::ostream& out, const ProfileTable& table) {
  out << kProfileCsvHeader << '\n';
  for (const auto& r : table) {
    out << csv_escape(r.layer) << ',' << r.resolution << ',' << format_double(r.mean)
        << ',' << format_double(r.median) << ',' << format_double(r.q1) << ','
        << format_double(r.q3) << ',' << format_double(r.std) << ','
        << format_double(r.log_mean) << ',' << r.skipped << '\n';
  }
}

std::string profile_csv(const ProfileTable& table) {
  std::ostringstream out;
  write_profile_csv(out, table);
  return out.str();
}

ProfileTable read_profile_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kProfileCsvHeader) {
    throw ParseError(ParseErrorKind::bad_header, "csv: unexpected header");
  }
  ProfileTable table;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 9) {
      throw ParseError(ParseErrorKind::size_mismatch, "csv: expected 9 fields");
    }
    table.push_back(ProfileRow{f[0], parse_size(f[1]), parse_double(f[2]),
                               parse_double(f[3]), parse_double(f[4]),
                               parse_double(f[5]), parse_double(f[6]),
                               parse_double(f[7]), parse_size(f[8])});
  }
  return table;
}

}  // namespace sropkit
