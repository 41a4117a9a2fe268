#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace sropkit::cli {

enum class ExitCode : int { ok = 0, runtime_error = 1, usage_error = 2 };

struct CliConfig {
  std::string subcommand;
  std::vector<std::string> inputs;  // positional arguments of the subcommand
  double kappa = 0.85;
  std::uint64_t seed = 0;
  std::string out_dir;  // empty: print the primary table to stdout
  std::vector<std::string> formats;  // csv, json, svg
  bool exclude_dc = false;
  bool power_spectrum = false;
  bool luminance = false;
  bool per_map_band = false;
  bool pooled = false;
  std::size_t input_size = 0;
  std::size_t grid_points = 256;
  std::size_t max_images = 0;
  std::string mnist_images;
  std::string mnist_labels;
  std::string cifar_batch;
  std::string export_dir;
};

// Parses argv (without the program name) and runs the subcommand. Normal
// output goes to `out`, diagnostics and usage text to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sropkit::cli
