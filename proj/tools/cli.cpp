#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "sropkit/architecture.hpp"
#include "sropkit/datasets.hpp"
#include "sropkit/error.hpp"
#include "sropkit/manifest.hpp"
#include "sropkit/npy.hpp"
#include "sropkit/profile.hpp"
#include "sropkit/spectral.hpp"
#include "sropkit/stats.hpp"
#include "sropkit/synth.hpp"
#include "svg.hpp"

namespace sropkit::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Artifacts {
  std::string stem;
  std::string csv;
  json doc;
  std::string svg;
};

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

SpectralOptions spectral_options(const CliConfig& cfg) {
  SpectralOptions o;
  o.exclude_dc = cfg.exclude_dc;
  o.mode = cfg.power_spectrum ? SpectrumMode::power : SpectrumMode::magnitude;
  return o;
}

ProfileOptions profile_options(const CliConfig& cfg) {
  ProfileOptions o;
  o.kappa = cfg.kappa;
  o.spectral = spectral_options(cfg);
  o.luminance = cfg.luminance;
  o.band = cfg.per_map_band ? BandReference::per_map : BandReference::input;
  return o;
}

bool wants(const CliConfig& cfg, const std::string& format) {
  return std::find(cfg.formats.begin(), cfg.formats.end(), format) != cfg.formats.end();
}

json report_json(const std::vector<SropReport>& reports) {
  json arr = json::array();
  for (const auto& r : reports) {
    arr.push_back(json{{"layer", r.layer_name},
                       {"resolution", r.resolution},
                       {"mean", r.mean},
                       {"median", r.median},
                       {"q1", r.q1},
                       {"q3", r.q3},
                       {"std", r.std},
                       {"skipped", r.skipped_channels},
                       {"kernel_srops", r.kernel_srops}});
  }
  return arr;
}

Artifacts profile_artifacts(const std::string& stem, const std::string& title,
                            const std::vector<SropReport>& reports) {
  const ProfileTable table = profile_series(reports);
  Series s{"mean SROP", {}, {}};
  std::vector<std::string> ticks;
  for (std::size_t i = 0; i < table.size(); ++i) {
    s.x.push_back(static_cast<double>(i));
    s.y.push_back(table[i].log_mean);
    ticks.push_back(table[i].layer);
  }
  return Artifacts{stem, profile_csv(table), json{{"layers", report_json(reports)}},
                   svg_line_chart(title, "log(SROP)", {s}, ticks)};
}

json config_json(const CliConfig& cfg) {
  return json{{"subcommand", cfg.subcommand},
              {"inputs", cfg.inputs},
              {"kappa", cfg.kappa},
              {"seed", cfg.seed},
              {"formats", cfg.formats},
              {"exclude_dc", cfg.exclude_dc},
              {"power_spectrum", cfg.power_spectrum},
              {"luminance", cfg.luminance},
              {"per_map_band", cfg.per_map_band},
              {"pooled", cfg.pooled},
              {"input_size", cfg.input_size},
              {"grid_points", cfg.grid_points},
              {"max_images", cfg.max_images},
              {"mnist_images", cfg.mnist_images},
              {"mnist_labels", cfg.mnist_labels},
              {"cifar_batch", cfg.cifar_batch},
              {"export_dir", cfg.export_dir}};
}

void emit(const CliConfig& cfg, const Artifacts& a, std::ostream& out) {
  if (cfg.out_dir.empty()) {
    if (wants(cfg, "json") && !wants(cfg, "csv")) {
      out << a.doc.dump(2) << '\n';
    } else {
      out << a.csv;
    }
    return;
  }
  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  if (wants(cfg, "csv")) write_file_atomic(dir / (a.stem + ".csv"), a.csv);
  if (wants(cfg, "json")) write_file_atomic(dir / (a.stem + ".json"), a.doc.dump(2) + "\n");
  if (wants(cfg, "svg") && !a.svg.empty()) write_file_atomic(dir / (a.stem + ".svg"), a.svg);
  out << "wrote " << a.stem << " artifacts to " << dir.string() << '\n';
}

void write_run_sidecar(const CliConfig& cfg) {
  if (cfg.out_dir.empty()) return;
  fs::create_directories(cfg.out_dir);
  write_file_atomic(fs::path(cfg.out_dir) / "run.json", config_json(cfg).dump(2) + "\n");
}

std::vector<double> read_series(const fs::path& path) {
  if (path.extension() == ".npy") return load_npy(path).to_f64();
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::vector<double> values;
  std::string token;
  while (in >> token) {
    std::stringstream parts(token);
    std::string field;
    while (std::getline(parts, field, ',')) {
      if (field.empty()) continue;
      std::istringstream conv(field);
      conv.imbue(std::locale::classic());
      double v = 0.0;
      conv >> v;
      if (conv.fail() || !conv.eof()) {
        throw ParseError(ParseErrorKind::bad_value, "not a number: '" + field + "'");
      }
      values.push_back(v);
    }
  }
  return values;
}

std::vector<MultiImage> load_images(const CliConfig& cfg, const std::string& dir) {
  auto images = load_image_dir(dir);
  if (cfg.max_images > 0 && images.size() > cfg.max_images) images.resize(cfg.max_images);
  return images;
}

Artifacts cmd_srop1d(const CliConfig& cfg) {
  const auto signal = read_series(cfg.inputs.at(0));
  const Spectrum1D s = power_spectrum_1d(signal, std::nullopt, spectral_options(cfg));
  const SropValue v = srop_from_spectrum(s, cfg.kappa);
  std::string csv = "bin,normalized,band_lo,band_hi,kappa\n" + std::to_string(v.bin) + ',' +
                    num(v.normalized) + ',' + std::to_string(s.band_lo) + ',' +
                    std::to_string(s.band_hi) + ',' + num(v.kappa) + '\n';
  json doc{{"bin", v.bin},       {"normalized", v.normalized}, {"band_lo", s.band_lo},
           {"band_hi", s.band_hi}, {"kappa", v.kappa},          {"spectrum", s.values}};
  Series series{"spectrum", {}, s.values};
  for (std::size_t k = s.band_lo; k <= s.band_hi; ++k) series.x.push_back(static_cast<double>(k));
  return {"srop1d", csv, doc, svg_line_chart("normalized one-sided spectrum", "S(k)", {series})};
}

Artifacts cmd_sropimg(const CliConfig& cfg) {
  MultiImage img = image_from_npy(load_npy(cfg.inputs.at(0)));
  if (cfg.luminance && img.channels == 3) img = to_grayscale(img);
  if (img.rows != img.cols) throw InvalidInput("sropimg: image must be square");
  const std::size_t m = radial_bin_count(img.rows);
  std::string csv = "channel,bin,normalized,m\n";
  json rows = json::array();
  for (std::size_t c = 0; c < img.channels; ++c) {
    try {
      const SropValue v = srop_2d(img.channel(c), cfg.kappa, spectral_options(cfg));
      csv += std::to_string(c) + ',' + std::to_string(v.bin) + ',' + num(v.normalized) + ',' +
             std::to_string(m) + '\n';
      rows.push_back(json{{"channel", c}, {"bin", v.bin}, {"normalized", v.normalized}});
    } catch (const ZeroEnergy&) {
      csv += std::to_string(c) + ",,," + std::to_string(m) + '\n';
      rows.push_back(json{{"channel", c}, {"bin", nullptr}, {"normalized", nullptr}});
    }
  }
  return {"sropimg", csv, json{{"m", m}, {"channels", rows}}, ""};
}

Artifacts cmd_sroptensor(const CliConfig& cfg, std::ostream& out) {
  const fs::path path(cfg.inputs.at(0));
  const NpyTensor t = load_npy(path);
  const auto& s = t.shape();
  if (s.size() != 3 || s[1] != s[2]) throw InvalidInput("sroptensor: expected c x n x n array");
  const FeatureMapTensor tensor(path.stem().string(), MapSource::input_image, s[0], s[1],
                                t.to_f32());
  const auto values = srop_feature_map(tensor, cfg.kappa, spectral_options(cfg));
  std::vector<std::optional<double>> normalized;
  std::string channels_csv = "channel,bin,normalized\n";
  for (std::size_t c = 0; c < values.size(); ++c) {
    if (values[c]) {
      normalized.emplace_back(values[c]->normalized);
      channels_csv += std::to_string(c) + ',' + std::to_string(values[c]->bin) + ',' +
                      num(values[c]->normalized) + '\n';
    } else {
      normalized.emplace_back(std::nullopt);
      channels_csv += std::to_string(c) + ",,\n";
    }
  }
  const SropReport report =
      layer_stats(std::span<const std::optional<double>>(normalized), tensor.layer_name(), s[1]);
  if (!cfg.out_dir.empty() && wants(cfg, "csv")) {
    fs::create_directories(cfg.out_dir);
    write_file_atomic(fs::path(cfg.out_dir) / "sroptensor_channels.csv", channels_csv);
  } else if (cfg.out_dir.empty()) {
    out << channels_csv << '\n';
  }
  Artifacts a = profile_artifacts("sroptensor", "per-channel SROP", {report});
  a.svg.clear();
  return a;
}

Artifacts cmd_profile(const CliConfig& cfg) {
  const fs::path path(cfg.inputs.at(0));
  const RunManifest manifest = read_manifest(path);
  const auto reports =
      profile_manifest(manifest, path.parent_path(), profile_options(cfg), cfg.input_size);
  return profile_artifacts("profile", manifest.model_name + " (" +
                                          to_string(manifest.weights_origin) + ")",
                           reports);
}

Artifacts cmd_baseline(const CliConfig& cfg) {
  const auto images = load_images(cfg, cfg.inputs.at(0));
  const auto reports = benchmark_downscale(images, profile_options(cfg));
  return profile_artifacts("baseline", "benchmark max-pool ladder", reports);
}

Artifacts cmd_randnet(const CliConfig& cfg) {
  const ArchitectureSpec spec = load_architecture(cfg.inputs.at(0));
  const auto images = load_images(cfg, cfg.inputs.at(1));
  if (!cfg.export_dir.empty()) {
    export_activations(spec, images, cfg.seed, cfg.export_dir, profile_options(cfg));
  }
  const auto reports = run_profile(spec, images, cfg.seed, profile_options(cfg));
  return profile_artifacts("randnet", spec.name + " (randomized, seed " +
                                          std::to_string(cfg.seed) + ")",
                           reports);
}

Artifacts cmd_synth(const CliConfig& cfg) {
  if (cfg.out_dir.empty()) throw ValidationError("synth: --out is required");
  if (cfg.mnist_images.empty() || cfg.mnist_labels.empty() || cfg.cifar_batch.empty()) {
    throw ValidationError("synth: --mnist-images, --mnist-labels and --cifar-batch are required");
  }
  BlendSpec spec;
  spec.mode = parse_blend_mode(cfg.inputs.at(0));
  try {
    spec.w = std::stod(cfg.inputs.at(1));
  } catch (const std::exception&) {
    throw InvalidParameter("synth: w must be a number");
  }
  spec.seed = cfg.seed;
  const auto digits =
      read_mnist_idx(read_file_bytes(cfg.mnist_images), read_file_bytes(cfg.mnist_labels));
  const auto cifar = read_cifar10_batch(read_file_bytes(cfg.cifar_batch));
  const SyntheticDataset ds = generate_dataset(spec, digits, cifar);

  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  save_npy(dir / "images.npy", NpyTensor::from_f32({ds.count, ds.rows, ds.cols}, ds.images));
  save_npy(dir / "labels.npy", NpyTensor::from_u8({ds.count}, ds.labels));
  std::vector<float> frog(ds.frog.pixels.begin(), ds.frog.pixels.end());
  save_npy(dir / "frog.npy", NpyTensor::from_f32({ds.frog.rows, ds.frog.cols}, frog));
  write_file_atomic(dir / "provenance.json", provenance_to_json(ds.provenance));

  std::string csv = "mode,w,count,blended,frog_index\n" +
                    std::string(to_string(spec.mode)) + ',' + num(spec.w) + ',' +
                    std::to_string(ds.count) + ',' +
                    std::to_string(ds.provenance.blended_count) + ',' +
                    std::to_string(ds.provenance.frog_index) + '\n';
  return {"synth", csv, json::parse(provenance_to_json(ds.provenance)), ""};
}

Artifacts cmd_kde(const CliConfig& cfg) {
  const NpyTensor t = load_npy(cfg.inputs.at(0));
  const auto raw = t.to_f64();
  std::vector<double> values;
  if (t.shape().size() == 2 && !cfg.pooled) {
    const std::size_t rows = t.shape()[0], cols = t.shape()[1];
    if (cols == 0) throw InvalidInput("kde: empty rows");
    for (std::size_t r = 0; r < rows; ++r) {
      const double sum = std::accumulate(raw.begin() + static_cast<std::ptrdiff_t>(r * cols),
                                         raw.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols),
                                         0.0);
      values.push_back(sum / static_cast<double>(cols));
    }
  } else {
    values = raw;
  }
  const KdeCurve curve = kde_estimate(values, cfg.grid_points);
  std::string csv = "x,density\n";
  for (std::size_t i = 0; i < curve.grid.size(); ++i) {
    csv += num(curve.grid[i]) + ',' + num(curve.density[i]) + '\n';
  }
  json doc{{"bandwidth", curve.bandwidth},
           {"peaks", curve.peaks},
           {"samples", values.size()},
           {"grid", curve.grid},
           {"density", curve.density}};
  return {"kde", csv, doc,
          svg_line_chart("SROP kernel density", "density", {{"KDE", curve.grid, curve.density}})};
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CliConfig cfg;
  CLI::App app{"sropkit: spectral roll-off points of signals, images and CNN feature maps",
               "sropkit"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  app.add_option("--kappa", cfg.kappa, "energy cut-off fraction in (0, 1]")
      ->check(CLI::Range(0.0, 1.0));
  app.add_option("--seed", cfg.seed, "seed for randomized weights");
  app.add_option("--out", cfg.out_dir, "output directory (default: print CSV to stdout)");
  app.add_option("--format", cfg.formats, "csv, json or svg; repeatable")
      ->check(CLI::IsMember({"csv", "json", "svg"}))
      ->take_all()
      ->allow_extra_args(false);
  app.add_flag("--exclude-dc", cfg.exclude_dc, "drop the zero-frequency term");
  app.add_flag("--power-spectrum", cfg.power_spectrum, "use |F|^2 instead of |F|");
  app.add_flag("--luminance", cfg.luminance, "collapse RGB to luminance first");
  app.add_flag("--per-map-band", cfg.per_map_band,
               "normalize layer SROPs by each map's own band instead of the input band");

  auto* srop1d = app.add_subcommand("srop1d", "SROP of a 1-D series (text or .npy)");
  srop1d->add_option("file", cfg.inputs)->required()->expected(1);
  auto* sropimg = app.add_subcommand("sropimg", "per-channel SROP of an image NPY");
  sropimg->add_option("npy", cfg.inputs)->required()->expected(1);
  auto* sroptensor = app.add_subcommand("sroptensor", "per-channel SROPs and stats of c x n x n");
  sroptensor->add_option("npy", cfg.inputs)->required()->expected(1);
  auto* profile = app.add_subcommand("profile", "layer-wise SROP table from an activation dump");
  profile->add_option("manifest", cfg.inputs)->required()->expected(1);
  profile->add_option("--input-size", cfg.input_size,
                      "network input resolution (default: largest layer)");
  auto* baseline = app.add_subcommand("baseline", "benchmark max-pool downscaling ladder");
  baseline->add_option("image-dir", cfg.inputs)->required()->expected(1);
  baseline->add_option("--max-images", cfg.max_images, "use at most this many images");
  auto* randnet = app.add_subcommand("randnet", "randomized-network SROP profile");
  randnet->add_option("args", cfg.inputs, "<config> <image-dir>")->required()->expected(2);
  randnet->add_option("--max-images", cfg.max_images, "use at most this many images");
  randnet->add_option("--export", cfg.export_dir, "also dump tap activations as NPY + manifest");
  auto* synth = app.add_subcommand("synth", "CASE I / CASE II blended digit dataset");
  synth->add_option("args", cfg.inputs, "<mode> <w>")->required()->expected(2);
  synth->add_option("--mnist-images", cfg.mnist_images, "IDX image file");
  synth->add_option("--mnist-labels", cfg.mnist_labels, "IDX label file");
  synth->add_option("--cifar-batch", cfg.cifar_batch, "CIFAR-10 binary batch with the frog");
  auto* kde = app.add_subcommand("kde", "kernel density of SROP values");
  kde->add_option("npy", cfg.inputs)->required()->expected(1);
  kde->add_option("--grid-points", cfg.grid_points, "evaluation points on [0, 1]");
  kde->add_flag("--pooled", cfg.pooled, "pool all values of a 2-D array instead of row means");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return static_cast<int>(ExitCode::ok);
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return static_cast<int>(ExitCode::ok);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return static_cast<int>(ExitCode::usage_error);
  }
  if (cfg.formats.empty()) cfg.formats = {"csv"};
  cfg.subcommand = app.get_subcommands().front()->get_name();

  try {
    if (!(cfg.kappa > 0.0)) throw InvalidParameter("--kappa must lie in (0, 1]");
    Artifacts a;
    if (cfg.subcommand == "srop1d") a = cmd_srop1d(cfg);
    else if (cfg.subcommand == "sropimg") a = cmd_sropimg(cfg);
    else if (cfg.subcommand == "sroptensor") a = cmd_sroptensor(cfg, out);
    else if (cfg.subcommand == "profile") a = cmd_profile(cfg);
    else if (cfg.subcommand == "baseline") a = cmd_baseline(cfg);
    else if (cfg.subcommand == "randnet") a = cmd_randnet(cfg);
    else if (cfg.subcommand == "synth") a = cmd_synth(cfg);
    else a = cmd_kde(cfg);
    emit(cfg, a, out);
    write_run_sidecar(cfg);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::usage_error);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::runtime_error);
  }
  return static_cast<int>(ExitCode::ok);
}

}  // namespace sropkit::cli
