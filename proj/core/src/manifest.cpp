#include "sropkit/manifest.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "sropkit/error.hpp"
#include "sropkit/npy.hpp"

namespace sropkit {

using nlohmann::json;

namespace {

template <typename T>
T required(const json& j, const char* key) {
  if (!j.contains(key)) {
    throw ValidationError(std::string("manifest: missing required field '") + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(std::string("manifest: field '") + key + "' has the wrong type");
  }
}

}  // namespace

const char* to_string(WeightsOrigin origin) {
  return origin == WeightsOrigin::pretrained ? "pretrained" : "randomized";
}

std::string manifest_to_json(const RunManifest& m) {
  json layers = json::array();
  for (const auto& l : m.layers) {
    layers.push_back(json{{"name", l.name}, {"file", l.file}, {"shape", l.shape}});
  }
  json j{{"schema_version", m.schema_version},
         {"model_name", m.model_name},
         {"weights_origin", to_string(m.weights_origin)},
         {"input_description", m.input_description},
         {"seed", m.seed},
         {"layers", layers}};
  return j.dump(2) + "\n";
}

RunManifest parse_manifest(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("manifest: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("manifest: top level must be an object");

  RunManifest m;
  m.schema_version = required<int>(j, "schema_version");
  if (m.schema_version != kManifestSchemaVersion) {
    throw ValidationError("manifest: unsupported schema_version " +
                          std::to_string(m.schema_version));
  }
  m.model_name = required<std::string>(j, "model_name");
  const auto origin = required<std::string>(j, "weights_origin");
  if (origin == "pretrained") {
    m.weights_origin = WeightsOrigin::pretrained;
  } else if (origin == "randomized") {
    m.weights_origin = WeightsOrigin::randomized;
  } else {
    throw ValidationError("manifest: weights_origin must be randomized or pretrained");
  }
  m.input_description = j.value("input_description", std::string{});
  m.seed = j.value("seed", std::uint64_t{0});

  const auto layers = required<json>(j, "layers");
  if (!layers.is_array()) throw ValidationError("manifest: layers must be an array");
  std::set<std::string> names;
  for (const auto& l : layers) {
    ManifestLayer layer{required<std::string>(l, "name"), required<std::string>(l, "file"),
                        required<std::vector<std::size_t>>(l, "shape")};
    if (!names.insert(layer.name).second) {
      throw ValidationError("manifest: duplicate layer name '" + layer.name + "'");
    }
    m.layers.push_back(std::move(layer));
  }
  return m;
}

RunManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("manifest: cannot open " + path.string());
  std::stringstream text;
  text << in.rdbuf();
  RunManifest m = parse_manifest(text.str());

  const auto base = path.parent_path();
  for (const auto& layer : m.layers) {
    const auto file = base / layer.file;
    if (!std::filesystem::is_regular_file(file)) {
      throw ValidationError("manifest: layer '" + layer.name + "' references missing file " +
                            file.string());
    }
    const NpyHeader header = read_npy_header(file);
    if (header.shape != layer.shape) {
      throw ValidationError("manifest: layer '" + layer.name +
                            "' shape disagrees with its NPY file");
    }
    std::size_t elements = 1;
    for (auto d : header.shape) elements *= d;
    if (std::filesystem::file_size(file) !=
        header.data_offset + elements * dtype_size(header.dtype)) {
      throw ValidationError("manifest: layer '" + layer.name + "' NPY payload is truncated");
    }
  }
  return m;
}

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path) {
  write_file_atomic(path, manifest_to_json(manifest));
}

}  // namespace sropkit
