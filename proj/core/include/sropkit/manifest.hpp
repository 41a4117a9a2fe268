#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace sropkit {

inline constexpr int kManifestSchemaVersion = 1;

enum class WeightsOrigin { randomized, pretrained };

struct ManifestLayer {
  std::string name;            // layer notation, e.g. "resblk2.0"
  std::string file;            // NPY path relative to the manifest directory
  std::vector<std::size_t> shape;  // c x n x n, or N x c x n x n for a batch

  friend bool operator==(const ManifestLayer&, const ManifestLayer&) = default;
};

// Describes one activation dump: which model produced it and where each
// tapped layer's NPY file lives.
struct RunManifest {
  int schema_version = kManifestSchemaVersion;
  std::string model_name;
  WeightsOrigin weights_origin = WeightsOrigin::randomized;
  std::string input_description;
  std::uint64_t seed = 0;
  std::vector<ManifestLayer> layers;

  friend bool operator==(const RunManifest&, const RunManifest&) = default;
};

const char* to_string(WeightsOrigin origin);

// Pure JSON (de)serialization; unknown fields are ignored on parse.
// parse_manifest checks required fields and unique layer names but not
// the referenced files.
std::string manifest_to_json(const RunManifest& manifest);
RunManifest parse_manifest(const std::string& json_text);

// Reads and fully validates: every layer file must exist, parse as NPY and
// match the declared shape.
RunManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const RunManifest& manifest, const std::filesystem::path& path);

}  // namespace sropkit
