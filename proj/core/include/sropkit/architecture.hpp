#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace sropkit {

enum class LayerOp {
  conv,
  maxpool,
  blurpool,
  avgpool,
  batchnorm,
  relu,
  add,
  concat,
  avgpool_global,
};

const char* to_string(LayerOp op);
std::optional<LayerOp> parse_layer_op(const std::string& text);

struct LayerParams {
  std::size_t kernel = 0;
  std::size_t stride = 1;
  std::size_t padding = 0;
  std::size_t channels_out = 0;
  // Blur-pool only: dense (stride 1) max-pool applied before the blur.
  // 0 disables it.
  std::size_t max_kernel = 0;
  std::size_t max_padding = 0;
  // Source layers. Empty means "the previous layer" (or the network input
  // for the first layer). add and concat need two or more.
  std::vector<std::string> inputs;
};

struct LayerSpec {
  std::string name;
  LayerOp op = LayerOp::relu;
  LayerParams params;
};

struct TensorShape {
  std::size_t channels = 0;
  std::size_t size = 0;

  friend bool operator==(const TensorShape&, const TensorShape&) = default;
};

inline constexpr const char* kInputName = "input";

// Ordered layer graph. Construct through build_from_config or validate(),
// which resolve every layer's sources and output shape.
struct ArchitectureSpec {
  std::string name;
  TensorShape input{3, 224};
  std::vector<LayerSpec> layers;
  std::vector<std::string> taps;

  // Filled by validate(): resolved source indices (-1 = network input) and
  // per-layer output shapes.
  std::vector<std::vector<int>> sources;
  std::vector<TensorShape> shapes;

  std::optional<std::size_t> index_of(const std::string& layer) const;
  TensorShape shape_of(const std::string& layer) const;
};

// Checks op constraints, source references and the shape chain, and fills
// `sources` / `shapes`. Throws ValidationError on the first problem.
void validate(ArchitectureSpec& spec);

// JSON config:
//   {"name": ..., "input": {"channels": 3, "size": 224},
//    "layers": [{"name": ..., "op": ..., "params": {...}}, ...],
//    "taps": [...]}
// Params keys: kernel, stride, padding, channels_out, max_kernel,
// max_padding, input (one source) or inputs (list).
ArchitectureSpec build_from_config(const std::string& config_text);
ArchitectureSpec load_architecture(const std::filesystem::path& path);
std::string architecture_to_json(const ArchitectureSpec& spec);

}  // namespace sropkit
