#include "sropkit/architecture.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "sropkit/error.hpp"

namespace sropkit {

using nlohmann::json;

namespace {

constexpr std::pair<LayerOp, const char*> kOpNames[] = {
    {LayerOp::conv, "conv"},
    {LayerOp::maxpool, "maxpool"},
    {LayerOp::blurpool, "blurpool"},
    {LayerOp::avgpool, "avgpool"},
    {LayerOp::batchnorm, "batchnorm"},
    {LayerOp::relu, "relu"},
    {LayerOp::add, "add"},
    {LayerOp::concat, "concat"},
    {LayerOp::avgpool_global, "avgpool_global"},
};

[[noreturn]] void fail(const LayerSpec& layer, const std::string& what) {
  throw ValidationError("layer '" + layer.name + "' (" + to_string(layer.op) + "): " + what);
}

bool one_of(std::size_t v, std::initializer_list<std::size_t> allowed) {
  return std::find(allowed.begin(), allowed.end(), v) != allowed.end();
}

std::size_t window_out(const LayerSpec& layer, std::size_t n, std::size_t k,
                       std::size_t s, std::size_t p) {
  if (n + 2 * p < k) fail(layer, "window larger than padded input");
  return (n + 2 * p - k) / s + 1;
}

TensorShape infer_shape(const LayerSpec& layer, const std::vector<TensorShape>& in) {
  const auto& p = layer.params;
  const TensorShape x = in.front();
  switch (layer.op) {
    case LayerOp::conv:
      if (!one_of(p.kernel, {1, 3, 5, 7, 11})) fail(layer, "kernel must be 1, 3, 5, 7 or 11");
      if (!one_of(p.stride, {1, 2, 4})) fail(layer, "stride must be 1, 2 or 4");
      if (p.channels_out == 0) fail(layer, "channels_out must be positive");
      return {p.channels_out, window_out(layer, x.size, p.kernel, p.stride, p.padding)};
    case LayerOp::maxpool:
      if (!one_of(p.kernel, {2, 3})) fail(layer, "kernel must be 2 or 3");
      if (p.stride != 2) fail(layer, "stride must be 2");
      if (2 * p.padding > p.kernel) fail(layer, "padding exceeds half the kernel");
      return {x.channels, window_out(layer, x.size, p.kernel, 2, p.padding)};
    case LayerOp::blurpool: {
      if (p.stride != 2) fail(layer, "stride must be 2");
      std::size_t n = x.size;
      if (p.max_kernel != 0) {
        if (!one_of(p.max_kernel, {2, 3})) fail(layer, "max_kernel must be 0, 2 or 3");
        n = window_out(layer, n, p.max_kernel, 1, p.max_padding);
      }
      if (n < 2) fail(layer, "blur needs at least 2 samples per axis");
      return {x.channels, (n + 1) / 2};
    }
    case LayerOp::avgpool:
      if (p.kernel != 2 || p.stride != 2) fail(layer, "only kernel 2, stride 2 is supported");
      return {x.channels, window_out(layer, x.size, 2, 2, 0)};
    case LayerOp::batchnorm:
    case LayerOp::relu:
      return x;
    case LayerOp::add:
      for (const auto& s : in) {
        if (s != x) fail(layer, "operands have different shapes");
      }
      return x;
    case LayerOp::concat: {
      std::size_t channels = 0;
      for (const auto& s : in) {
        if (s.size != x.size) fail(layer, "operands have different spatial sizes");
        channels += s.channels;
      }
      return {channels, x.size};
    }
    case LayerOp::avgpool_global:
      return {x.channels, 1};
  }
  fail(layer, "unknown op");
}

}  // namespace

const char* to_string(LayerOp op) {
  for (const auto& [o, name] : kOpNames) {
    if (o == op) return name;
  }
  return "unknown";
}

std::optional<LayerOp> parse_layer_op(const std::string& text) {
  for (const auto& [o, name] : kOpNames) {
    if (text == name) return o;
  }
  return std::nullopt;
}

std::optional<std::size_t> ArchitectureSpec::index_of(const std::string& layer) const {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].name == layer) return i;
  }
  return std::nullopt;
}

TensorShape ArchitectureSpec::shape_of(const std::string& layer) const {
  const auto i = index_of(layer);
  if (!i || *i >= shapes.size()) throw InvalidInput("unknown layer '" + layer + "'");
  return shapes[*i];
}

void validate(ArchitectureSpec& spec) {
  if (spec.input.channels == 0 || spec.input.size == 0) {
    throw ValidationError("architecture '" + spec.name + "': input shape must be positive");
  }
  if (spec.layers.empty()) throw ValidationError("architecture '" + spec.name + "' has no layers");

  std::map<std::string, int> seen;
  spec.sources.assign(spec.layers.size(), {});
  spec.shapes.assign(spec.layers.size(), {});
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const auto& layer = spec.layers[i];
    if (layer.name.empty() || layer.name == kInputName) {
      fail(layer, "invalid layer name");
    }
    if (seen.count(layer.name)) fail(layer, "duplicate layer name");

    std::vector<int> src;
    if (layer.params.inputs.empty()) {
      src.push_back(static_cast<int>(i) - 1);
    } else {
      for (const auto& name : layer.params.inputs) {
        if (name == kInputName) {
          src.push_back(-1);
          continue;
        }
        const auto it = seen.find(name);
        if (it == seen.end()) fail(layer, "dangling source reference '" + name + "'");
        src.push_back(it->second);
      }
    }
    const bool combine = layer.op == LayerOp::add || layer.op == LayerOp::concat;
    if (combine && src.size() < 2) fail(layer, "needs at least two inputs");
    if (!combine && src.size() != 1) fail(layer, "takes exactly one input");

    std::vector<TensorShape> in;
    for (int s : src) in.push_back(s < 0 ? spec.input : spec.shapes[static_cast<std::size_t>(s)]);
    spec.shapes[i] = infer_shape(layer, in);
    if (spec.shapes[i].size == 0) fail(layer, "output collapses to zero size");
    spec.sources[i] = std::move(src);
    seen.emplace(layer.name, static_cast<int>(i));
  }

  std::set<std::string> tap_set;
  for (const auto& tap : spec.taps) {
    const auto it = seen.find(tap);
    if (it == seen.end()) {
      throw ValidationError("architecture '" + spec.name + "': tap '" + tap + "' does not exist");
    }
    if (!tap_set.insert(tap).second) {
      throw ValidationError("architecture '" + spec.name + "': tap '" + tap + "' listed twice");
    }
    if (spec.shapes[static_cast<std::size_t>(it->second)].size < 3) {
      throw ValidationError("tap '" + tap + "' is smaller than 3 x 3");
    }
  }
}

ArchitectureSpec build_from_config(const std::string& config_text) {
  json j;
  try {
    j = json::parse(config_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("architecture config: invalid JSON: ") + e.what());
  }
  ArchitectureSpec spec;
  try {
    spec.name = j.at("name").get<std::string>();
    if (j.contains("input")) {
      spec.input.channels = j["input"].value("channels", std::size_t{3});
      spec.input.size = j["input"].value("size", std::size_t{224});
    }
    for (const auto& l : j.at("layers")) {
      LayerSpec layer;
      layer.name = l.at("name").get<std::string>();
      const auto op_text = l.at("op").get<std::string>();
      const auto op = parse_layer_op(op_text);
      if (!op) {
        throw ValidationError("layer '" + layer.name + "': unknown op '" + op_text + "'");
      }
      layer.op = *op;
      const json params = l.value("params", json::object());
      auto& p = layer.params;
      p.kernel = params.value("kernel", std::size_t{0});
      p.stride = params.value("stride", std::size_t{layer.op == LayerOp::maxpool ||
                                                                layer.op == LayerOp::blurpool ||
                                                                layer.op == LayerOp::avgpool
                                                            ? 2u
                                                            : 1u});
      p.padding = params.value("padding", std::size_t{0});
      p.channels_out = params.value("channels_out", std::size_t{0});
      p.max_kernel = params.value("max_kernel", std::size_t{0});
      p.max_padding = params.value("max_padding", std::size_t{0});
      if (params.contains("input")) p.inputs.push_back(params["input"].get<std::string>());
      if (params.contains("inputs")) {
        for (const auto& s : params["inputs"]) p.inputs.push_back(s.get<std::string>());
      }
      spec.layers.push_back(std::move(layer));
    }
    if (j.contains("taps")) {
      spec.taps = j["taps"].get<std::vector<std::string>>();
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("architecture config: ") + e.what());
  }
  validate(spec);
  if (!j.contains("taps")) {
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
      if (spec.shapes[i].size >= 3) spec.taps.push_back(spec.layers[i].name);
    }
  }
  return spec;
}

ArchitectureSpec load_architecture(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open architecture config " + path.string());
  std::stringstream text;
  text << in.rdbuf();
  return build_from_config(text.str());
}

std::string architecture_to_json(const ArchitectureSpec& spec) {
  json layers = json::array();
  for (const auto& l : spec.layers) {
    json params = json::object();
    const auto& p = l.params;
    if (p.kernel) params["kernel"] = p.kernel;
    if (l.op == LayerOp::conv || l.op == LayerOp::maxpool || l.op == LayerOp::blurpool ||
        l.op == LayerOp::avgpool) {
      params["stride"] = p.stride;
    }
    if (p.padding) params["padding"] = p.padding;
    if (p.channels_out) params["channels_out"] = p.channels_out;
    if (p.max_kernel) params["max_kernel"] = p.max_kernel;
    if (p.max_padding) params["max_padding"] = p.max_padding;
    if (p.inputs.size() == 1) params["input"] = p.inputs.front();
    if (p.inputs.size() > 1) params["inputs"] = p.inputs;
    json entry{{"name", l.name}, {"op", to_string(l.op)}};
    if (!params.empty()) entry["params"] = params;
    layers.push_back(entry);
  }
  json j{{"name", spec.name},
         {"input", {{"channels", spec.input.channels}, {"size", spec.input.size}}},
         {"layers", layers},
         {"taps", spec.taps}};
  return j.dump(1) + "\n";
}

}  // namespace sropkit
