#include "tumorkit/nn/checkpoint.hpp"

#include <fstream>
#include <string>

#include "tumorkit/error.hpp"

namespace tumorkit::nn {
namespace {

using nlohmann::json;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

json spec_to_json(const LayerSpec& spec) {
  return std::visit(
      overloaded{
          [](const ConvSpec& c) -> json {
            return {{"type", "conv"}, {"filters", c.filters}, {"kernel", c.kernel},
                    {"stride", c.stride}, {"padding", c.padding}};
          },
          [](const BatchNormSpec& b) -> json {
            return {{"type", "batchnorm"}, {"momentum", b.momentum}, {"epsilon", b.epsilon}};
          },
          [](const ReluSpec&) -> json { return {{"type", "relu"}}; },
          [](const MaxPoolSpec& p) -> json {
            return {{"type", "maxpool"}, {"size", p.size}, {"stride", p.stride}};
          },
          [](const AvgPoolSpec&) -> json { return {{"type", "avgpool"}}; },
          [](const FlattenSpec&) -> json { return {{"type", "flatten"}}; },
          [](const DenseSpec& d) -> json {
            return {{"type", "dense"}, {"units", d.units},
                    {"activation", std::string(activation_name(d.activation))}};
          },
          [](const ResidualSpec& r) -> json {
            json inner = json::array();
            for (const auto& s : r.inner) inner.push_back(spec_to_json(s));
            return {{"type", "residual"}, {"projection", r.projection}, {"layers", inner}};
          },
      },
      spec.op);
}

LayerSpec spec_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "conv") {
    return {ConvSpec{j.at("filters").get<std::size_t>(), j.at("kernel").get<std::size_t>(),
                     j.at("stride").get<std::size_t>(), j.at("padding").get<std::size_t>()}};
  }
  if (type == "batchnorm") {
    return {BatchNormSpec{j.at("momentum").get<double>(), j.at("epsilon").get<double>()}};
  }
  if (type == "relu") return {ReluSpec{}};
  if (type == "maxpool") {
    return {MaxPoolSpec{j.at("size").get<std::size_t>(), j.at("stride").get<std::size_t>()}};
  }
  if (type == "avgpool") return {AvgPoolSpec{}};
  if (type == "flatten") return {FlattenSpec{}};
  if (type == "dense") {
    return {DenseSpec{j.at("units").get<std::size_t>(),
                      parse_activation(j.at("activation").get<std::string>())}};
  }
  if (type == "residual") {
    ResidualSpec r;
    r.projection = j.at("projection").get<bool>();
    for (const auto& s : j.at("layers")) r.inner.push_back(spec_from_json(s));
    return {r};
  }
  throw InvalidArgument("unknown layer type '" + type + "'");
}

json tensor_to_json(const std::string& name, const Tensor& t) {
  return {{"name", name}, {"shape", t.shape()}, {"data", t.storage()}};
}

Tensor tensor_from_json(const json& j) {
  return Tensor(j.at("shape").get<Shape>(), j.at("data").get<std::vector<double>>());
}

void copy_into(const json& entry, const std::string& name, Tensor& dst) {
  if (entry.at("name").get<std::string>() != name) {
    throw ShapeError("checkpoint tensor '" + entry.at("name").get<std::string>() +
                     "' where '" + name + "' was expected");
  }
  Tensor t = tensor_from_json(entry);
  if (t.shape() != dst.shape()) {
    throw ShapeError("checkpoint tensor '" + name + "' has shape " + shape_string(t.shape()) +
                     ", network expects " + shape_string(dst.shape()));
  }
  dst = std::move(t);
}

}  // namespace

json to_json(const NetworkConfig& cfg) {
  json layers = json::array();
  for (const auto& s : cfg.layers) layers.push_back(spec_to_json(s));
  return {{"input",
           {{"height", cfg.input.height}, {"width", cfg.input.width}, {"channels", cfg.input.channels}}},
          {"seed", cfg.seed},
          {"layers", layers}};
}

NetworkConfig network_config_from_json(const json& j) {
  NetworkConfig cfg;
  const json& in = j.at("input");
  cfg.input = {in.at("height").get<std::size_t>(), in.at("width").get<std::size_t>(),
               in.at("channels").get<std::size_t>()};
  cfg.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& s : j.at("layers")) cfg.layers.push_back(spec_from_json(s));
  return cfg;
}

void save_checkpoint(const std::filesystem::path& path, Network& net, const AdamState& optimizer) {
  json params = json::array();
  for (const Param& p : net.params()) params.push_back(tensor_to_json(p.name, *p.value));
  json buffers = json::array();
  for (const Buffer& b : net.buffers()) buffers.push_back(tensor_to_json(b.name, *b.value));
  json m = json::array();
  json v = json::array();
  for (std::size_t i = 0; i < optimizer.first_moment.size(); ++i) {
    m.push_back(tensor_to_json("m" + std::to_string(i), optimizer.first_moment[i]));
    v.push_back(tensor_to_json("v" + std::to_string(i), optimizer.second_moment[i]));
  }
  const json doc = {{"format", "tumorkit-checkpoint"},
                    {"version", 1},
                    {"network", to_json(net.config())},
                    {"parameters", params},
                    {"buffers", buffers},
                    {"optimizer",
                     {{"learning_rate", optimizer.learning_rate},
                      {"beta1", optimizer.beta1},
                      {"beta2", optimizer.beta2},
                      {"epsilon", optimizer.epsilon},
                      {"step_count", optimizer.step_count},
                      {"first_moment", m},
                      {"second_moment", v}}}};
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << doc.dump() << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  Checkpoint ckpt;
  try {
    ckpt.payload = json::parse(in);
    if (ckpt.payload.at("format") != "tumorkit-checkpoint" || ckpt.payload.at("version") != 1) {
      throw IoError(path.string() + " is not a version 1 tumorkit checkpoint");
    }
    ckpt.config = network_config_from_json(ckpt.payload.at("network"));
  } catch (const json::exception& e) {
    throw IoError("malformed checkpoint " + path.string() + ": " + e.what());
  }
  return ckpt;
}

void restore(const Checkpoint& ckpt, Network& net, AdamState* optimizer) {
  if (to_json(ckpt.config).at("layers") != to_json(net.config()).at("layers") ||
      ckpt.config.input != net.config().input) {
    throw ShapeError("shape mismatch: checkpoint network (input " + std::to_string(ckpt.config.input.height) + "x" +
                     std::to_string(ckpt.config.input.width) + "x" +
                     std::to_string(ckpt.config.input.channels) +
                     ") does not match the configured network (input " +
                     std::to_string(net.config().input.height) + "x" +
                     std::to_string(net.config().input.width) + "x" +
                     std::to_string(net.config().input.channels) + ")");
  }
  try {
    const json& params = ckpt.payload.at("parameters");
    auto dst = net.params();
    if (params.size() != dst.size()) throw ShapeError("checkpoint parameter count mismatch");
    for (std::size_t i = 0; i < dst.size(); ++i) copy_into(params[i], dst[i].name, *dst[i].value);
    const json& buffers = ckpt.payload.at("buffers");
    auto bufs = net.buffers();
    if (buffers.size() != bufs.size()) throw ShapeError("checkpoint buffer count mismatch");
    for (std::size_t i = 0; i < bufs.size(); ++i) copy_into(buffers[i], bufs[i].name, *bufs[i].value);
    if (optimizer) {
      const json& o = ckpt.payload.at("optimizer");
      AdamState s;
      s.learning_rate = o.at("learning_rate").get<double>();
      s.beta1 = o.at("beta1").get<double>();
      s.beta2 = o.at("beta2").get<double>();
      s.epsilon = o.at("epsilon").get<double>();
      s.step_count = o.at("step_count").get<std::uint64_t>();
      for (const auto& t : o.at("first_moment")) s.first_moment.push_back(tensor_from_json(t));
      for (const auto& t : o.at("second_moment")) s.second_moment.push_back(tensor_from_json(t));
      *optimizer = std::move(s);
    }
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed checkpoint payload: ") + e.what());
  }
}

}  // namespace tumorkit::nn
