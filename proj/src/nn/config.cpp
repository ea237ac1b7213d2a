#include "tumorkit/nn/config.hpp"

#include <string>

#include "tumorkit/error.hpp"

namespace tumorkit::nn {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::size_t window_out(std::size_t in, std::size_t k, std::size_t stride, std::size_t pad,
                       const char* what) {
  if (k == 0 || stride == 0) throw InvalidArgument(std::string(what) + ": kernel and stride must be positive");
  if (in + 2 * pad < k) {
    throw ShapeError(std::string(what) + ": window " + std::to_string(k) + " exceeds input " +
                     std::to_string(in));
  }
  return (in + 2 * pad - k) / stride + 1;
}

std::size_t inner_stride(const std::vector<LayerSpec>& inner) {
  std::size_t s = 1;
  for (const auto& spec : inner) {
    if (const auto* c = std::get_if<ConvSpec>(&spec.op)) s *= c->stride;
    if (const auto* p = std::get_if<MaxPoolSpec>(&spec.op)) s *= p->stride;
  }
  return s;
}

void count_into(const LayerSpec& spec, Shape& shape, ParameterCount& count) {
  std::visit(overloaded{
                 [&](const ConvSpec& c) {
                   count.trainable += c.kernel * c.kernel * shape.back() * c.filters + c.filters;
                 },
                 [&](const BatchNormSpec&) {
                   count.trainable += 2 * shape.back();
                   count.buffers += 2 * shape.back();
                 },
                 [&](const DenseSpec& d) { count.trainable += shape.back() * d.units + d.units; },
                 [&](const ResidualSpec& r) {
                   Shape s = shape;
                   for (const auto& inner : r.inner) count_into(inner, s, count);
                   if (r.projection) count.trainable += shape.back() * s.back() + s.back();
                 },
                 [](const auto&) {},
             },
             spec.op);
  shape = infer_output_shape(spec, shape);
}

}  // namespace

ResidualSpec basic_block(std::size_t filters, std::size_t stride, bool projection) {
  ResidualSpec r;
  r.projection = projection;
  r.inner = {{ConvSpec{filters, 3, stride, 1}}, {BatchNormSpec{}}, {ReluSpec{}},
             {ConvSpec{filters, 3, 1, 1}}, {BatchNormSpec{}}};
  return r;
}

ResidualSpec bottleneck_block(std::size_t filters, std::size_t stride, bool projection) {
  ResidualSpec r;
  r.projection = projection;
  r.inner = {{ConvSpec{filters, 1, 1, 0}},     {BatchNormSpec{}}, {ReluSpec{}},
             {ConvSpec{filters, 3, stride, 1}}, {BatchNormSpec{}}, {ReluSpec{}},
             {ConvSpec{4 * filters, 1, 1, 0}}, {BatchNormSpec{}}};
  return r;
}

NetworkConfig resnet_mini(InputShape input, std::uint64_t seed) {
  NetworkConfig cfg;
  cfg.input = input;
  cfg.seed = seed;
  cfg.layers = {{ConvSpec{16, 3, 1, 1}},  {BatchNormSpec{}},
                {ReluSpec{}},             {MaxPoolSpec{2, 2}},
                {basic_block(16)},        {basic_block(32, 2, true)},
                {AvgPoolSpec{}},          {FlattenSpec{}},
                {DenseSpec{128, Activation::Relu}}, {DenseSpec{1, Activation::Sigmoid}}};
  return cfg;
}

NetworkConfig resnet50(InputShape input, std::uint64_t seed) {
  NetworkConfig cfg;
  cfg.input = input;
  cfg.seed = seed;
  cfg.layers = {{ConvSpec{64, 7, 2, 3}}, {BatchNormSpec{}}, {ReluSpec{}}, {MaxPoolSpec{3, 2}}};
  const std::size_t blocks[] = {3, 4, 6, 3};
  const std::size_t filters[] = {64, 128, 256, 512};
  for (std::size_t stage = 0; stage < 4; ++stage) {
    for (std::size_t b = 0; b < blocks[stage]; ++b) {
      const std::size_t stride = (b == 0 && stage > 0) ? 2 : 1;
      cfg.layers.push_back({bottleneck_block(filters[stage], stride, b == 0)});
    }
  }
  cfg.layers.push_back({AvgPoolSpec{}});
  cfg.layers.push_back({FlattenSpec{}});
  cfg.layers.push_back({DenseSpec{128, Activation::Relu}});
  cfg.layers.push_back({DenseSpec{1, Activation::Sigmoid}});
  return cfg;
}

Shape infer_output_shape(const LayerSpec& spec, const Shape& in) {
  auto need_image = [&](const char* what) {
    if (in.size() != 3) {
      throw ShapeError(std::string(what) + " needs an H x W x C input, got " + shape_string(in));
    }
  };
  return std::visit(
      overloaded{
          [&](const ConvSpec& c) -> Shape {
            need_image("conv");
            if (c.filters == 0) throw InvalidArgument("conv: filters must be positive");
            return {window_out(in[0], c.kernel, c.stride, c.padding, "conv"),
                    window_out(in[1], c.kernel, c.stride, c.padding, "conv"), c.filters};
          },
          [&](const BatchNormSpec& b) -> Shape {
            if (!(b.epsilon > 0.0) || !(b.momentum >= 0.0 && b.momentum < 1.0)) {
              throw InvalidArgument("batchnorm: need epsilon > 0 and momentum in [0,1)");
            }
            return in;
          },
          [&](const ReluSpec&) -> Shape { return in; },
          [&](const MaxPoolSpec& p) -> Shape {
            need_image("maxpool");
            if (p.size > in[0] || p.size > in[1]) throw ShapeError("maxpool: window exceeds input");
            return {window_out(in[0], p.size, p.stride, 0, "maxpool"),
                    window_out(in[1], p.size, p.stride, 0, "maxpool"), in[2]};
          },
          [&](const AvgPoolSpec&) -> Shape {
            need_image("avgpool");
            return {1, 1, in[2]};
          },
          [&](const FlattenSpec&) -> Shape { return {shape_size(in)}; },
          [&](const DenseSpec& d) -> Shape {
            if (in.size() != 1) throw ShapeError("dense needs a flat input, got " + shape_string(in));
            if (d.units == 0) throw InvalidArgument("dense: units must be positive");
            return {d.units};
          },
          [&](const ResidualSpec& r) -> Shape {
            need_image("residual block");
            Shape s = in;
            for (const auto& inner : r.inner) s = infer_output_shape(inner, s);
            if (s.size() != 3) throw ShapeError("residual block: inner path must keep H x W x C");
            if (r.projection) {
              const std::size_t st = inner_stride(r.inner);
              const Shape shortcut{window_out(in[0], 1, st, 0, "projection"),
                                   window_out(in[1], 1, st, 0, "projection"), s[2]};
              if (shortcut != s) {
                throw ShapeError("residual block: projection yields " + shape_string(shortcut) +
                                 " but inner path yields " + shape_string(s));
              }
            } else if (s != in) {
              throw ShapeError("residual block changes shape " + shape_string(in) + " -> " +
                               shape_string(s) + " without a projection");
            }
            return s;
          },
      },
      spec.op);
}

Shape infer_output_shape(const NetworkConfig& cfg) {
  Shape s{cfg.input.height, cfg.input.width, cfg.input.channels};
  if (shape_size(s) == 0) throw InvalidArgument("network input dimensions must be positive");
  for (const auto& spec : cfg.layers) s = infer_output_shape(spec, s);
  return s;
}

ParameterCount count_parameters(const NetworkConfig& cfg) {
  ParameterCount count;
  Shape s{cfg.input.height, cfg.input.width, cfg.input.channels};
  for (const auto& spec : cfg.layers) count_into(spec, s, count);
  return count;
}

void validate(const NetworkConfig& cfg) {
  if (cfg.layers.empty()) throw InvalidArgument("network has no layers");
  const Shape out = infer_output_shape(cfg);
  const auto* head = std::get_if<DenseSpec>(&cfg.layers.back().op);
  if (!head || head->units != 1 || head->activation != Activation::Sigmoid || out != Shape{1}) {
    throw InvalidArgument("network must end in Dense(1, sigmoid)");
  }
}

std::string_view layer_kind(const LayerSpec& spec) {
  return std::visit(overloaded{
                        [](const ConvSpec&) { return std::string_view("conv"); },
                        [](const BatchNormSpec&) { return std::string_view("batchnorm"); },
                        [](const ReluSpec&) { return std::string_view("relu"); },
                        [](const MaxPoolSpec&) { return std::string_view("maxpool"); },
                        [](const AvgPoolSpec&) { return std::string_view("avgpool"); },
                        [](const ResidualSpec&) { return std::string_view("residual"); },
                        [](const FlattenSpec&) { return std::string_view("flatten"); },
                        [](const DenseSpec&) { return std::string_view("dense"); },
                    },
                    spec.op);
}

std::string_view activation_name(Activation a) {
  switch (a) {
    case Activation::None: return "none";
    case Activation::Relu: return "relu";
    case Activation::Sigmoid: return "sigmoid";
  }
  return "?";
}

Activation parse_activation(std::string_view name) {
  if (name == "none" || name == "linear") return Activation::None;
  if (name == "relu") return Activation::Relu;
  if (name == "sigmoid") return Activation::Sigmoid;
  throw InvalidArgument("unknown activation '" + std::string(name) + "'");
}

}  // namespace tumorkit::nn
