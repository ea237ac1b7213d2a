#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "tumorkit/nn/tensor.hpp"

namespace tumorkit::nn {

enum class Activation { None, Relu, Sigmoid };

struct ConvSpec {
  std::size_t filters = 16;
  std::size_t kernel = 3;
  std::size_t stride = 1;
  std::size_t padding = 1;
};

struct BatchNormSpec {
  double momentum = 0.9;
  double epsilon = 1e-5;
};

struct ReluSpec {};

struct MaxPoolSpec {
  std::size_t size = 2;
  std::size_t stride = 2;
};

// Always global: one value per channel.
struct AvgPoolSpec {};

struct FlattenSpec {};

struct DenseSpec {
  std::size_t units = 1;
  Activation activation = Activation::None;
};

struct LayerSpec;

// output = ReLU(inner(x) + shortcut(x)); the shortcut is the identity or, with
// `projection`, a 1x1 convolution whose stride matches the inner path.
struct ResidualSpec {
  std::vector<LayerSpec> inner;
  bool projection = false;
};

struct LayerSpec {
  std::variant<ConvSpec, BatchNormSpec, ReluSpec, MaxPoolSpec, AvgPoolSpec, ResidualSpec,
               FlattenSpec, DenseSpec>
      op;
};

struct InputShape {
  std::size_t height = 64;
  std::size_t width = 64;
  std::size_t channels = 1;
  friend bool operator==(const InputShape&, const InputShape&) = default;
};

struct NetworkConfig {
  InputShape input;
  std::vector<LayerSpec> layers;
  std::uint64_t seed = 0;
};

// Conv(f, 3x3, stride) + BN + ReLU + Conv(f, 3x3) + BN.
ResidualSpec basic_block(std::size_t filters, std::size_t stride = 1, bool projection = false);

// Conv 1x1 + BN + ReLU + Conv 3x3 (stride) + BN + ReLU + Conv 1x1 (4x) + BN.
ResidualSpec bottleneck_block(std::size_t filters, std::size_t stride, bool projection);

// Conv(16) + BN + ReLU, MaxPool(2,2), block(16), block(32, stride 2,
// projection), global average pool, Flatten, Dense(128, relu),
// Dense(1, sigmoid).
NetworkConfig resnet_mini(InputShape input = {}, std::uint64_t seed = 0);

// The 50-layer bottleneck network (stages of 3, 4, 6, 3 blocks) with the same
// Flatten / Dense(128) / Dense(1, sigmoid) head.
NetworkConfig resnet50(InputShape input = {224, 224, 3}, std::uint64_t seed = 0);

// Per-sample activation shape after each spec, starting from {H, W, C}.
// Throws ShapeError/InvalidArgument for inconsistent configurations.
Shape infer_output_shape(const LayerSpec& spec, const Shape& input);
Shape infer_output_shape(const NetworkConfig& cfg);

struct ParameterCount {
  std::size_t trainable = 0;
  std::size_t buffers = 0;  // batch-norm running statistics
};

// Closed-form count from the configuration alone.
ParameterCount count_parameters(const NetworkConfig& cfg);

// Checks every invariant, including the Dense(1, sigmoid) head.
void validate(const NetworkConfig& cfg);

std::string_view layer_kind(const LayerSpec& spec);
std::string_view activation_name(Activation a);
Activation parse_activation(std::string_view name);

}  // namespace tumorkit::nn
