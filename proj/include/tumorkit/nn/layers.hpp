#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tumorkit/nn/config.hpp"
#include "tumorkit/nn/ops.hpp"
#include "tumorkit/nn/tensor.hpp"
#include "tumorkit/random.hpp"

namespace tumorkit::nn {

// A trainable tensor and its gradient accumulator.
struct Param {
  std::string name;
  Tensor* value = nullptr;
  Tensor* grad = nullptr;
};

// Non-trainable state that a checkpoint must carry (batch-norm statistics).
struct Buffer {
  std::string name;
  Tensor* value = nullptr;
};

class Layer {
 public:
  virtual ~Layer() = default;

  virtual std::string_view kind() const = 0;
  // Caches whatever backward() needs.
  virtual Tensor forward(const Tensor& input, Mode mode) = 0;
  // Accumulates parameter gradients; returns d(loss)/d(input).
  virtual Tensor backward(const Tensor& grad_out) = 0;

  virtual void collect_params(const std::string& prefix, std::vector<Param>& out);
  virtual void collect_buffers(const std::string& prefix, std::vector<Buffer>& out);
  virtual void initialize(Rng& rng);
};

class Conv2D final : public Layer {
 public:
  Conv2D(std::size_t in_channels, const ConvSpec& spec);
  std::string_view kind() const override { return "conv"; }
  Tensor forward(const Tensor& input, Mode mode) override;
  Tensor backward(const Tensor& grad_out) override;
  void collect_params(const std::string& prefix, std::vector<Param>& out) override;
  // He-normal weights, zero bias.
  void initialize(Rng& rng) override;

  Tensor weights, bias, grad_weights, grad_bias;

 private:
  ConvSpec spec_;
  Tensor input_;
};

class BatchNorm final : public Layer {
 public:
  BatchNorm(std::size_t channels, const BatchNormSpec& spec);
  std::string_view kind() const override { return "batchnorm"; }
  Tensor forward(const Tensor& input, Mode mode) override;
  Tensor backward(const Tensor& grad_out) override;
  void collect_params(const std::string& prefix, std::vector<Param>& out) override;
  void collect_buffers(const std::string& prefix, std::vector<Buffer>& out) override;
  void initialize(Rng& rng) override;

  Tensor gamma, beta, grad_gamma, grad_beta;
  BatchNormState state;

 private:
  BatchNormSpec spec_;
  BatchNormCache cache_;
};

class ReLU final : public Layer {
 public:
  std::string_view kind() const override { return "relu"; }
  Tensor forward(const Tensor& input, Mode mode) override;
  Tensor backward(const Tensor& grad_out) override;

 private:
  Tensor output_;
};

class MaxPool final : public Layer {
 public:
  explicit MaxPool(const MaxPoolSpec& spec) : spec_(spec) {}
  std::string_view kind() const override { return "maxpool"; }
  Tensor forward(const Tensor& input, Mode mode) override;
  Tensor backward(const Tensor& grad_out) override;

 private:
  MaxPoolSpec spec_;
  Shape input_shape_;
  std::vector<std::size_t> argmax_;
};

class GlobalAvgPool final : public Layer {
 public:
  std::string_view kind() const override { return "avgpool"; }
  Tensor forward(const Tensor& input, Mode mode) override;
  Tensor backward(const Tensor& grad_out) override;

 private:
  Shape input_shape_;
};

class Flatten final : public Layer {
 public:
  std::string_view kind() const override { return "flatten"; }
  Tensor forward(const Tensor& input, Mode mode) override;
  Tensor backward(const Tensor& grad_out) override;

 private:
  Shape input_shape_;
};

class Dense final : public Layer {
 public:
  Dense(std::size_t in_features, const DenseSpec& spec);
  std::string_view kind() const override { return "dense"; }
  Tensor forward(const Tensor& input, Mode mode) override;
  Tensor backward(const Tensor& grad_out) override;
  // Backward from the gradient with respect to the pre-activation output.
  Tensor backward_preactivation(const Tensor& grad_z);
  void collect_params(const std::string& prefix, std::vector<Param>& out) override;
  void initialize(Rng& rng) override;

  Activation activation() const noexcept { return spec_.activation; }

  Tensor weights, bias, grad_weights, grad_bias;

 private:
  DenseSpec spec_;
  Tensor input_;
  Tensor output_;
};

class ResidualBlock final : public Layer {
 public:
  ResidualBlock(const Shape& input_shape, const ResidualSpec& spec);
  std::string_view kind() const override { return "residual"; }
  Tensor forward(const Tensor& input, Mode mode) override;
  Tensor backward(const Tensor& grad_out) override;
  void collect_params(const std::string& prefix, std::vector<Param>& out) override;
  void collect_buffers(const std::string& prefix, std::vector<Buffer>& out) override;
  void initialize(Rng& rng) override;

  std::vector<std::unique_ptr<Layer>>& inner() noexcept { return inner_; }
  Conv2D* projection() noexcept { return projection_ ? &*projection_ : nullptr; }

 private:
  std::vector<std::unique_ptr<Layer>> inner_;
  std::optional<Conv2D> projection_;
  Tensor output_;
};

// Builds the layer for `spec` given the per-sample input shape {H, W, C} or {F}.
std::unique_ptr<Layer> make_layer(const LayerSpec& spec, const Shape& input_shape);

}  // namespace tumorkit::nn
