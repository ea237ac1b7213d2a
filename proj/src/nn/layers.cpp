#include "tumorkit/nn/layers.hpp"

#include <cmath>
#include <random>

#include "tumorkit/error.hpp"

namespace tumorkit::nn {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void he_normal(Tensor& t, std::size_t fan_in, Rng& rng) {
  std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
  for (double& v : t.values()) v = dist(rng);
}

void require_forward(bool ok, std::string_view layer) {
  if (!ok) throw Error(std::string(layer) + ": backward called before forward");
}

std::size_t projection_stride(const ResidualSpec& spec) {
  std::size_t s = 1;
  for (const auto& inner : spec.inner) {
    if (const auto* c = std::get_if<ConvSpec>(&inner.op)) s *= c->stride;
    if (const auto* p = std::get_if<MaxPoolSpec>(&inner.op)) s *= p->stride;
  }
  return s;
}

}  // namespace

void Layer::collect_params(const std::string&, std::vector<Param>&) {}
void Layer::collect_buffers(const std::string&, std::vector<Buffer>&) {}
void Layer::initialize(Rng&) {}

Conv2D::Conv2D(std::size_t in_channels, const ConvSpec& spec)
    : weights({spec.kernel, spec.kernel, in_channels, spec.filters}),
      bias({spec.filters}),
      grad_weights(weights.shape()),
      grad_bias(bias.shape()),
      spec_(spec) {}

Tensor Conv2D::forward(const Tensor& input, Mode) {
  input_ = input;
  return conv2d(input, weights, bias, spec_.stride, spec_.padding);
}

Tensor Conv2D::backward(const Tensor& grad_out) {
  require_forward(!input_.empty(), kind());
  return conv2d_backward(input_, weights, grad_out, spec_.stride, spec_.padding, grad_weights,
                         grad_bias);
}

void Conv2D::collect_params(const std::string& prefix, std::vector<Param>& out) {
  out.push_back({prefix + ".weights", &weights, &grad_weights});
  out.push_back({prefix + ".bias", &bias, &grad_bias});
}

void Conv2D::initialize(Rng& rng) {
  he_normal(weights, weights.dim(0) * weights.dim(1) * weights.dim(2), rng);
  bias.fill(0.0);
}

BatchNorm::BatchNorm(std::size_t channels, const BatchNormSpec& spec)
    : gamma({channels}, 1.0),
      beta({channels}),
      grad_gamma({channels}),
      grad_beta({channels}),
      state{Tensor({channels}), Tensor({channels}, 1.0)},
      spec_(spec) {}

Tensor BatchNorm::forward(const Tensor& input, Mode mode) {
  return batch_norm(input, gamma, beta, mode, state, spec_.momentum, spec_.epsilon, &cache_);
}

Tensor BatchNorm::backward(const Tensor& grad_out) {
  require_forward(!cache_.normalized.empty(), kind());
  return batch_norm_backward(grad_out, gamma, cache_, grad_gamma, grad_beta);
}

void BatchNorm::collect_params(const std::string& prefix, std::vector<Param>& out) {
  out.push_back({prefix + ".gamma", &gamma, &grad_gamma});
  out.push_back({prefix + ".beta", &beta, &grad_beta});
}

void BatchNorm::collect_buffers(const std::string& prefix, std::vector<Buffer>& out) {
  out.push_back({prefix + ".running_mean", &state.running_mean});
  out.push_back({prefix + ".running_var", &state.running_var});
}

void BatchNorm::initialize(Rng&) {
  gamma.fill(1.0);
  beta.fill(0.0);
  state.running_mean.fill(0.0);
  state.running_var.fill(1.0);
}

Tensor ReLU::forward(const Tensor& input, Mode) {
  output_ = relu(input);
  return output_;
}

Tensor ReLU::backward(const Tensor& grad_out) {
  require_forward(!output_.empty(), kind());
  return relu_backward(output_, grad_out);
}

Tensor MaxPool::forward(const Tensor& input, Mode) {
  input_shape_ = input.shape();
  return max_pool(input, spec_.size, spec_.stride, &argmax_);
}

Tensor MaxPool::backward(const Tensor& grad_out) {
  require_forward(!input_shape_.empty(), kind());
  return max_pool_backward(input_shape_, argmax_, grad_out);
}

Tensor GlobalAvgPool::forward(const Tensor& input, Mode) {
  input_shape_ = input.shape();
  return global_avg_pool(input);
}

Tensor GlobalAvgPool::backward(const Tensor& grad_out) {
  require_forward(!input_shape_.empty(), kind());
  return global_avg_pool_backward(input_shape_, grad_out);
}

Tensor Flatten::forward(const Tensor& input, Mode) {
  input_shape_ = input.shape();
  return flatten(input);
}

Tensor Flatten::backward(const Tensor& grad_out) {
  require_forward(!input_shape_.empty(), kind());
  return grad_out.reshaped(input_shape_);
}

Dense::Dense(std::size_t in_features, const DenseSpec& spec)
    : weights({in_features, spec.units}),
      bias({spec.units}),
      grad_weights(weights.shape()),
      grad_bias(bias.shape()),
      spec_(spec) {}

Tensor Dense::forward(const Tensor& input, Mode) {
  input_ = input;
  Tensor z = dense(input, weights, bias);
  switch (spec_.activation) {
    case Activation::None: output_ = std::move(z); break;
    case Activation::Relu: output_ = relu(z); break;
    case Activation::Sigmoid: output_ = sigmoid(z); break;
  }
  return output_;
}

Tensor Dense::backward(const Tensor& grad_out) {
  require_forward(!input_.empty(), kind());
  switch (spec_.activation) {
    case Activation::None: return backward_preactivation(grad_out);
    case Activation::Relu: return backward_preactivation(relu_backward(output_, grad_out));
    case Activation::Sigmoid: return backward_preactivation(sigmoid_backward(output_, grad_out));
  }
  return {};
}

Tensor Dense::backward_preactivation(const Tensor& grad_z) {
  require_forward(!input_.empty(), kind());
  return dense_backward(input_, weights, grad_z, grad_weights, grad_bias);
}

void Dense::collect_params(const std::string& prefix, std::vector<Param>& out) {
  out.push_back({prefix + ".weights", &weights, &grad_weights});
  out.push_back({prefix + ".bias", &bias, &grad_bias});
}

void Dense::initialize(Rng& rng) {
  he_normal(weights, weights.dim(0), rng);
  bias.fill(0.0);
}

ResidualBlock::ResidualBlock(const Shape& input_shape, const ResidualSpec& spec) {
  LayerSpec whole{spec};
  const Shape out_shape = infer_output_shape(whole, input_shape);  // validates the block
  Shape s = input_shape;
  for (const auto& inner : spec.inner) {
    inner_.push_back(make_layer(inner, s));
    s = infer_output_shape(inner, s);
  }
  if (spec.projection) {
    projection_.emplace(input_shape[2], ConvSpec{out_shape[2], 1, projection_stride(spec), 0});
  }
}

Tensor ResidualBlock::forward(const Tensor& input, Mode mode) {
  Tensor x = input;
  for (auto& layer : inner_) x = layer->forward(x, mode);
  const Tensor shortcut = projection_ ? projection_->forward(input, mode) : input;
  require_same_shape(x, shortcut, "residual block");
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += shortcut[i];
  output_ = relu(x);
  return output_;
}

Tensor ResidualBlock::backward(const Tensor& grad_out) {
  require_forward(!output_.empty(), kind());
  const Tensor g = relu_backward(output_, grad_out);
  Tensor gi = g;
  for (auto it = inner_.rbegin(); it != inner_.rend(); ++it) gi = (*it)->backward(gi);
  const Tensor gs = projection_ ? projection_->backward(g) : g;
  require_same_shape(gi, gs, "residual block backward");
  for (std::size_t i = 0; i < gi.size(); ++i) gi[i] += gs[i];
  return gi;
}

void ResidualBlock::collect_params(const std::string& prefix, std::vector<Param>& out) {
  for (std::size_t i = 0; i < inner_.size(); ++i) {
    inner_[i]->collect_params(prefix + "." + std::to_string(i), out);
  }
  if (projection_) projection_->collect_params(prefix + ".projection", out);
}

void ResidualBlock::collect_buffers(const std::string& prefix, std::vector<Buffer>& out) {
  for (std::size_t i = 0; i < inner_.size(); ++i) {
    inner_[i]->collect_buffers(prefix + "." + std::to_string(i), out);
  }
}

void ResidualBlock::initialize(Rng& rng) {
  for (auto& layer : inner_) layer->initialize(rng);
  if (projection_) projection_->initialize(rng);
}

std::unique_ptr<Layer> make_layer(const LayerSpec& spec, const Shape& in) {
  return std::visit(
      overloaded{
          [&](const ConvSpec& c) -> std::unique_ptr<Layer> {
            return std::make_unique<Conv2D>(in.back(), c);
          },
          [&](const BatchNormSpec& b) -> std::unique_ptr<Layer> {
            return std::make_unique<BatchNorm>(in.back(), b);
          },
          [](const ReluSpec&) -> std::unique_ptr<Layer> { return std::make_unique<ReLU>(); },
          [](const MaxPoolSpec& p) -> std::unique_ptr<Layer> {
            return std::make_unique<MaxPool>(p);
          },
          [](const AvgPoolSpec&) -> std::unique_ptr<Layer> {
            return std::make_unique<GlobalAvgPool>();
          },
          [&](const ResidualSpec& r) -> std::unique_ptr<Layer> {
            return std::make_unique<ResidualBlock>(in, r);
          },
          [](const FlattenSpec&) -> std::unique_ptr<Layer> { return std::make_unique<Flatten>(); },
          [&](const DenseSpec& d) -> std::unique_ptr<Layer> {
            return std::make_unique<Dense>(in.back(), d);
          },
      },
      spec.op);
}

}  // namespace tumorkit::nn
