#include "tumorkit/nn/network.hpp"

#include <string>

#include "tumorkit/error.hpp"

namespace tumorkit::nn {

Network::Network(NetworkConfig cfg) : cfg_(std::move(cfg)) {
  validate(cfg_);
  Shape s{cfg_.input.height, cfg_.input.width, cfg_.input.channels};
  for (const auto& spec : cfg_.layers) {
    layers_.push_back(make_layer(spec, s));
    s = infer_output_shape(spec, s);
  }
  Rng rng = make_rng(derive_seed(cfg_.seed, "nn", "init"));
  for (auto& layer : layers_) layer->initialize(rng);
}

Tensor Network::forward(const Tensor& batch, Mode mode) {
  const Shape expected{cfg_.input.height, cfg_.input.width, cfg_.input.channels};
  if (batch.rank() != 4 || Shape(batch.shape().begin() + 1, batch.shape().end()) != expected) {
    throw ShapeError("network expects batches of " + shape_string(expected) + ", got " +
                     shape_string(batch.shape()));
  }
  Tensor x = batch;
  for (auto& layer : layers_) x = layer->forward(x, mode);
  trained_forward_ = mode == Mode::Train;
  last_output_ = x;
  return x;
}

void Network::backward(std::span<const double> labels, double scale) {
  if (!trained_forward_) throw Error("Network::backward called before a Train-mode forward pass");
  const std::size_t n = last_output_.size();
  if (labels.size() != n) {
    throw ShapeError("Network::backward: " + std::to_string(labels.size()) + " labels for " +
                     std::to_string(n) + " outputs");
  }
  Tensor g(last_output_.shape());
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = scale * (last_output_[i] - labels[i]) / static_cast<double>(n);
  }
  auto* head = dynamic_cast<Dense*>(layers_.back().get());
  g = head->backward_preactivation(g);
  for (auto it = layers_.rbegin() + 1; it != layers_.rend(); ++it) g = (*it)->backward(g);
}

void Network::zero_grad() {
  for (Param& p : params()) p.grad->fill(0.0);
}

std::vector<Param> Network::params() {
  std::vector<Param> out;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    layers_[i]->collect_params("layer" + std::to_string(i), out);
  }
  return out;
}

std::vector<Buffer> Network::buffers() {
  std::vector<Buffer> out;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    layers_[i]->collect_buffers("layer" + std::to_string(i), out);
  }
  return out;
}

std::size_t Network::parameter_count() {
  std::size_t n = 0;
  for (const Param& p : params()) n += p.value->size();
  return n;
}

}  // namespace tumorkit::nn
