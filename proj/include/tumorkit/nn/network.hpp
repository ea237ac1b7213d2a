#pragma once

#include <memory>
#include <span>
#include <vector>

#include "tumorkit/nn/config.hpp"
#include "tumorkit/nn/layers.hpp"

namespace tumorkit::nn {

// Sequential stack ending in a Dense(1, sigmoid) head trained with binary
// cross-entropy.
class Network {
 public:
  // Builds and initializes from cfg.seed.
  explicit Network(NetworkConfig cfg);

  const NetworkConfig& config() const noexcept { return cfg_; }
  std::vector<std::unique_ptr<Layer>>& layers() noexcept { return layers_; }

  // batch NHWC -> probabilities [N, 1].
  Tensor forward(const Tensor& batch, Mode mode);

  // Accumulates scale * d(bce)/d(param) for the last Train-mode forward pass.
  // With a sigmoid head the logit gradient is (p - y) / N.
  void backward(std::span<const double> labels, double scale = 1.0);

  void zero_grad();
  std::vector<Param> params();
  std::vector<Buffer> buffers();
  std::size_t parameter_count();

 private:
  NetworkConfig cfg_;
  std::vector<std::unique_ptr<Layer>> layers_;
  Tensor last_output_;
  bool trained_forward_ = false;
};

}  // namespace tumorkit::nn
