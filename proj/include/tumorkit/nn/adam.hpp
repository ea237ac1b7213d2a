#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tumorkit/nn/layers.hpp"
#include "tumorkit/nn/tensor.hpp"

namespace tumorkit::nn {

struct AdamState {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t step_count = 0;
  // One moment tensor per parameter, created on the first step.
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;

  void validate() const;
};

// One bias-corrected Adam update:
//   m <- b1 m + (1 - b1) g,  v <- b2 v + (1 - b2) g^2,
//   p <- p - lr * m_hat / (sqrt(v_hat) + eps).
void adam_step(std::span<Tensor* const> params, std::span<const Tensor* const> grads,
               AdamState& state);
void adam_step(std::span<const Param> params, AdamState& state);

}  // namespace tumorkit::nn
