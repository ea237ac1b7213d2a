#pragma once

#include <cstddef>
#include <vector>

#include "tumorkit/nn/tensor.hpp"

namespace tumorkit::nn {

enum class Mode { Train, Infer };

// Cross-correlation with zero padding. input NHWC, weights [KH, KW, Cin, Cout],
// bias [Cout].
Tensor conv2d(const Tensor& input, const Tensor& weights, const Tensor& bias, std::size_t stride,
              std::size_t padding);

// Accumulates into grad_weights / grad_bias and returns d(loss)/d(input).
Tensor conv2d_backward(const Tensor& input, const Tensor& weights, const Tensor& grad_out,
                       std::size_t stride, std::size_t padding, Tensor& grad_weights,
                       Tensor& grad_bias);

struct BatchNormState {
  Tensor running_mean;
  Tensor running_var;
};

// Saved by the forward pass for the backward pass.
struct BatchNormCache {
  Tensor normalized;
  std::vector<double> inv_std;
  Mode mode = Mode::Train;
};

// Normalizes the last axis' channels over all other axes. Train mode uses
// batch statistics (biased variance) and folds them into `state` with
// running = momentum * running + (1 - momentum) * batch; Infer mode reads
// `state`.
Tensor batch_norm(const Tensor& input, const Tensor& gamma, const Tensor& beta, Mode mode,
                  BatchNormState& state, double momentum, double epsilon,
                  BatchNormCache* cache = nullptr);

Tensor batch_norm_backward(const Tensor& grad_out, const Tensor& gamma, const BatchNormCache& cache,
                           Tensor& grad_gamma, Tensor& grad_beta);

Tensor relu(const Tensor& input);
Tensor relu_backward(const Tensor& output, const Tensor& grad_out);

Tensor sigmoid(const Tensor& input);
Tensor sigmoid_backward(const Tensor& output, const Tensor& grad_out);

// Window size x size, no padding. argmax (flat input index per output) is
// filled when non-null; ties go to the first position in scan order.
Tensor max_pool(const Tensor& input, std::size_t size, std::size_t stride,
                std::vector<std::size_t>* argmax = nullptr);
Tensor max_pool_backward(const Shape& input_shape, const std::vector<std::size_t>& argmax,
                         const Tensor& grad_out);

// [N, H, W, C] -> [N, 1, 1, C].
Tensor global_avg_pool(const Tensor& input);
Tensor global_avg_pool_backward(const Shape& input_shape, const Tensor& grad_out);

// [N, ...] -> [N, product of the rest].
Tensor flatten(const Tensor& input);

// input [N, F], weights [F, U], bias [U].
Tensor dense(const Tensor& input, const Tensor& weights, const Tensor& bias);
Tensor dense_backward(const Tensor& input, const Tensor& weights, const Tensor& grad_out,
                      Tensor& grad_weights, Tensor& grad_bias);

inline constexpr double kBceClamp = 1e-7;

// Mean of -[y ln p + (1 - y) ln(1 - p)] with p clamped to [eps, 1 - eps].
double bce_loss(const Tensor& probabilities, const Tensor& labels);

}  // namespace tumorkit::nn
