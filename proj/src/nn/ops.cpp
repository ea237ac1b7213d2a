#include "tumorkit/nn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tumorkit/error.hpp"

namespace tumorkit::nn {
namespace {

void require_rank(const Tensor& t, std::size_t rank, const char* op) {
  if (t.rank() != rank) {
    throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                     shape_string(t.shape()));
  }
}

std::size_t conv_extent(std::size_t in, std::size_t k, std::size_t stride, std::size_t pad,
                        const char* op) {
  if (stride == 0) throw InvalidArgument(std::string(op) + ": stride must be positive");
  if (in + 2 * pad < k) {
    throw ShapeError(std::string(op) + ": window " + std::to_string(k) + " exceeds padded input " +
                     std::to_string(in + 2 * pad));
  }
  return (in + 2 * pad - k) / stride + 1;
}

struct ConvDims {
  std::size_t n, h, w, ci, kh, kw, co, oh, ow;
};

ConvDims conv_dims(const Tensor& input, const Tensor& weights, std::size_t stride,
                   std::size_t padding) {
  require_rank(input, 4, "conv2d");
  require_rank(weights, 4, "conv2d weights");
  ConvDims d{input.dim(0), input.dim(1), input.dim(2), input.dim(3), weights.dim(0),
             weights.dim(1), weights.dim(3), 0, 0};
  if (weights.dim(2) != d.ci) {
    throw ShapeError("conv2d: input has " + std::to_string(d.ci) + " channels, weights expect " +
                     std::to_string(weights.dim(2)));
  }
  d.oh = conv_extent(d.h, d.kh, stride, padding, "conv2d");
  d.ow = conv_extent(d.w, d.kw, stride, padding, "conv2d");
  return d;
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& weights, const Tensor& bias, std::size_t stride,
              std::size_t padding) {
  const ConvDims d = conv_dims(input, weights, stride, padding);
  if (bias.size() != d.co) throw ShapeError("conv2d: bias length differs from output channels");
  Tensor out({d.n, d.oh, d.ow, d.co});
  const double* x = input.data();
  const double* wt = weights.data();
  double* o = out.data();
  const auto pad = static_cast<std::ptrdiff_t>(padding);
  for (std::size_t n = 0; n < d.n; ++n) {
    for (std::size_t oy = 0; oy < d.oh; ++oy) {
      for (std::size_t ox = 0; ox < d.ow; ++ox) {
        double* op = o + ((n * d.oh + oy) * d.ow + ox) * d.co;
        std::copy(bias.data(), bias.data() + d.co, op);
        for (std::size_t ky = 0; ky < d.kh; ++ky) {
          const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * stride + ky) - pad;
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(d.h)) continue;
          for (std::size_t kx = 0; kx < d.kw; ++kx) {
            const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * stride + kx) - pad;
            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(d.w)) continue;
            const double* ip = x + ((n * d.h + iy) * d.w + ix) * d.ci;
            const double* wp = wt + (ky * d.kw + kx) * d.ci * d.co;
            for (std::size_t c = 0; c < d.ci; ++c) {
              const double v = ip[c];
              const double* wr = wp + c * d.co;
              for (std::size_t k = 0; k < d.co; ++k) op[k] += v * wr[k];
            }
          }
        }
      }
    }
  }
  return out;
}

Tensor conv2d_backward(const Tensor& input, const Tensor& weights, const Tensor& grad_out,
                       std::size_t stride, std::size_t padding, Tensor& grad_weights,
                       Tensor& grad_bias) {
  const ConvDims d = conv_dims(input, weights, stride, padding);
  if (grad_out.shape() != Shape{d.n, d.oh, d.ow, d.co}) {
    throw ShapeError("conv2d_backward: gradient shape " + shape_string(grad_out.shape()));
  }
  require_same_shape(grad_weights, weights, "conv2d_backward");
  Tensor grad_in(input.shape());
  const double* x = input.data();
  const double* wt = weights.data();
  const double* g = grad_out.data();
  double* gi = grad_in.data();
  double* gw = grad_weights.data();
  double* gb = grad_bias.data();
  const auto pad = static_cast<std::ptrdiff_t>(padding);
  for (std::size_t n = 0; n < d.n; ++n) {
    for (std::size_t oy = 0; oy < d.oh; ++oy) {
      for (std::size_t ox = 0; ox < d.ow; ++ox) {
        const double* gp = g + ((n * d.oh + oy) * d.ow + ox) * d.co;
        for (std::size_t k = 0; k < d.co; ++k) gb[k] += gp[k];
        for (std::size_t ky = 0; ky < d.kh; ++ky) {
          const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * stride + ky) - pad;
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(d.h)) continue;
          for (std::size_t kx = 0; kx < d.kw; ++kx) {
            const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * stride + kx) - pad;
            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(d.w)) continue;
            const std::size_t in_off = ((n * d.h + iy) * d.w + ix) * d.ci;
            const std::size_t w_off = (ky * d.kw + kx) * d.ci * d.co;
            for (std::size_t c = 0; c < d.ci; ++c) {
              const double v = x[in_off + c];
              const double* wr = wt + w_off + c * d.co;
              double* gwr = gw + w_off + c * d.co;
              double acc = 0.0;
              for (std::size_t k = 0; k < d.co; ++k) {
                acc += gp[k] * wr[k];
                gwr[k] += v * gp[k];
              }
              gi[in_off + c] += acc;
            }
          }
        }
      }
    }
  }
  return grad_in;
}

Tensor batch_norm(const Tensor& input, const Tensor& gamma, const Tensor& beta, Mode mode,
                  BatchNormState& state, double momentum, double epsilon, BatchNormCache* cache) {
  if (input.rank() < 2) throw ShapeError("batch_norm: input needs a batch axis and channels");
  const std::size_t C = input.shape().back();
  if (gamma.size() != C || beta.size() != C) {
    throw ShapeError("batch_norm: gamma/beta length differs from " + std::to_string(C) +
                     " channels");
  }
  if (state.running_mean.size() != C || state.running_var.size() != C) {
    throw ShapeError("batch_norm: running statistics length differs from channel count");
  }
  const std::size_t M = input.size() / C;
  if (M == 0) throw ShapeError("batch_norm: empty input");
  std::vector<double> mean(C, 0.0);
  std::vector<double> var(C, 0.0);
  const double* x = input.data();
  if (mode == Mode::Train) {
    for (std::size_t i = 0; i < M; ++i) {
      for (std::size_t c = 0; c < C; ++c) mean[c] += x[i * C + c];
    }
    for (double& m : mean) m /= static_cast<double>(M);
    for (std::size_t i = 0; i < M; ++i) {
      for (std::size_t c = 0; c < C; ++c) {
        const double d = x[i * C + c] - mean[c];
        var[c] += d * d;
      }
    }
    for (double& v : var) v /= static_cast<double>(M);
    for (std::size_t c = 0; c < C; ++c) {
      state.running_mean[c] = momentum * state.running_mean[c] + (1.0 - momentum) * mean[c];
      state.running_var[c] = momentum * state.running_var[c] + (1.0 - momentum) * var[c];
    }
  } else {
    for (std::size_t c = 0; c < C; ++c) {
      mean[c] = state.running_mean[c];
      var[c] = state.running_var[c];
    }
  }
  std::vector<double> inv_std(C);
  for (std::size_t c = 0; c < C; ++c) inv_std[c] = 1.0 / std::sqrt(var[c] + epsilon);

  Tensor out(input.shape());
  Tensor normalized(input.shape());
  double* o = out.data();
  double* xh = normalized.data();
  for (std::size_t i = 0; i < M; ++i) {
    for (std::size_t c = 0; c < C; ++c) {
      const double h = (x[i * C + c] - mean[c]) * inv_std[c];
      xh[i * C + c] = h;
      o[i * C + c] = gamma[c] * h + beta[c];
    }
  }
  if (cache) {
    cache->normalized = std::move(normalized);
    cache->inv_std = std::move(inv_std);
    cache->mode = mode;
  }
  return out;
}

Tensor batch_norm_backward(const Tensor& grad_out, const Tensor& gamma, const BatchNormCache& cache,
                           Tensor& grad_gamma, Tensor& grad_beta) {
  require_same_shape(grad_out, cache.normalized, "batch_norm_backward");
  const std::size_t C = gamma.size();
  const std::size_t M = grad_out.size() / C;
  const double* g = grad_out.data();
  const double* xh = cache.normalized.data();
  std::vector<double> sum_g(C, 0.0);
  std::vector<double> sum_gx(C, 0.0);
  for (std::size_t i = 0; i < M; ++i) {
    for (std::size_t c = 0; c < C; ++c) {
      sum_g[c] += g[i * C + c];
      sum_gx[c] += g[i * C + c] * xh[i * C + c];
    }
  }
  for (std::size_t c = 0; c < C; ++c) {
    grad_gamma[c] += sum_gx[c];
    grad_beta[c] += sum_g[c];
  }
  Tensor grad_in(grad_out.shape());
  double* gi = grad_in.data();
  if (cache.mode == Mode::Infer) {
    for (std::size_t i = 0; i < M; ++i) {
      for (std::size_t c = 0; c < C; ++c) gi[i * C + c] = g[i * C + c] * gamma[c] * cache.inv_std[c];
    }
    return grad_in;
  }
  const double m = static_cast<double>(M);
  for (std::size_t i = 0; i < M; ++i) {
    for (std::size_t c = 0; c < C; ++c) {
      const double scale = gamma[c] * cache.inv_std[c] / m;
      gi[i * C + c] = scale * (m * g[i * C + c] - sum_g[c] - xh[i * C + c] * sum_gx[c]);
    }
  }
  return grad_in;
}

Tensor relu(const Tensor& input) {
  Tensor out = input;
  for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
  return out;
}

Tensor relu_backward(const Tensor& output, const Tensor& grad_out) {
  require_same_shape(output, grad_out, "relu_backward");
  Tensor g = grad_out;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!(output[i] > 0.0)) g[i] = 0.0;
  }
  return g;
}

Tensor sigmoid(const Tensor& input) {
  Tensor out = input;
  for (double& v : out.values()) {
    if (v >= 0.0) {
      v = 1.0 / (1.0 + std::exp(-v));
    } else {
      const double e = std::exp(v);
      v = e / (1.0 + e);
    }
  }
  return out;
}

Tensor sigmoid_backward(const Tensor& output, const Tensor& grad_out) {
  require_same_shape(output, grad_out, "sigmoid_backward");
  Tensor g = grad_out;
  for (std::size_t i = 0; i < g.size(); ++i) g[i] *= output[i] * (1.0 - output[i]);
  return g;
}

Tensor max_pool(const Tensor& input, std::size_t size, std::size_t stride,
                std::vector<std::size_t>* argmax) {
  require_rank(input, 4, "max_pool");
  if (size == 0) throw InvalidArgument("max_pool: size must be positive");
  const std::size_t N = input.dim(0), H = input.dim(1), W = input.dim(2), C = input.dim(3);
  if (size > H || size > W) {
    throw ShapeError("max_pool: window " + std::to_string(size) + " exceeds input " +
                     shape_string(input.shape()));
  }
  const std::size_t OH = conv_extent(H, size, stride, 0, "max_pool");
  const std::size_t OW = conv_extent(W, size, stride, 0, "max_pool");
  Tensor out({N, OH, OW, C});
  if (argmax) argmax->assign(out.size(), 0);
  for (std::size_t n = 0; n < N; ++n) {
    for (std::size_t oy = 0; oy < OH; ++oy) {
      for (std::size_t ox = 0; ox < OW; ++ox) {
        for (std::size_t c = 0; c < C; ++c) {
          std::size_t best_i = ((n * H + oy * stride) * W + ox * stride) * C + c;
          double best = input[best_i];
          for (std::size_t ky = 0; ky < size; ++ky) {
            for (std::size_t kx = 0; kx < size; ++kx) {
              const std::size_t i = ((n * H + oy * stride + ky) * W + ox * stride + kx) * C + c;
              if (input[i] > best) {
                best = input[i];
                best_i = i;
              }
            }
          }
          const std::size_t o = ((n * OH + oy) * OW + ox) * C + c;
          out[o] = best;
          if (argmax) (*argmax)[o] = best_i;
        }
      }
    }
  }
  return out;
}

Tensor max_pool_backward(const Shape& input_shape, const std::vector<std::size_t>& argmax,
                         const Tensor& grad_out) {
  if (argmax.size() != grad_out.size()) throw ShapeError("max_pool_backward: cache mismatch");
  Tensor grad_in(input_shape);
  for (std::size_t o = 0; o < argmax.size(); ++o) grad_in[argmax[o]] += grad_out[o];
  return grad_in;
}

Tensor global_avg_pool(const Tensor& input) {
  require_rank(input, 4, "global_avg_pool");
  const std::size_t N = input.dim(0), HW = input.dim(1) * input.dim(2), C = input.dim(3);
  Tensor out({N, 1, 1, C});
  for (std::size_t n = 0; n < N; ++n) {
    for (std::size_t p = 0; p < HW; ++p) {
      for (std::size_t c = 0; c < C; ++c) out[n * C + c] += input[(n * HW + p) * C + c];
    }
  }
  for (double& v : out.values()) v /= static_cast<double>(HW);
  return out;
}

Tensor global_avg_pool_backward(const Shape& input_shape, const Tensor& grad_out) {
  const std::size_t N = input_shape[0], HW = input_shape[1] * input_shape[2], C = input_shape[3];
  if (grad_out.size() != N * C) throw ShapeError("global_avg_pool_backward: gradient size");
  Tensor grad_in(input_shape);
  for (std::size_t n = 0; n < N; ++n) {
    for (std::size_t p = 0; p < HW; ++p) {
      for (std::size_t c = 0; c < C; ++c) {
        grad_in[(n * HW + p) * C + c] = grad_out[n * C + c] / static_cast<double>(HW);
      }
    }
  }
  return grad_in;
}

Tensor flatten(const Tensor& input) {
  if (input.rank() < 1) throw ShapeError("flatten: scalar input");
  const std::size_t n = input.dim(0);
  return input.reshaped({n, n == 0 ? 0 : input.size() / n});
}

Tensor dense(const Tensor& input, const Tensor& weights, const Tensor& bias) {
  require_rank(input, 2, "dense");
  require_rank(weights, 2, "dense weights");
  const std::size_t N = input.dim(0), F = input.dim(1), U = weights.dim(1);
  if (weights.dim(0) != F) {
    throw ShapeError("dense: input has " + std::to_string(F) + " features, weights expect " +
                     std::to_string(weights.dim(0)));
  }
  if (bias.size() != U) throw ShapeError("dense: bias length differs from units");
  Tensor out({N, U});
  for (std::size_t n = 0; n < N; ++n) {
    double* o = out.data() + n * U;
    std::copy(bias.data(), bias.data() + U, o);
    for (std::size_t f = 0; f < F; ++f) {
      const double v = input[n * F + f];
      const double* wr = weights.data() + f * U;
      for (std::size_t u = 0; u < U; ++u) o[u] += v * wr[u];
    }
  }
  return out;
}

Tensor dense_backward(const Tensor& input, const Tensor& weights, const Tensor& grad_out,
                      Tensor& grad_weights, Tensor& grad_bias) {
  const std::size_t N = input.dim(0), F = input.dim(1), U = weights.dim(1);
  if (grad_out.shape() != Shape{N, U}) throw ShapeError("dense_backward: gradient shape");
  Tensor grad_in({N, F});
  for (std::size_t n = 0; n < N; ++n) {
    const double* g = grad_out.data() + n * U;
    for (std::size_t u = 0; u < U; ++u) grad_bias[u] += g[u];
    for (std::size_t f = 0; f < F; ++f) {
      const double v = input[n * F + f];
      const double* wr = weights.data() + f * U;
      double* gwr = grad_weights.data() + f * U;
      double acc = 0.0;
      for (std::size_t u = 0; u < U; ++u) {
        acc += g[u] * wr[u];
        gwr[u] += v * g[u];
      }
      grad_in[n * F + f] = acc;
    }
  }
  return grad_in;
}

double bce_loss(const Tensor& probabilities, const Tensor& labels) {
  if (probabilities.size() != labels.size()) {
    throw ShapeError("bce_loss: " + std::to_string(probabilities.size()) + " probabilities vs " +
                     std::to_string(labels.size()) + " labels");
  }
  if (probabilities.empty()) throw InvalidArgument("bce_loss: empty batch");
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double p = std::clamp(probabilities[i], kBceClamp, 1.0 - kBceClamp);
    const double y = labels[i];
    total -= y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
  }
  return total / static_cast<double>(labels.size());
}

}  // namespace tumorkit::nn
