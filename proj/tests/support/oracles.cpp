#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <utility>

#include "tumorkit/nn/ops.hpp"

namespace tktest {

GrayImage random_image(std::size_t w, std::size_t h, tumorkit::Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  GrayImage img(w, h);
  for (double& v : img.pixels()) v = u(rng);
  return img;
}

BinaryMask random_mask(std::size_t w, std::size_t h, double p, tumorkit::Rng& rng) {
  std::bernoulli_distribution b(p);
  BinaryMask m(w, h);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) m.set(x, y, b(rng));
  return m;
}

Tensor random_tensor(const tumorkit::nn::Shape& shape, tumorkit::Rng& rng, double scale) {
  std::normal_distribution<double> n(0.0, scale);
  Tensor t(shape);
  for (double& v : t.values()) v = n(rng);
  return t;
}

double max_abs_diff(const GrayImage& a, const GrayImage& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return a.same_shape(b) ? m : std::numeric_limits<double>::infinity();
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) return std::numeric_limits<double>::infinity();
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

std::size_t fold(long i, std::size_t n) {
  const long last = static_cast<long>(n) - 1;
  if (last == 0) return 0;
  while (i < 0 || i > last) {
    if (i < 0) i = -i;
    if (i > last) i = 2 * last - i;
  }
  return static_cast<std::size_t>(i);
}

namespace {

template <class Weight>
GrayImage window_filter(const GrayImage& img, long r, Weight weight) {
  GrayImage out(img.width(), img.height());
  for (std::size_t y = 0; y < img.height(); ++y) {
    for (std::size_t x = 0; x < img.width(); ++x) {
      double num = 0.0, den = 0.0;
      for (long dy = -r; dy <= r; ++dy) {
        for (long dx = -r; dx <= r; ++dx) {
          const double v = img(fold(static_cast<long>(x) + dx, img.width()),
                               fold(static_cast<long>(y) + dy, img.height()));
          const double wgt = weight(dx, dy, v, img(x, y));
          num += wgt * v;
          den += wgt;
        }
      }
      out(x, y) = num / den;
    }
  }
  return out;
}

}  // namespace

GrayImage box_oracle(const GrayImage& img, std::size_t k) {
  return window_filter(img, static_cast<long>(k / 2), [](long, long, double, double) { return 1.0; });
}

GrayImage gaussian_oracle(const GrayImage& img, std::size_t k, double sigma) {
  return window_filter(img, static_cast<long>(k / 2), [&](long dx, long dy, double, double) {
    return std::exp(-static_cast<double>(dx * dx + dy * dy) / (2.0 * sigma * sigma));
  });
}

GrayImage bilateral_oracle(const GrayImage& img, std::size_t radius, double sigma_space,
                           double sigma_range) {
  return window_filter(img, static_cast<long>(radius), [&](long dx, long dy, double v, double c) {
    const double ds = static_cast<double>(dx * dx + dy * dy) / (2.0 * sigma_space * sigma_space);
    const double dr = (v - c) * (v - c) / (2.0 * sigma_range * sigma_range);
    return std::exp(-ds - dr);
  });
}

double exhaustive_wcss(std::span<const double> points, std::size_t k) {
  const std::size_t n = points.size();
  std::vector<std::size_t> label(n, 0);
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    std::vector<double> sum(k, 0.0);
    std::vector<std::size_t> count(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sum[label[i]] += points[i];
      ++count[label[i]];
    }
    if (std::all_of(count.begin(), count.end(), [](std::size_t c) { return c > 0; })) {
      double w = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double mean = sum[label[i]] / static_cast<double>(count[label[i]]);
        w += (points[i] - mean) * (points[i] - mean);
      }
      best = std::min(best, w);
    }
    std::size_t pos = 0;
    while (pos < n && ++label[pos] == k) label[pos++] = 0;
    if (pos == n) break;
  }
  return best;
}

double iou_oracle(const BinaryMask& a, const BinaryMask& b) {
  std::set<std::pair<std::size_t, std::size_t>> sa, sb, inter, uni;
  for (std::size_t y = 0; y < a.height(); ++y) {
    for (std::size_t x = 0; x < a.width(); ++x) {
      if (a(x, y)) sa.insert({x, y});
      if (b(x, y)) sb.insert({x, y});
    }
  }
  std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(),
                        std::inserter(inter, inter.begin()));
  std::set_union(sa.begin(), sa.end(), sb.begin(), sb.end(), std::inserter(uni, uni.begin()));
  return uni.empty() ? 0.0 : static_cast<double>(inter.size()) / static_cast<double>(uni.size());
}

Tensor conv_oracle(const Tensor& x, const Tensor& w, const Tensor& b, std::size_t stride,
                   std::size_t pad) {
  const std::size_t n = x.dim(0), h = x.dim(1), wd = x.dim(2), cin = x.dim(3);
  const std::size_t kh = w.dim(0), kw = w.dim(1), cout = w.dim(3);
  const std::size_t oh = (h + 2 * pad - kh) / stride + 1, ow = (wd + 2 * pad - kw) / stride + 1;
  Tensor out({n, oh, ow, cout});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t oy = 0; oy < oh; ++oy)
      for (std::size_t ox = 0; ox < ow; ++ox)
        for (std::size_t co = 0; co < cout; ++co) {
          double acc = b[co];
          for (std::size_t ky = 0; ky < kh; ++ky)
            for (std::size_t kx = 0; kx < kw; ++kx) {
              const long iy = static_cast<long>(oy * stride + ky) - static_cast<long>(pad);
              const long ix = static_cast<long>(ox * stride + kx) - static_cast<long>(pad);
              if (iy < 0 || ix < 0 || iy >= static_cast<long>(h) || ix >= static_cast<long>(wd)) continue;
              for (std::size_t ci = 0; ci < cin; ++ci) {
                acc += x.at(i, static_cast<std::size_t>(iy), static_cast<std::size_t>(ix), ci) *
                       w[((ky * kw + kx) * cin + ci) * cout + co];
              }
            }
          out.at(i, oy, ox, co) = acc;
        }
  return out;
}

GrayImage band_image(std::size_t w, std::size_t h, std::span<const double> levels, double sigma,
                     tumorkit::Rng& rng) {
  std::normal_distribution<double> noise(0.0, sigma);
  GrayImage img(w, h);
  for (std::size_t y = 0; y < h; ++y) {
    const double level = levels[y * levels.size() / h];
    for (std::size_t x = 0; x < w; ++x) img(x, y) = std::clamp(level + noise(rng), 0.0, 1.0);
  }
  return img;
}

double relative_error(double analytic, double numeric, double floor) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

GradCheck check_gradients(const std::function<double()>& loss,
                          const std::vector<std::pair<std::string, Tensor*>>& values,
                          const std::vector<const Tensor*>& analytic, std::size_t per_tensor,
                          tumorkit::Rng& rng, double step) {
  GradCheck result;
  for (std::size_t t = 0; t < values.size(); ++t) {
    Tensor& v = *values[t].second;
    std::vector<std::size_t> idx(v.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    if (idx.size() > per_tensor) {
      std::shuffle(idx.begin(), idx.end(), rng);
      idx.resize(per_tensor);
    }
    for (std::size_t i : idx) {
      const double orig = v[i];
      v[i] = orig + step;
      const double up = loss();
      v[i] = orig - step;
      const double down = loss();
      v[i] = orig;
      const double numeric = (up - down) / (2.0 * step);
      const double err = relative_error((*analytic[t])[i], numeric);
      ++result.checked;
      if (err > result.max_rel_error) {
        result.max_rel_error = err;
        result.worst = values[t].first + "[" + std::to_string(i) + "] analytic " +
                       std::to_string((*analytic[t])[i]) + " numeric " + std::to_string(numeric);
      }
    }
  }
  return result;
}

GradCheck check_layer_gradients(tumorkit::nn::Layer& layer, Tensor input, std::size_t per_tensor,
                                tumorkit::Rng& rng) {
  using tumorkit::nn::Mode;
  const Tensor r = random_tensor(layer.forward(input, Mode::Train).shape(), rng);
  std::vector<tumorkit::nn::Param> ps;
  layer.collect_params("", ps);
  for (auto& p : ps) p.grad->fill(0.0);
  layer.forward(input, Mode::Train);
  const Tensor grad_input = layer.backward(r);

  std::vector<Tensor> grads;
  grads.reserve(ps.size());
  for (auto& p : ps) grads.push_back(*p.grad);
  std::vector<std::pair<std::string, Tensor*>> values{{"input", &input}};
  std::vector<const Tensor*> analytic{&grad_input};
  for (std::size_t i = 0; i < ps.size(); ++i) {
    values.emplace_back(ps[i].name, ps[i].value);
    analytic.push_back(&grads[i]);
  }
  auto loss = [&] {
    const Tensor y = layer.forward(input, Mode::Train);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += y[i] * r[i];
    return s;
  };
  return check_gradients(loss, values, analytic, per_tensor, rng);
}

GradCheck check_network_gradients(tumorkit::nn::Network& net, const Tensor& batch,
                                  const std::vector<double>& labels, std::size_t per_tensor,
                                  tumorkit::Rng& rng, double step) {
  using tumorkit::nn::Mode;
  const Tensor y({labels.size(), 1}, labels);
  net.zero_grad();
  net.forward(batch, Mode::Train);
  net.backward(labels);
  auto ps = net.params();
  std::vector<Tensor> grads;
  grads.reserve(ps.size());
  for (auto& p : ps) grads.push_back(*p.grad);
  std::vector<std::pair<std::string, Tensor*>> values;
  std::vector<const Tensor*> analytic;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    values.emplace_back(ps[i].name, ps[i].value);
    analytic.push_back(&grads[i]);
  }
  auto loss = [&] { return tumorkit::nn::bce_loss(net.forward(batch, Mode::Train), y); };
  return check_gradients(loss, values, analytic, per_tensor, rng, step);
}

}  // namespace tktest
