#include "tumorkit/imgproc.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tumorkit/error.hpp"

namespace tumorkit {
namespace {

void check_odd_kernel(std::size_t kernel_size, const char* op) {
  if (kernel_size == 0 || kernel_size % 2 == 0) {
    throw InvalidArgument(std::string(op) + ": kernel size must be odd and positive, got " +
                          std::to_string(kernel_size));
  }
}

void check_nonempty(const GrayImage& img, const char* op) {
  if (img.empty()) throw InvalidArgument(std::string(op) + ": empty image");
}

// Horizontal then vertical pass with the same 1-D weights, each pass divided
// by `norm`.
GrayImage separable(const GrayImage& img, const std::vector<double>& w, double norm = 1.0) {
  const std::size_t W = img.width();
  const std::size_t H = img.height();
  const auto r = static_cast<std::ptrdiff_t>(w.size() / 2);
  GrayImage tmp(W, H);
  for (std::size_t y = 0; y < H; ++y) {
    for (std::size_t x = 0; x < W; ++x) {
      double acc = 0.0;
      for (std::ptrdiff_t d = -r; d <= r; ++d) {
        acc += w[d + r] * img(reflect_index(static_cast<std::ptrdiff_t>(x) + d, W), y);
      }
      tmp(x, y) = acc / norm;
    }
  }
  GrayImage out(W, H);
  for (std::size_t y = 0; y < H; ++y) {
    for (std::size_t x = 0; x < W; ++x) {
      double acc = 0.0;
      for (std::ptrdiff_t d = -r; d <= r; ++d) {
        acc += w[d + r] * tmp(x, reflect_index(static_cast<std::ptrdiff_t>(y) + d, H));
      }
      out(x, y) = acc / norm;
    }
  }
  return out;
}

}  // namespace

std::size_t reflect_index(std::ptrdiff_t i, std::size_t n) {
  if (n == 1) return 0;
  const auto period = static_cast<std::ptrdiff_t>(2 * (n - 1));
  std::ptrdiff_t m = i % period;
  if (m < 0) m += period;
  const auto last = static_cast<std::ptrdiff_t>(n - 1);
  return static_cast<std::size_t>(m <= last ? m : period - m);
}

GrayImage box_smooth(const GrayImage& img, std::size_t kernel_size) {
  check_nonempty(img, "box_smooth");
  check_odd_kernel(kernel_size, "box_smooth");
  if (kernel_size > std::min(img.width(), img.height())) {
    throw InvalidArgument("box_smooth: kernel " + std::to_string(kernel_size) +
                          " exceeds image side");
  }
  const std::vector<double> w(kernel_size, 1.0);
  return separable(img, w, static_cast<double>(kernel_size));
}

std::vector<double> gaussian_kernel(std::size_t kernel_size, double sigma) {
  check_odd_kernel(kernel_size, "gaussian_kernel");
  if (!(sigma > 0.0)) throw InvalidArgument("gaussian_kernel: sigma must be positive");
  const auto r = static_cast<std::ptrdiff_t>(kernel_size / 2);
  std::vector<double> w(kernel_size);
  double sum = 0.0;
  for (std::ptrdiff_t d = -r; d <= r; ++d) {
    const double v = std::exp(-static_cast<double>(d * d) / (2.0 * sigma * sigma));
    w[d + r] = v;
    sum += v;
  }
  for (double& v : w) v /= sum;
  return w;
}

GrayImage gaussian_smooth(const GrayImage& img, std::size_t kernel_size, double sigma) {
  check_nonempty(img, "gaussian_smooth");
  return separable(img, gaussian_kernel(kernel_size, sigma));
}

void BilateralParams::validate() const {
  if (radius < 1) throw InvalidArgument("bilateral: radius must be >= 1");
  if (!(sigma_space > 0.0) || !(sigma_range > 0.0)) {
    throw InvalidArgument("bilateral: sigmas must be positive");
  }
}

GrayImage bilateral_filter(const GrayImage& img, const BilateralParams& params) {
  check_nonempty(img, "bilateral_filter");
  params.validate();
  const std::size_t W = img.width();
  const std::size_t H = img.height();
  const auto r = static_cast<std::ptrdiff_t>(params.radius);
  const std::size_t side = 2 * params.radius + 1;

  std::vector<double> spatial(side * side);
  for (std::ptrdiff_t dy = -r; dy <= r; ++dy) {
    for (std::ptrdiff_t dx = -r; dx <= r; ++dx) {
      spatial[(dy + r) * side + (dx + r)] =
          std::exp(-static_cast<double>(dx * dx + dy * dy) /
                   (2.0 * params.sigma_space * params.sigma_space));
    }
  }
  const double range_den = 2.0 * params.sigma_range * params.sigma_range;

  GrayImage out(W, H);
  for (std::size_t y = 0; y < H; ++y) {
    for (std::size_t x = 0; x < W; ++x) {
      const double center = img(x, y);
      double num = 0.0;
      double den = 0.0;
      for (std::ptrdiff_t dy = -r; dy <= r; ++dy) {
        const std::size_t yy = reflect_index(static_cast<std::ptrdiff_t>(y) + dy, H);
        for (std::ptrdiff_t dx = -r; dx <= r; ++dx) {
          const double v = img(reflect_index(static_cast<std::ptrdiff_t>(x) + dx, W), yy);
          const double diff = v - center;
          const double wgt = spatial[(dy + r) * side + (dx + r)] * std::exp(-diff * diff / range_den);
          num += wgt * v;
          den += wgt;
        }
      }
      out(x, y) = num / den;
    }
  }
  return out;
}

GrayImage to_grayscale(const RgbImage& img) {
  GrayImage out(img.width(), img.height());
  for (std::size_t y = 0; y < img.height(); ++y) {
    for (std::size_t x = 0; x < img.width(); ++x) {
      const Rgb& p = img(x, y);
      out(x, y) = 0.299 * p.r + 0.587 * p.g + 0.114 * p.b;
    }
  }
  return out;
}

GrayImage resize(const GrayImage& img, std::size_t new_width, std::size_t new_height) {
  check_nonempty(img, "resize");
  if (new_width == 0 || new_height == 0) throw InvalidArgument("resize: zero target dimension");
  const std::size_t W = img.width();
  const std::size_t H = img.height();
  if (W == new_width && H == new_height) return img;

  // Source coordinate of a target pixel center, clamped into the image.
  auto source = [](std::size_t dst, std::size_t n_in, std::size_t n_out) {
    const double s = (static_cast<double>(dst) + 0.5) * static_cast<double>(n_in) /
                         static_cast<double>(n_out) - 0.5;
    return std::clamp(s, 0.0, static_cast<double>(n_in - 1));
  };

  GrayImage out(new_width, new_height);
  for (std::size_t y = 0; y < new_height; ++y) {
    const double sy = source(y, H, new_height);
    const auto y0 = static_cast<std::size_t>(sy);
    const std::size_t y1 = std::min(y0 + 1, H - 1);
    const double fy = sy - static_cast<double>(y0);
    for (std::size_t x = 0; x < new_width; ++x) {
      const double sx = source(x, W, new_width);
      const auto x0 = static_cast<std::size_t>(sx);
      const std::size_t x1 = std::min(x0 + 1, W - 1);
      const double fx = sx - static_cast<double>(x0);
      const double top = img(x0, y0) * (1.0 - fx) + img(x1, y0) * fx;
      const double bottom = img(x0, y1) * (1.0 - fx) + img(x1, y1) * fx;
      out(x, y) = top * (1.0 - fy) + bottom * fy;
    }
  }
  return out;
}

PreprocessStep PreprocessStep::smoothing(std::size_t kernel_size) {
  PreprocessStep s;
  s.kind = Kind::Smooth;
  s.smooth = SmoothKind::Box;
  s.kernel_size = kernel_size;
  return s;
}

PreprocessStep PreprocessStep::gaussian(std::size_t kernel_size, double sigma) {
  PreprocessStep s = smoothing(kernel_size);
  s.smooth = SmoothKind::Gaussian;
  s.sigma = sigma;
  return s;
}

PreprocessStep PreprocessStep::bilateral_step(BilateralParams params) {
  PreprocessStep s;
  s.kind = Kind::Bilateral;
  s.bilateral = params;
  return s;
}

PreprocessStep PreprocessStep::resizing(std::size_t width, std::size_t height) {
  PreprocessStep s;
  s.kind = Kind::Resize;
  s.width = width;
  s.height = height;
  return s;
}

PreprocessStep::Kind parse_step_kind(std::string_view name) {
  if (name == "smooth") return PreprocessStep::Kind::Smooth;
  if (name == "bilateral") return PreprocessStep::Kind::Bilateral;
  if (name == "resize") return PreprocessStep::Kind::Resize;
  throw InvalidArgument("unknown preprocessing step '" + std::string(name) + "'");
}

std::string_view step_name(PreprocessStep::Kind kind) {
  switch (kind) {
    case PreprocessStep::Kind::Smooth: return "smooth";
    case PreprocessStep::Kind::Bilateral: return "bilateral";
    case PreprocessStep::Kind::Resize: return "resize";
  }
  return "?";
}

PreprocessConfig PreprocessConfig::defaults() {
  return {{PreprocessStep::smoothing(7), PreprocessStep::bilateral_step()}};
}

GrayImage preprocess_pipeline(const GrayImage& img, const PreprocessConfig& cfg) {
  std::vector<PreprocessStep> ordered = cfg.steps;
  std::stable_sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
    return static_cast<int>(a.kind) < static_cast<int>(b.kind);
  });
  GrayImage out = img;
  for (const auto& step : ordered) {
    switch (step.kind) {
      case PreprocessStep::Kind::Smooth:
        out = step.smooth == SmoothKind::Box ? box_smooth(out, step.kernel_size)
                                             : gaussian_smooth(out, step.kernel_size, step.sigma);
        break;
      case PreprocessStep::Kind::Bilateral:
        out = bilateral_filter(out, step.bilateral);
        break;
      case PreprocessStep::Kind::Resize:
        out = resize(out, step.width, step.height);
        break;
    }
  }
  return out;
}

}  // namespace tumorkit
