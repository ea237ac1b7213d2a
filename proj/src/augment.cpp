#include "tumorkit/augment.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "tumorkit/error.hpp"

namespace tumorkit {

void AugmentConfig::validate() const {
  if (!std::isfinite(rescale)) throw InvalidArgument("augment: rescale must be finite");
  if (!(shear_range >= 0.0)) throw InvalidArgument("augment: shear_range must be >= 0");
  if (!(zoom_min > 0.0) || !(zoom_min <= zoom_max)) {
    throw InvalidArgument("augment: zoom range must satisfy 0 < min <= max");
  }
  if (!(hflip_prob >= 0.0 && hflip_prob <= 1.0)) {
    throw InvalidArgument("augment: hflip_prob must lie in [0,1]");
  }
}

AugmentConfig AugmentConfig::identity() {
  AugmentConfig cfg;
  cfg.shear_range = 0.0;
  cfg.zoom_min = cfg.zoom_max = 1.0;
  cfg.hflip_prob = 0.0;
  return cfg;
}

GrayImage hflip(const GrayImage& img) {
  GrayImage out(img.width(), img.height());
  for (std::size_t y = 0; y < img.height(); ++y) {
    for (std::size_t x = 0; x < img.width(); ++x) out(img.width() - 1 - x, y) = img(x, y);
  }
  return out;
}

GrayImage affine_warp(const GrayImage& img, double shear, double zoom) {
  if (!(zoom > 0.0)) throw InvalidArgument("affine_warp: zoom must be positive");
  if (img.empty()) return img;
  const std::size_t W = img.width();
  const std::size_t H = img.height();
  const double cx = (static_cast<double>(W) - 1.0) / 2.0;
  const double cy = (static_cast<double>(H) - 1.0) / 2.0;
  const double t = std::tan(shear);

  auto clamped = [](double s, std::size_t n) {
    return std::clamp(s, 0.0, static_cast<double>(n - 1));
  };

  GrayImage out(W, H);
  for (std::size_t y = 0; y < H; ++y) {
    const double dy = static_cast<double>(y) - cy;
    const double sy = clamped(cy + dy / zoom, H);
    const auto y0 = static_cast<std::size_t>(std::floor(sy));
    const std::size_t y1 = std::min(y0 + 1, H - 1);
    const double fy = sy - static_cast<double>(y0);
    for (std::size_t x = 0; x < W; ++x) {
      const double dx = static_cast<double>(x) - cx;
      const double sx = clamped(cx + (dx - t * dy) / zoom, W);
      const auto x0 = static_cast<std::size_t>(std::floor(sx));
      const std::size_t x1 = std::min(x0 + 1, W - 1);
      const double fx = sx - static_cast<double>(x0);
      double v = img(x0, y0);
      if (fx != 0.0 || fy != 0.0) {
        const double top = img(x0, y0) * (1.0 - fx) + img(x1, y0) * fx;
        const double bottom = img(x0, y1) * (1.0 - fx) + img(x1, y1) * fx;
        v = top * (1.0 - fy) + bottom * fy;
      }
      out(x, y) = v;
    }
  }
  return out;
}

AugmentParams sample_augmentation(const AugmentConfig& cfg, Rng& stream) {
  cfg.validate();
  AugmentParams p;
  p.shear = std::uniform_real_distribution<double>(-cfg.shear_range, cfg.shear_range)(stream);
  p.zoom = std::uniform_real_distribution<double>(cfg.zoom_min, cfg.zoom_max)(stream);
  p.flip = std::bernoulli_distribution(cfg.hflip_prob)(stream);
  // uniform_real_distribution(a, a) may return a value rounded off a.
  if (cfg.shear_range == 0.0) p.shear = 0.0;
  if (cfg.zoom_min == cfg.zoom_max) p.zoom = cfg.zoom_min;
  return p;
}

GrayImage augment_apply(const GrayImage& img, double rescale, const AugmentParams& params) {
  GrayImage out = img;
  if (rescale != 1.0) {
    for (double& v : out.pixels()) v *= rescale;
  }
  if (params.flip) out = hflip(out);
  if (params.shear != 0.0 || params.zoom != 1.0) out = affine_warp(out, params.shear, params.zoom);
  for (double& v : out.pixels()) v = std::clamp(v, 0.0, 1.0);
  return out;
}

GrayImage augment_apply(const GrayImage& img, const AugmentConfig& cfg, Rng& stream) {
  return augment_apply(img, cfg.rescale, sample_augmentation(cfg, stream));
}

}  // namespace tumorkit
