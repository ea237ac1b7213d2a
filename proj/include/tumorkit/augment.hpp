#pragma once

#include <cstdint>

#include "tumorkit/image.hpp"
#include "tumorkit/random.hpp"

namespace tumorkit {

struct AugmentConfig {
  double rescale = 1.0;
  double shear_range = 0.2;  // radians
  double zoom_min = 0.8;
  double zoom_max = 1.2;
  double hflip_prob = 0.5;
  std::uint64_t seed = 0;

  void validate() const;
  // rescale 1, no shear, zoom (1,1), no flips.
  static AugmentConfig identity();
};

struct AugmentParams {
  double shear = 0.0;
  double zoom = 1.0;
  bool flip = false;
  friend bool operator==(const AugmentParams&, const AugmentParams&) = default;
};

GrayImage hflip(const GrayImage& img);

// Shear along x and uniform zoom about the image center, inverse-mapped with
// bilinear sampling. Source coordinates outside the image take the nearest
// edge value. zoom > 1 magnifies.
GrayImage affine_warp(const GrayImage& img, double shear, double zoom);

// Draws shear, then zoom, then flip from the stream.
AugmentParams sample_augmentation(const AugmentConfig& cfg, Rng& stream);

// rescale, then flip, then warp; output clamped to [0,1].
GrayImage augment_apply(const GrayImage& img, const AugmentConfig& cfg, Rng& stream);
GrayImage augment_apply(const GrayImage& img, double rescale, const AugmentParams& params);

}  // namespace tumorkit
