#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "tumorkit/image.hpp"

namespace tumorkit {

// Border extension used by every windowed operation: mirror about the edge
// pixel without repeating it (..., 2, 1 | 0, 1, 2, ... | n-2, n-3, ...).
std::size_t reflect_index(std::ptrdiff_t i, std::size_t n);

// Mean over a kernel_size x kernel_size window. kernel_size must be odd and
// no larger than the smaller image side.
GrayImage box_smooth(const GrayImage& img, std::size_t kernel_size);

// Normalized 1-D Gaussian weights, length kernel_size, centered.
std::vector<double> gaussian_kernel(std::size_t kernel_size, double sigma);

// Separable Gaussian convolution.
GrayImage gaussian_smooth(const GrayImage& img, std::size_t kernel_size, double sigma);

struct BilateralParams {
  std::size_t radius = 4;
  double sigma_space = 3.0;
  double sigma_range = 0.3;

  void validate() const;
};

// Edge-preserving weighted mean over a (2r+1)^2 window; weights combine
// spatial distance and intensity difference to the center pixel.
GrayImage bilateral_filter(const GrayImage& img, const BilateralParams& params);

// Rec. 601 luma.
GrayImage to_grayscale(const RgbImage& img);

// Bilinear resampling on pixel centers with edge clamping.
GrayImage resize(const GrayImage& img, std::size_t new_width, std::size_t new_height);

enum class SmoothKind { Box, Gaussian };

struct PreprocessStep {
  enum class Kind { Smooth, Bilateral, Resize };
  Kind kind = Kind::Smooth;

  SmoothKind smooth = SmoothKind::Box;
  std::size_t kernel_size = 7;
  double sigma = 1.0;

  BilateralParams bilateral;

  std::size_t width = 0;
  std::size_t height = 0;

  static PreprocessStep smoothing(std::size_t kernel_size = 7);
  static PreprocessStep gaussian(std::size_t kernel_size, double sigma);
  static PreprocessStep bilateral_step(BilateralParams params = {});
  static PreprocessStep resizing(std::size_t width, std::size_t height);
};

// Parses "smooth", "bilateral" or "resize"; throws InvalidArgument otherwise.
PreprocessStep::Kind parse_step_kind(std::string_view name);
std::string_view step_name(PreprocessStep::Kind kind);

struct PreprocessConfig {
  std::vector<PreprocessStep> steps;

  // smooth(7) followed by bilateral with default parameters.
  static PreprocessConfig defaults();
};

// Runs the configured steps in canonical order smooth -> bilateral -> resize
// (stable for repeated kinds). Inputs are already single-channel, so the
// grayscale step is implicit.
GrayImage preprocess_pipeline(const GrayImage& img, const PreprocessConfig& cfg);

}  // namespace tumorkit
