#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace tumorkit {

// Single-channel intensity image, row-major. Loaders and filters keep values in
// [0,1]; the type itself only enforces size and finiteness so that rescaling
// can operate on images stored in other conventions (e.g. [0,255]).
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(std::size_t width, std::size_t height, double fill = 0.0);
  GrayImage(std::size_t width, std::size_t height, std::vector<double> data);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t x, std::size_t y) { return data_[y * width_ + x]; }
  double operator()(std::size_t x, std::size_t y) const { return data_[y * width_ + x]; }

  std::span<double> pixels() noexcept { return data_; }
  std::span<const double> pixels() const noexcept { return data_; }
  const std::vector<double>& data() const noexcept { return data_; }

  double min_value() const;
  double max_value() const;
  // True when every pixel lies in [0,1].
  bool is_normalized() const;

  bool same_shape(const GrayImage& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<double> data_;
};

struct Rgb {
  double r = 0.0;
  double g = 0.0;
  double b = 0.0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

class RgbImage {
 public:
  RgbImage() = default;
  RgbImage(std::size_t width, std::size_t height, Rgb fill = {});
  RgbImage(std::size_t width, std::size_t height, std::vector<Rgb> data);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }

  Rgb& operator()(std::size_t x, std::size_t y) { return data_[y * width_ + x]; }
  const Rgb& operator()(std::size_t x, std::size_t y) const { return data_[y * width_ + x]; }
  std::span<const Rgb> pixels() const noexcept { return data_; }

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<Rgb> data_;
};

// Row-major boolean grid; true marks tumor.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(std::size_t width, std::size_t height, bool fill = false);
  BinaryMask(std::size_t width, std::size_t height, std::vector<std::uint8_t> data);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }

  bool operator()(std::size_t x, std::size_t y) const { return data_[y * width_ + x] != 0; }
  void set(std::size_t x, std::size_t y, bool v) { data_[y * width_ + x] = v ? 1 : 0; }
  bool at(std::size_t i) const { return data_[i] != 0; }

  std::size_t count() const;
  std::span<const std::uint8_t> cells() const noexcept { return data_; }

  bool same_shape(const BinaryMask& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<std::uint8_t> data_;
};

// Pixels outside the mask are set to zero.
GrayImage apply_mask(const GrayImage& img, const BinaryMask& mask);

}  // namespace tumorkit
