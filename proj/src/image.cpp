#include "tumorkit/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tumorkit/error.hpp"

namespace tumorkit {
namespace {

void check_size(std::size_t width, std::size_t height, std::size_t n, const char* what) {
  if (width * height != n) {
    throw ShapeError(std::string(what) + ": data length " + std::to_string(n) +
                     " does not match " + std::to_string(width) + "x" +
                     std::to_string(height));
  }
}

}  // namespace

GrayImage::GrayImage(std::size_t width, std::size_t height, double fill)
    : width_(width), height_(height), data_(width * height, fill) {}

GrayImage::GrayImage(std::size_t width, std::size_t height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
  check_size(width_, height_, data_.size(), "GrayImage");
  for (double v : data_) {
    if (!std::isfinite(v)) throw InvalidArgument("GrayImage: non-finite pixel value");
  }
}

double GrayImage::min_value() const {
  if (data_.empty()) throw InvalidArgument("GrayImage::min_value on empty image");
  return *std::min_element(data_.begin(), data_.end());
}

double GrayImage::max_value() const {
  if (data_.empty()) throw InvalidArgument("GrayImage::max_value on empty image");
  return *std::max_element(data_.begin(), data_.end());
}

bool GrayImage::is_normalized() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return v >= 0.0 && v <= 1.0; });
}

RgbImage::RgbImage(std::size_t width, std::size_t height, Rgb fill)
    : width_(width), height_(height), data_(width * height, fill) {}

RgbImage::RgbImage(std::size_t width, std::size_t height, std::vector<Rgb> data)
    : width_(width), height_(height), data_(std::move(data)) {
  check_size(width_, height_, data_.size(), "RgbImage");
  for (const Rgb& p : data_) {
    for (double c : {p.r, p.g, p.b}) {
      if (!(c >= 0.0 && c <= 1.0)) throw InvalidArgument("RgbImage: channel outside [0,1]");
    }
  }
}

BinaryMask::BinaryMask(std::size_t width, std::size_t height, bool fill)
    : width_(width), height_(height), data_(width * height, fill ? 1 : 0) {}

BinaryMask::BinaryMask(std::size_t width, std::size_t height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
  check_size(width_, height_, data_.size(), "BinaryMask");
  for (auto& v : data_) v = v != 0 ? 1 : 0;
}

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), std::uint8_t{1}));
}

GrayImage apply_mask(const GrayImage& img, const BinaryMask& mask) {
  if (img.width() != mask.width() || img.height() != mask.height()) {
    throw ShapeError("apply_mask: mask and image dimensions differ");
  }
  GrayImage out = img;
  auto px = out.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) {
    if (!mask.at(i)) px[i] = 0.0;
  }
  return out;
}

}  // namespace tumorkit
