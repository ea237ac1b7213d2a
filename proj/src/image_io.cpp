#include "tumorkit/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>
#include <string>
#include <vector>

#include "tumorkit/error.hpp"
#include "tumorkit/imgproc.hpp"

namespace tumorkit {
namespace {

struct RawImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t channels = 1;  // 1 or 3
  double max_value = 255.0;
  std::vector<std::uint16_t> samples;
};

std::vector<unsigned char> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

RawImage decode_png(const std::filesystem::path& path, const std::vector<unsigned char>& bytes) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw IoError("PNG decode failed for " + path.string() + ": " + image.message);
  }
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  const bool wide = (image.format & PNG_FORMAT_FLAG_LINEAR) != 0;
  RawImage raw;
  raw.width = image.width;
  raw.height = image.height;
  raw.channels = color ? 3 : 1;
  const std::size_t n = raw.width * raw.height * raw.channels;
  raw.samples.resize(n);
  if (wide && !color) {
    // 16-bit grayscale: read linear samples as stored.
    image.format = PNG_FORMAT_LINEAR_Y;
    raw.max_value = 65535.0;
    if (!png_image_finish_read(&image, nullptr, raw.samples.data(), 0, nullptr)) {
      png_image_free(&image);
      throw IoError("PNG decode failed for " + path.string() + ": " + image.message);
    }
  } else {
    image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    std::vector<std::uint8_t> buf(n);
    if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
      png_image_free(&image);
      throw IoError("PNG decode failed for " + path.string() + ": " + image.message);
    }
    std::copy(buf.begin(), buf.end(), raw.samples.begin());
  }
  return raw;
}

RawImage decode_pgm(const std::filesystem::path& path, const std::vector<unsigned char>& bytes) {
  std::size_t pos = 2;
  auto next_token = [&]() -> std::size_t {
    for (;;) {
      while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
      if (pos < bytes.size() && bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        continue;
      }
      break;
    }
    std::size_t start = pos;
    std::size_t value = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      value = value * 10 + (bytes[pos] - '0');
      ++pos;
    }
    if (pos == start) throw IoError("PGM header malformed in " + path.string());
    return value;
  };
  RawImage raw;
  raw.width = next_token();
  raw.height = next_token();
  const std::size_t maxval = next_token();
  if (maxval == 0 || maxval > 65535) throw IoError("PGM maxval out of range in " + path.string());
  ++pos;  // single whitespace before the raster
  raw.max_value = static_cast<double>(maxval);
  const std::size_t n = raw.width * raw.height;
  const std::size_t bytes_per = maxval > 255 ? 2 : 1;
  if (bytes.size() < pos + n * bytes_per) throw IoError("PGM raster truncated in " + path.string());
  raw.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (bytes_per == 1) {
      raw.samples[i] = bytes[pos + i];
    } else {
      raw.samples[i] = static_cast<std::uint16_t>((bytes[pos + 2 * i] << 8) | bytes[pos + 2 * i + 1]);
    }
    if (raw.samples[i] > maxval) throw IoError("PGM sample exceeds maxval in " + path.string());
  }
  return raw;
}

RawImage decode(const std::filesystem::path& path) {
  const auto bytes = slurp(path);
  static constexpr std::array<unsigned char, 8> kPngSig{0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() >= 8 && std::equal(kPngSig.begin(), kPngSig.end(), bytes.begin())) {
    return decode_png(path, bytes);
  }
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') return decode_pgm(path, bytes);
  throw IoError("unsupported image format: " + path.string());
}

void write_gray8(const std::filesystem::path& path, std::size_t width, std::size_t height,
                 const std::vector<std::uint8_t>& buf) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.c_str(), 0, buf.data(), 0, nullptr)) {
    throw IoError("cannot write " + path.string() + ": " + image.message);
  }
}

std::uint8_t quantize(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace

GrayImage read_image(const std::filesystem::path& path) {
  RawImage raw = decode(path);
  const std::size_t n = raw.width * raw.height;
  if (raw.channels == 3) {
    std::vector<Rgb> px(n);
    for (std::size_t i = 0; i < n; ++i) {
      px[i] = {raw.samples[3 * i] / raw.max_value, raw.samples[3 * i + 1] / raw.max_value,
               raw.samples[3 * i + 2] / raw.max_value};
    }
    return to_grayscale(RgbImage(raw.width, raw.height, std::move(px)));
  }
  std::vector<double> data(n);
  for (std::size_t i = 0; i < n; ++i) data[i] = raw.samples[i] / raw.max_value;
  return GrayImage(raw.width, raw.height, std::move(data));
}

BinaryMask read_mask(const std::filesystem::path& path) {
  RawImage raw = decode(path);
  const std::size_t n = raw.width * raw.height;
  std::vector<std::uint8_t> cells(n);
  for (std::size_t i = 0; i < n; ++i) {
    bool on = false;
    for (std::size_t c = 0; c < raw.channels; ++c) on = on || raw.samples[i * raw.channels + c] != 0;
    cells[i] = on ? 1 : 0;
  }
  return BinaryMask(raw.width, raw.height, std::move(cells));
}

void write_png(const std::filesystem::path& path, const GrayImage& img) {
  std::vector<std::uint8_t> buf(img.size());
  std::transform(img.pixels().begin(), img.pixels().end(), buf.begin(), quantize);
  write_gray8(path, img.width(), img.height(), buf);
}

void write_png(const std::filesystem::path& path, const BinaryMask& mask) {
  std::vector<std::uint8_t> buf(mask.size());
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = mask.at(i) ? 255 : 0;
  write_gray8(path, mask.width(), mask.height(), buf);
}

void write_pgm(const std::filesystem::path& path, const GrayImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
  for (double v : img.pixels()) out.put(static_cast<char>(quantize(v)));
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace tumorkit
