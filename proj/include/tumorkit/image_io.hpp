#pragma once

#include <filesystem>

#include "tumorkit/image.hpp"

namespace tumorkit {

// Decodes 8/16-bit grayscale or RGB PNG, or binary PGM (P5). The format is
// sniffed from the file signature. Intensities are divided by the format's
// maximum value; RGB input is converted with to_grayscale.
GrayImage read_image(const std::filesystem::path& path);

// Any nonzero sample is tumor.
BinaryMask read_mask(const std::filesystem::path& path);

// 8-bit grayscale PNG; values are clamped to [0,1] and rounded to 1/255.
void write_png(const std::filesystem::path& path, const GrayImage& img);
void write_png(const std::filesystem::path& path, const BinaryMask& mask);

// Binary PGM with maxval 255.
void write_pgm(const std::filesystem::path& path, const GrayImage& img);

}  // namespace tumorkit
