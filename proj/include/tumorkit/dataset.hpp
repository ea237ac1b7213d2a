#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tumorkit/image.hpp"

namespace tumorkit {

// Negative marks synthetic no-tumor samples; the three tumor classes come
// from the MRI corpus.
enum class ClassLabel { Meningioma, Glioma, Pituitary, Negative };

// Case-insensitive; throws InvalidArgument on anything else.
ClassLabel parse_label(std::string_view text);
std::string_view label_name(ClassLabel label);
// 1 for tumor classes, 0 for Negative.
inline double binary_target(ClassLabel label) { return label == ClassLabel::Negative ? 0.0 : 1.0; }

struct ManifestEntry {
  std::string id;
  std::filesystem::path image;
  std::optional<std::filesystem::path> mask;
  ClassLabel label = ClassLabel::Negative;
  std::string patient;
};

struct DatasetManifest {
  std::filesystem::path root;  // relative image paths resolve against this
  std::vector<ManifestEntry> entries;

  const ManifestEntry& find(std::string_view id) const;
  bool contains(std::string_view id) const;
  std::vector<std::string> ids() const;
};

struct LabeledSample {
  std::string id;
  GrayImage image;
  std::optional<BinaryMask> mask;
  ClassLabel label = ClassLabel::Negative;
  std::string patient;
};

struct SplitSpec {
  double train_fraction = 0.7;
  std::uint64_t seed = 0;
  bool stratify_by_label = true;

  void validate() const;
};

struct Split {
  std::vector<std::string> train;
  std::vector<std::string> test;
};

inline constexpr std::string_view kManifestHeader = "id,image,mask,label,patient";

// Parses the CSV manifest and checks that every referenced file exists.
// Pixel data is not read.
DatasetManifest load_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);

LabeledSample load_sample(const DatasetManifest& manifest, std::string_view id);

// Per stratum, a seeded shuffle puts floor(n * fraction + 1/2) ids in train.
// Both lists keep manifest order.
Split split(const DatasetManifest& manifest, const SplitSpec& spec);

}  // namespace tumorkit
