#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>

#include "tumorkit/dataset.hpp"
#include "tumorkit/image.hpp"
#include "tumorkit/random.hpp"

namespace tumorkit::pipeline {

struct SynthConfig {
  std::size_t count = 200;  // even, >= 2; half positives
  std::size_t size = 64;    // square side in pixels, >= 16
  std::uint64_t seed = 0;
  ClassLabel positive_label = ClassLabel::Glioma;

  void validate() const;
};

struct SynthSample {
  GrayImage image;
  BinaryMask mask;  // empty for negatives
};

// Dark surround, a textured mid-gray head ellipse and, for positives, a
// bright rotated tumor ellipse inside it.
SynthSample synth_sample(std::size_t size, bool positive, Rng& rng);

// Writes images/<id>.png, masks/<id>.png (positives only) and manifest.csv
// under `dir`. Sample i draws from derive_seed(seed, "synth", i); ids are
// pos_NNNN / neg_NNNN, alternating positive and negative.
DatasetManifest write_synth_corpus(const std::filesystem::path& dir, const SynthConfig& cfg);

}  // namespace tumorkit::pipeline
