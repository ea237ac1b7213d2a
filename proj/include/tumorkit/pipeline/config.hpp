#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "tumorkit/augment.hpp"
#include "tumorkit/dataset.hpp"
#include "tumorkit/imgproc.hpp"
#include "tumorkit/nn/config.hpp"
#include "tumorkit/nn/train.hpp"
#include "tumorkit/segment.hpp"

namespace tumorkit::pipeline {

// Which image the classifier sees.
enum class TrainInput { Raw, Preprocessed, Masked };
TrainInput parse_train_input(std::string_view name);
std::string_view train_input_name(TrainInput t);

enum class ElbowMode { Pooled, PerImage };

struct SegmentSection {
  KMeansConfig kmeans;  // kmeans.seed is replaced per image, see kmeans_for
  std::size_t k_max = 8;
  ElbowRule rule = ElbowRule::LogSecondDifference;
  ElbowMode mode = ElbowMode::Pooled;
  double detect_threshold = kDefaultDetectThreshold;
};

struct PipelineConfig {
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "out";

  std::filesystem::path manifest;
  SplitSpec split;  // split.seed is derived from `seed`

  PreprocessConfig preprocess = PreprocessConfig::defaults();
  SegmentSection segment;
  nn::NetworkConfig network = nn::resnet_mini();
  nn::TrainConfig train;  // carries the [augment] section too
  TrainInput train_on = TrainInput::Masked;

  // Re-derives every module seed from `seed`:
  //   split.seed    = derive_seed(seed, "dataset", "split")
  //   network.seed  = derive_seed(seed, "nn", "network")
  //   train.seed    = derive_seed(seed, "train", "shuffle")
  //   train.augment.seed = derive_seed(seed, "augment", "stream")
  //   kmeans.seed   = derive_seed(seed, "segment", "kmeans"), then per sample id
  void apply_seed(std::uint64_t top_seed);

  // Per-image k-means configuration with the seed fanned out by sample id.
  KMeansConfig kmeans_for(std::string_view sample_id) const;

  void validate() const;
};

// Defaults with apply_seed(0).
PipelineConfig default_config();

// TOML layout (every key optional):
//   seed = 0
//   out = "out"
//   [dataset]    manifest, train_fraction, stratify
//   [preprocess] steps = ["smooth", "bilateral"], smooth_kind = "box"|"gaussian",
//                smooth_kernel, gaussian_sigma, bilateral_radius,
//                bilateral_sigma_space, bilateral_sigma_range, resize_width,
//                resize_height
//   [segment]    k, restarts, max_iters, tol, k_max, elbow_rule = "log"|"linear",
//                elbow_mode = "pooled"|"per-image", detect_threshold
//   [augment]    enabled, rescale, shear_range, zoom_min, zoom_max, hflip_prob
//   [network]    preset = "resnet-mini"|"resnet50"|"custom", input_height,
//                input_width, input_channels, [[network.layers]] (custom)
//   [train]      epochs, batch_size, learning_rate, beta1, beta2, epsilon,
//                train_on = "raw"|"preprocessed"|"masked"
// Relative paths resolve against `base_dir`.
PipelineConfig parse_config(std::string_view toml_text,
                            const std::filesystem::path& base_dir = {});
PipelineConfig load_config(const std::filesystem::path& path);

}  // namespace tumorkit::pipeline
