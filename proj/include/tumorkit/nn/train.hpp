#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "tumorkit/augment.hpp"
#include "tumorkit/image.hpp"
#include "tumorkit/metrics.hpp"
#include "tumorkit/nn/adam.hpp"
#include "tumorkit/nn/network.hpp"

namespace tumorkit::nn {

struct Example {
  std::string id;
  GrayImage image;
  double label = 0.0;  // 1 = tumor
};

struct TrainConfig {
  std::size_t epochs = 50;
  std::size_t batch_size = 16;
  std::uint64_t seed = 0;
  bool augment_enabled = true;
  AugmentConfig augment;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t eval_batch_size = 32;

  void validate() const;
  AdamState make_optimizer() const;
};

struct Evaluation {
  double loss = 0.0;
  double accuracy = 0.0;
  std::vector<double> probabilities;
};

// Stacks grayscale images into an NHWC batch; gray is replicated when the
// network expects more than one channel.
Tensor make_batch(std::span<const GrayImage* const> images, const InputShape& input);

// Inference-mode loss and accuracy, summed per sample in example order.
Evaluation evaluate(Network& net, std::span<const Example> examples, std::size_t batch_size = 32);

using EpochCallback = std::function<void(std::size_t epoch, const EpochMetrics&)>;

// Each epoch: seeded shuffle, per-sample augmentation with streams derived
// from (augment seed, epoch, sample id), forward/backward/Adam per batch, then
// inference-mode evaluation of the clean train and test sets. on_epoch gets
// 1-based epoch numbers.
TrainReport train(Network& net, AdamState& optimizer, std::span<const Example> train_set,
                  std::span<const Example> test_set, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

}  // namespace tumorkit::nn
