#include "tumorkit/nn/train.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "tumorkit/error.hpp"
#include "tumorkit/random.hpp"

namespace tumorkit::nn {

void TrainConfig::validate() const {
  if (epochs < 1) throw InvalidArgument("train: epochs must be >= 1");
  if (batch_size < 1) throw InvalidArgument("train: batch_size must be >= 1");
  if (eval_batch_size < 1) throw InvalidArgument("train: eval_batch_size must be >= 1");
  augment.validate();
  make_optimizer().validate();
}

AdamState TrainConfig::make_optimizer() const {
  AdamState s;
  s.learning_rate = learning_rate;
  s.beta1 = beta1;
  s.beta2 = beta2;
  s.epsilon = epsilon;
  return s;
}

Tensor make_batch(std::span<const GrayImage* const> images, const InputShape& input) {
  Tensor batch({images.size(), input.height, input.width, input.channels});
  double* out = batch.data();
  for (const GrayImage* img : images) {
    if (img->width() != input.width || img->height() != input.height) {
      throw ShapeError("image is " + std::to_string(img->width()) + "x" +
                       std::to_string(img->height()) + ", network expects " +
                       std::to_string(input.width) + "x" + std::to_string(input.height));
    }
    for (double v : img->pixels()) {
      for (std::size_t c = 0; c < input.channels; ++c) *out++ = v;
    }
  }
  return batch;
}

Evaluation evaluate(Network& net, std::span<const Example> examples, std::size_t batch_size) {
  if (examples.empty()) throw InvalidArgument("evaluate: empty dataset");
  Evaluation ev;
  std::vector<double> labels;
  double loss_sum = 0.0;
  for (std::size_t start = 0; start < examples.size(); start += batch_size) {
    const std::size_t end = std::min(examples.size(), start + batch_size);
    std::vector<const GrayImage*> imgs;
    Tensor y({end - start});
    for (std::size_t i = start; i < end; ++i) {
      imgs.push_back(&examples[i].image);
      y[i - start] = examples[i].label;
      labels.push_back(examples[i].label);
    }
    const Tensor p = net.forward(make_batch(imgs, net.config().input), Mode::Infer);
    for (std::size_t i = 0; i < p.size(); ++i) {
      loss_sum += bce_loss(Tensor({1}, {p[i]}), Tensor({1}, {y[i]}));
      ev.probabilities.push_back(p[i]);
    }
  }
  ev.loss = loss_sum / static_cast<double>(examples.size());
  ev.accuracy = binary_accuracy(ev.probabilities, labels);
  return ev;
}

TrainReport train(Network& net, AdamState& optimizer, std::span<const Example> train_set,
                  std::span<const Example> test_set, const TrainConfig& cfg,
                  const EpochCallback& on_epoch) {
  cfg.validate();
  if (train_set.empty()) throw InvalidArgument("train: empty training set");
  TrainReport report;
  std::vector<std::size_t> order(train_set.size());
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng = make_rng(derive_seed(cfg.seed, "shuffle", epoch));
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      std::vector<GrayImage> augmented;
      augmented.reserve(end - start);
      std::vector<double> labels;
      for (std::size_t i = start; i < end; ++i) {
        const Example& ex = train_set[order[i]];
        if (cfg.augment_enabled) {
          Rng stream = make_rng(derive_seed(cfg.augment.seed, "augment", epoch, ex.id));
          augmented.push_back(augment_apply(ex.image, cfg.augment, stream));
        } else {
          augmented.push_back(ex.image);
        }
        labels.push_back(ex.label);
      }
      std::vector<const GrayImage*> ptrs;
      for (const auto& img : augmented) ptrs.push_back(&img);
      net.zero_grad();
      net.forward(make_batch(ptrs, net.config().input), Mode::Train);
      net.backward(labels);
      adam_step(net.params(), optimizer);
    }

    const Evaluation tr = evaluate(net, train_set, cfg.eval_batch_size);
    EpochMetrics m{tr.loss, 0.0, tr.accuracy, 0.0};
    if (!test_set.empty()) {
      const Evaluation te = evaluate(net, test_set, cfg.eval_batch_size);
      m.test_loss = te.loss;
      m.test_acc = te.accuracy;
    }
    report.push(m);
    if (on_epoch) on_epoch(epoch, m);
  }
  return report;
}

}  // namespace tumorkit::nn
