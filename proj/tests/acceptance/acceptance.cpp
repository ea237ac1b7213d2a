// Prints one PASS/FAIL line per acceptance criterion; exits nonzero if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

#include "support/oracles.hpp"
#include "support/tempdir.hpp"
#include "tumorkit/metrics.hpp"
#include "tumorkit/nn/checkpoint.hpp"
#include "tumorkit/nn/layers.hpp"
#include "tumorkit/pipeline/commands.hpp"

using namespace tumorkit;
using namespace tumorkit::pipeline;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const char* name, double limit_s, const std::function<Outcome()>& body) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  if (limit_s > 0 && secs >= limit_s) {
    o.pass = false;
    o.detail += "; runtime over " + std::to_string(static_cast<int>(limit_s)) + " s";
  }
  if (!o.pass) ++failures;
  std::printf("[%s] %d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Outcome filter_oracles() {
  Rng rng(101);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const GrayImage img = tktest::random_image(16, 16, rng);
    worst = std::max(worst, tktest::max_abs_diff(box_smooth(img, 7), tktest::box_oracle(img, 7)));
    worst = std::max(worst, tktest::max_abs_diff(gaussian_smooth(img, 5, 1.2),
                                                 tktest::gaussian_oracle(img, 5, 1.2)));
    BilateralParams bp;
    worst = std::max(worst, tktest::max_abs_diff(bilateral_filter(img, bp),
                                                 tktest::bilateral_oracle(img, bp.radius, bp.sigma_space,
                                                                          bp.sigma_range)));
  }
  return {worst <= 1e-10, "max |filter - oracle| = " + fmt("%.3g", worst) + " over 60 images"};
}

Outcome kmeans_optimality() {
  Rng rng(202);
  std::uniform_int_distribution<std::size_t> npts(3, 8), nk(1, 3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_gap = 0.0;
  std::size_t increases = 0, runs = 0;
  for (int inst = 0; inst < 50; ++inst) {
    std::vector<double> pts(npts(rng));
    for (double& p : pts) p = u(rng);
    KMeansConfig cfg;
    cfg.k = std::min(nk(rng), pts.size());
    cfg.restarts = 10;
    cfg.seed = derive_seed(202, "instance", static_cast<std::uint64_t>(inst));
    const ClusterModel best = kmeans(pts, cfg);
    worst_gap = std::max(worst_gap, std::abs(best.wcss - tktest::exhaustive_wcss(pts, cfg.k)));
    for (std::size_t r = 0; r < cfg.restarts; ++r) {
      const ClusterModel m = kmeans_restart(pts, cfg, r);
      ++runs;
      for (std::size_t i = 1; i < m.wcss_history.size(); ++i)
        if (m.wcss_history[i] > m.wcss_history[i - 1]) ++increases;
    }
  }
  return {worst_gap <= 1e-9 && increases == 0,
          "max |best-of-10 - exhaustive| = " + fmt("%.3g", worst_gap) + ", WCSS increases in " +
              std::to_string(runs) + " runs: " + std::to_string(increases)};
}

Outcome elbow_bands() {
  std::size_t hits = 0;
  for (std::uint64_t t = 0; t < 100; ++t) {
    Rng rng(derive_seed(303, "trial", t));
    std::uniform_real_distribution<double> lo(0.0, 0.1);
    const double base = lo(rng);
    const double levels[] = {base, base + 0.3, base + 0.6};
    const GrayImage img = tktest::band_image(32, 32, levels, 0.05, rng);
    KMeansConfig cfg;
    cfg.seed = derive_seed(303, "kmeans", t);
    if (elbow_scan(img, 8, cfg).chosen_k == 3) ++hits;
  }
  return {hits >= 95, "k = 3 chosen in " + std::to_string(hits) + "/100 trials (gap 0.3, sigma 0.05)"};
}

Outcome iou_contract() {
  Rng rng(404);
  std::uniform_int_distribution<std::size_t> side(1, 32);
  std::uniform_real_distribution<double> dens(0.0, 1.0);
  std::size_t mismatches = 0, asym = 0, ident = 0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t w = side(rng), h = side(rng);
    const BinaryMask a = tktest::random_mask(w, h, dens(rng), rng);
    const BinaryMask b = tktest::random_mask(w, h, dens(rng), rng);
    if (iou(a, b) != tktest::iou_oracle(a, b)) ++mismatches;
    if (iou(a, b) != iou(b, a)) ++asym;
    const double self = iou(a, a);
    if (a.count() > 0 ? self != 1.0 : self != 0.0) ++ident;
  }
  return {mismatches + asym + ident == 0, "oracle mismatches " + std::to_string(mismatches) +
                                              ", asymmetric " + std::to_string(asym) +
                                              ", identity failures " + std::to_string(ident) + " of 100"};
}

Outcome gradient_checks() {
  using namespace tumorkit::nn;
  double worst_layer = 0.0, worst_net = 0.0;
  std::string where;
  std::size_t checked = 0;
  auto note = [&](const tktest::GradCheck& g, double& worst, const std::string& what) {
    checked += g.checked;
    if (g.max_rel_error > worst) {
      worst = g.max_rel_error;
      if (worst >= 1e-3) where += " [" + what + ": " + g.worst + "]";
    }
  };
  for (std::uint64_t t = 0; t < 10; ++t) {
    Rng rng(derive_seed(505, "trial", t));
    using tktest::random_tensor;
    Conv2D conv(2, ConvSpec{3, 3, 1 + t % 2, 1});
    conv.initialize(rng);
    conv.bias = random_tensor({3}, rng);
    note(tktest::check_layer_gradients(conv, random_tensor({2, 6, 6, 2}, rng), 30, rng), worst_layer, "conv");
    BatchNorm bn(3, BatchNormSpec{});
    bn.gamma = random_tensor({3}, rng);
    bn.beta = random_tensor({3}, rng);
    note(tktest::check_layer_gradients(bn, random_tensor({3, 4, 4, 3}, rng), 30, rng), worst_layer, "batchnorm");
    ReLU relu_layer;
    note(tktest::check_layer_gradients(relu_layer, random_tensor({2, 4, 4, 2}, rng), 30, rng), worst_layer, "relu");
    MaxPool pool(MaxPoolSpec{2, 2});
    note(tktest::check_layer_gradients(pool, random_tensor({2, 6, 6, 2}, rng), 30, rng), worst_layer, "maxpool");
    GlobalAvgPool gap;
    note(tktest::check_layer_gradients(gap, random_tensor({2, 3, 3, 4}, rng), 30, rng), worst_layer, "avgpool");
    Flatten flat;
    note(tktest::check_layer_gradients(flat, random_tensor({2, 2, 2, 3}, rng), 30, rng), worst_layer, "flatten");
    for (Activation a : {Activation::None, Activation::Relu, Activation::Sigmoid}) {
      Dense d(5, DenseSpec{3, a});
      d.initialize(rng);
      d.bias = random_tensor({3}, rng);
      note(tktest::check_layer_gradients(d, random_tensor({3, 5}, rng), 30, rng), worst_layer, "dense");
    }
    ResidualBlock block({6, 6, 2}, basic_block(4, 2, true));
    block.initialize(rng);
    note(tktest::check_layer_gradients(block, random_tensor({2, 6, 6, 2}, rng), 30, rng), worst_layer, "residual");

    Network net(resnet_mini({8, 8, 1}, derive_seed(505, "net", t)));
    note(tktest::check_network_gradients(net, random_tensor({2, 8, 8, 1}, rng), {1.0, 0.0}, 20, rng, 1e-5),
         worst_net, "resnet-mini");
  }
  return {worst_layer < 1e-3 && worst_net < 1e-3,
          "max rel. error per layer " + fmt("%.2e", worst_layer) + " (step 1e-4), resnet-mini " +
              fmt("%.2e", worst_net) + " (step 1e-5), " + std::to_string(checked) + " coordinates" + where};
}

struct Corpus {
  tktest::TempDir dir;
  PipelineConfig cfg;

  Corpus() {
    SynthConfig sc;
    sc.count = 200;
    sc.size = 64;
    sc.seed = 7;
    write_synth_corpus(dir / "data", sc);
    cfg = default_config();
    cfg.apply_seed(7);
    cfg.manifest = dir / "data" / "manifest.csv";
  }

  std::filesystem::path out(const std::string& run) const { return dir / run; }
};

Outcome segmentation(const Corpus& c, const std::string& run) {
  PipelineConfig cfg = c.cfg;
  cfg.output_dir = c.out(run);
  std::ostringstream out, err;
  cmd_segment(cfg, out, err);
  const IoUReport r = read_iou_report(cfg.output_dir / std::string(kIoUReportCsv));
  std::size_t detected = 0;
  double sum = 0.0, sum_detected = 0.0;
  for (const auto& row : r.per_image) {
    sum += row.iou;
    if (row.detected) {
      sum_detected += row.iou;
      ++detected;
    }
  }
  const double n = static_cast<double>(r.per_image.size());
  const double mean = sum / n, rate = detected / n;
  return {r.per_image.size() == 100 && mean >= 0.8 && rate >= 0.95,
          std::to_string(r.per_image.size()) + " positives, mean IoU " + fmt("%.4f", mean) +
              " (over detected " + fmt("%.4f", detected ? sum_detected / detected : 0.0) +
              "), detection rate " + fmt("%.3f", rate)};
}

Outcome training(const Corpus& c, const std::string& run) {
  PipelineConfig cfg = c.cfg;
  cfg.output_dir = c.out(run);
  std::ostringstream out, err;
  cmd_train(cfg, out, err);
  const TrainReport r = read_train_report(cfg.output_dir / std::string(kTrainReportCsv));
  const bool ok = r.epochs() == 50 && r.train_acc.back() >= 0.9 && r.test_acc.back() >= 0.85 &&
                  r.train_loss.back() < r.train_loss.front();
  return {ok, std::to_string(r.epochs()) + " epochs, final train acc " + fmt("%.4f", r.train_acc.back()) +
                  ", test acc " + fmt("%.4f", r.test_acc.back()) + ", train loss " +
                  fmt("%.4g", r.train_loss.front()) + " -> " + fmt("%.4g", r.train_loss.back())};
}

bool same_bytes(const std::filesystem::path& a, const std::filesystem::path& b) {
  return std::filesystem::exists(a) && tktest::read_text(a) == tktest::read_text(b);
}

Outcome determinism(const Corpus& c) {
  segmentation(c, "run2");
  training(c, "run2");
  const bool seg = same_bytes(c.out("run1") / std::string(kIoUReportCsv), c.out("run2") / std::string(kIoUReportCsv));
  const bool tr = same_bytes(c.out("run1") / std::string(kTrainReportCsv),
                             c.out("run2") / std::string(kTrainReportCsv));
  return {seg && tr, std::string("iou_report.csv ") + (seg ? "identical" : "DIFFERS") + ", train_report.csv " +
                         (tr ? "identical" : "DIFFERS")};
}

Outcome checkpoint_roundtrip(const Corpus& c) {
  PipelineConfig cfg = c.cfg;
  cfg.output_dir = c.out("run1");
  const TrainReport rep = read_train_report(cfg.output_dir / std::string(kTrainReportCsv));
  const DatasetManifest m = load_manifest(cfg.manifest);

  nn::Network net(cfg.network);
  nn::restore(nn::read_checkpoint(cfg.output_dir / std::string(kCheckpoint)), net);
  nn::save_checkpoint(c.out("resaved.json"), net, cfg.train.make_optimizer());
  nn::Network again(cfg.network);
  nn::restore(nn::read_checkpoint(c.out("resaved.json")), again);

  double worst = 0.0;
  for (const char* which : {"train", "test"}) {
    const auto ex = build_examples(m, split_ids(m, cfg, which), cfg);
    const nn::Evaluation a = nn::evaluate(net, ex), b = nn::evaluate(again, ex);
    const bool train = std::string(which) == "train";
    worst = std::max({worst, std::abs(a.loss - (train ? rep.train_loss.back() : rep.test_loss.back())),
                      std::abs(a.accuracy - (train ? rep.train_acc.back() : rep.test_acc.back())),
                      std::abs(a.loss - b.loss), std::abs(a.accuracy - b.accuracy)});
  }
  return {worst <= 1e-9, "max |restored - recorded| = " + fmt("%.3g", worst)};
}

}  // namespace

int main() {
  report(1, "filter oracles", 5, filter_oracles);
  report(2, "k-means optimality", 0, kmeans_optimality);
  report(3, "elbow on three bands", 0, elbow_bands);
  report(4, "IoU contract", 0, iou_contract);
  report(5, "gradient check", 60, gradient_checks);
  Corpus corpus;
  report(6, "segmentation quality", 60, [&] { return segmentation(corpus, "run1"); });
  report(7, "desk-scale training", 600, [&] { return training(corpus, "run1"); });
  report(8, "determinism", 0, [&] { return determinism(corpus); });
  report(9, "checkpoint round-trip", 0, [&] { return checkpoint_roundtrip(corpus); });
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
