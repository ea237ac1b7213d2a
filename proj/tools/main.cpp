#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "tumorkit/dataset.hpp"
#include "tumorkit/error.hpp"
#include "tumorkit/pipeline/commands.hpp"
#include "tumorkit/pipeline/config.hpp"

namespace tk = tumorkit;
namespace tp = tumorkit::pipeline;

namespace {

constexpr int kUsageError = 2;

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string manifest;
};

tp::PipelineConfig resolve(const Globals& g) {
  tp::PipelineConfig cfg = g.config.empty() ? tp::default_config() : tp::load_config(g.config);
  if (g.seed) cfg.apply_seed(*g.seed);
  if (!g.out.empty()) cfg.output_dir = g.out;
  if (!g.manifest.empty()) cfg.manifest = g.manifest;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tumorkit: MRI tumor segmentation and classification toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--config", g.config, "TOML pipeline configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "top-level seed (overrides the config)");
  app.add_option("--out", g.out, "output directory (overrides the config)");
  app.add_option("--manifest", g.manifest, "dataset manifest (overrides the config)");

  auto* synth = app.add_subcommand("synth", "generate a synthetic blob dataset and manifest");
  tp::SynthConfig synth_cfg;
  std::string synth_label = "glioma";
  synth->add_option("--count", synth_cfg.count, "number of samples (even)")->capture_default_str();
  synth->add_option("--size", synth_cfg.size, "image side in pixels")->capture_default_str();
  synth->add_option("--label", synth_label, "label of the positive samples")->capture_default_str();

  auto* preprocess = app.add_subcommand("preprocess", "write <id>_pre.png for each id");
  std::vector<std::string> ids;
  bool all_ids = false;
  preprocess->add_option("ids", ids, "sample ids");
  preprocess->add_flag("--all", all_ids, "every sample in the manifest");

  auto* elbow = app.add_subcommand("elbow", "WCSS versus k with the chosen elbow");
  std::optional<std::size_t> k_max;
  std::optional<std::string> elbow_mode;
  elbow->add_option("--k-max", k_max, "largest k to scan (>= 3)");
  elbow->add_option("--mode", elbow_mode, "pooled or per-image")
      ->check(CLI::IsMember({"pooled", "per-image"}));

  auto* segment = app.add_subcommand("segment", "predicted masks and IoU report");

  auto* train = app.add_subcommand("train", "train the classifier and write reports");
  std::optional<std::string> train_on;
  std::optional<std::size_t> epochs;
  train->add_option("--train-on", train_on, "raw, preprocessed or masked")
      ->check(CLI::IsMember({"raw", "preprocessed", "masked"}));
  train->add_option("--epochs", epochs, "number of epochs");

  auto* evaluate = app.add_subcommand("evaluate", "loss and accuracy of a checkpoint");
  std::string checkpoint;
  std::string which = "test";
  evaluate->add_option("--checkpoint", checkpoint, "checkpoint written by train")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate->add_option("--split", which, "train, test or all")
      ->check(CLI::IsMember({"train", "test", "all"}))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (synth->parsed()) {
      synth_cfg.positive_label = tk::parse_label(synth_label);
      synth_cfg.seed = g.seed.value_or(0);
      return tp::cmd_synth(synth_cfg, g.out.empty() ? "synth" : g.out, std::cout);
    }
    tp::PipelineConfig cfg = resolve(g);
    if (preprocess->parsed()) {
      if (all_ids) ids = tk::load_manifest(cfg.manifest).ids();
      return tp::cmd_preprocess(cfg, ids, std::cout, std::cerr);
    }
    if (elbow->parsed()) {
      if (k_max) cfg.segment.k_max = *k_max;
      if (elbow_mode) {
        cfg.segment.mode = *elbow_mode == "pooled" ? tp::ElbowMode::Pooled : tp::ElbowMode::PerImage;
      }
      return tp::cmd_elbow(cfg, std::cout, std::cerr);
    }
    if (segment->parsed()) return tp::cmd_segment(cfg, std::cout, std::cerr);
    if (train->parsed()) {
      if (train_on) cfg.train_on = tp::parse_train_input(*train_on);
      if (epochs) cfg.train.epochs = *epochs;
      cfg.validate();
      return tp::cmd_train(cfg, std::cout, std::cerr);
    }
    if (evaluate->parsed()) return tp::cmd_evaluate(cfg, checkpoint, which, std::cout, std::cerr);
  } catch (const tk::InvalidArgument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kUsageError;
}
