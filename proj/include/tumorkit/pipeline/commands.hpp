#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tumorkit/dataset.hpp"
#include "tumorkit/metrics.hpp"
#include "tumorkit/nn/train.hpp"
#include "tumorkit/pipeline/config.hpp"
#include "tumorkit/pipeline/synth.hpp"
#include "tumorkit/segment.hpp"

namespace tumorkit::pipeline {

inline constexpr std::string_view kElbowCsv = "elbow.csv";
inline constexpr std::string_view kElbowSvg = "elbow.svg";
inline constexpr std::string_view kElbowPerImageCsv = "elbow_per_image.csv";
inline constexpr std::string_view kIoUReportCsv = "iou_report.csv";
inline constexpr std::string_view kTrainReportCsv = "train_report.csv";
inline constexpr std::string_view kAccuracySvg = "accuracy.svg";
inline constexpr std::string_view kLossSvg = "loss.svg";
inline constexpr std::string_view kCheckpoint = "checkpoint.json";

struct SegmentResult {
  GrayImage preprocessed;
  ClusterModel model;
  BinaryMask mask;
};

// preprocess -> kmeans(k) -> brightest cluster, seeded per sample id.
SegmentResult segment_sample(const LabeledSample& sample, const PipelineConfig& cfg);

// The image fed to the network for cfg.train_on, resized to the network input.
GrayImage training_input(const LabeledSample& sample, const PipelineConfig& cfg);

std::vector<nn::Example> build_examples(const DatasetManifest& manifest,
                                        std::span<const std::string> ids,
                                        const PipelineConfig& cfg);

// Split named "train", "test" or "all" of the configured manifest.
std::vector<std::string> split_ids(const DatasetManifest& manifest, const PipelineConfig& cfg,
                                   std::string_view which);

// Each command writes under cfg.output_dir, reports progress on `out` and
// warnings on `err`, and returns the process exit status. Fatal errors throw.

int cmd_synth(const SynthConfig& synth, const std::filesystem::path& dir, std::ostream& out);

// One `<id>_pre.png` per id. Per-file failures are reported and the
// remaining ids still run; the status is nonzero if any failed.
int cmd_preprocess(const PipelineConfig& cfg, std::span<const std::string> ids, std::ostream& out,
                   std::ostream& err);

// elbow.csv and elbow.svg; per-image mode also writes elbow_per_image.csv
// and reports the most frequent choice.
int cmd_elbow(const PipelineConfig& cfg, std::ostream& out, std::ostream& err);

// `<id>_mask.png` per sample with a ground-truth mask, iou_report.csv, and a
// per-class summary. Samples without masks are skipped with a warning.
int cmd_segment(const PipelineConfig& cfg, std::ostream& out, std::ostream& err);

// train_report.csv (flushed each epoch), accuracy.svg, loss.svg and
// checkpoint.json.
int cmd_train(const PipelineConfig& cfg, std::ostream& out, std::ostream& err);

// Prints loss and accuracy of the checkpoint on the named split.
int cmd_evaluate(const PipelineConfig& cfg, const std::filesystem::path& checkpoint,
                 std::string_view which, std::ostream& out, std::ostream& err);

}  // namespace tumorkit::pipeline
