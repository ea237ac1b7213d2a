#include "tumorkit/pipeline/commands.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>

#include "tumorkit/csv.hpp"
#include "tumorkit/error.hpp"
#include "tumorkit/image_io.hpp"
#include "tumorkit/imgproc.hpp"
#include "tumorkit/nn/checkpoint.hpp"
#include "tumorkit/pipeline/svg.hpp"

namespace tumorkit::pipeline {
namespace {

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

DatasetManifest manifest_of(const PipelineConfig& cfg) {
  if (cfg.manifest.empty()) throw InvalidArgument("no dataset manifest configured");
  if (!std::filesystem::exists(cfg.manifest)) {
    throw IoError("manifest not found: " + cfg.manifest.string());
  }
  return load_manifest(cfg.manifest);
}

std::vector<double> iota_from_one(std::size_t n) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<double>(i + 1);
  return x;
}

}  // namespace

SegmentResult segment_sample(const LabeledSample& sample, const PipelineConfig& cfg) {
  SegmentResult r;
  r.preprocessed = preprocess_pipeline(sample.image, cfg.preprocess);
  r.model = kmeans(r.preprocessed, cfg.kmeans_for(sample.id));
  r.mask = extract_tumor_mask(r.preprocessed, r.model);
  return r;
}

GrayImage training_input(const LabeledSample& sample, const PipelineConfig& cfg) {
  GrayImage img;
  switch (cfg.train_on) {
    case TrainInput::Raw: img = sample.image; break;
    case TrainInput::Preprocessed: img = preprocess_pipeline(sample.image, cfg.preprocess); break;
    case TrainInput::Masked: {
      SegmentResult r = segment_sample(sample, cfg);
      img = apply_mask(r.preprocessed, r.mask);
      break;
    }
  }
  const auto& in = cfg.network.input;
  if (img.width() != in.width || img.height() != in.height) img = resize(img, in.width, in.height);
  return img;
}

std::vector<nn::Example> build_examples(const DatasetManifest& manifest,
                                        std::span<const std::string> ids,
                                        const PipelineConfig& cfg) {
  std::vector<nn::Example> out;
  out.reserve(ids.size());
  for (const std::string& id : ids) {
    const LabeledSample s = load_sample(manifest, id);
    out.push_back({s.id, training_input(s, cfg), binary_target(s.label)});
  }
  return out;
}

std::vector<std::string> split_ids(const DatasetManifest& manifest, const PipelineConfig& cfg,
                                   std::string_view which) {
  if (which == "all") return manifest.ids();
  Split sp = split(manifest, cfg.split);
  if (which == "train") return sp.train;
  if (which == "test") return sp.test;
  throw InvalidArgument("unknown split '" + std::string(which) + "' (expected train, test or all)");
}

int cmd_synth(const SynthConfig& synth, const std::filesystem::path& dir, std::ostream& out) {
  const DatasetManifest m = write_synth_corpus(dir, synth);
  out << "wrote " << m.entries.size() << " samples to " << (dir / "manifest.csv").string() << '\n';
  return 0;
}

int cmd_preprocess(const PipelineConfig& cfg, std::span<const std::string> ids, std::ostream& out,
                   std::ostream& err) {
  if (ids.empty()) return 0;
  const DatasetManifest manifest = manifest_of(cfg);
  ensure_dir(cfg.output_dir);
  std::size_t failures = 0;
  for (const std::string& id : ids) {
    try {
      const LabeledSample s = load_sample(manifest, id);
      const auto path = cfg.output_dir / (id + "_pre.png");
      write_png(path, preprocess_pipeline(s.image, cfg.preprocess));
      out << path.string() << '\n';
    } catch (const Error& e) {
      err << "error: " << id << ": " << e.what() << '\n';
      ++failures;
    }
  }
  return failures == 0 ? 0 : 1;
}

int cmd_elbow(const PipelineConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.segment.k_max < 3) throw InvalidArgument("elbow scan needs k_max >= 3");
  const DatasetManifest manifest = manifest_of(cfg);
  if (manifest.entries.empty()) throw InvalidArgument("elbow: manifest has no samples");
  ensure_dir(cfg.output_dir);

  ElbowResult result;
  std::string marker = "chosen k";
  if (cfg.segment.mode == ElbowMode::Pooled) {
    std::vector<double> points;
    for (const auto& e : manifest.entries) {
      const GrayImage pre = preprocess_pipeline(load_sample(manifest, e.id).image, cfg.preprocess);
      points.insert(points.end(), pre.pixels().begin(), pre.pixels().end());
    }
    result = elbow_scan(points, cfg.segment.k_max, cfg.segment.kmeans, cfg.segment.rule);
  } else {
    std::vector<double> mean(cfg.segment.k_max, 0.0);
    std::map<std::size_t, std::size_t> votes;
    std::ofstream per(cfg.output_dir / kElbowPerImageCsv);
    if (!per) throw IoError("cannot write " + (cfg.output_dir / kElbowPerImageCsv).string());
    per << "id,chosen_k\n";
    for (const auto& e : manifest.entries) {
      const GrayImage pre = preprocess_pipeline(load_sample(manifest, e.id).image, cfg.preprocess);
      const ElbowResult r = elbow_scan(pre, cfg.segment.k_max, cfg.kmeans_for(e.id), cfg.segment.rule);
      for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += r.wcss_curve[i];
      ++votes[r.chosen_k];
      per << csv::join({e.id, std::to_string(r.chosen_k)}) << '\n';
    }
    for (double& v : mean) v /= static_cast<double>(manifest.entries.size());
    result.wcss_curve = mean;
    result.chosen_k = std::max_element(votes.begin(), votes.end(), [](const auto& a, const auto& b) {
                        return a.second < b.second;
                      })->first;
    out << "per-image choices:";
    for (const auto& [k, n] : votes) out << " k=" << k << ":" << n;
    out << '\n';
    marker = "most frequent k";
    if (!per) err << "warning: incomplete " << kElbowPerImageCsv << '\n';
  }

  write_elbow_csv(cfg.output_dir / kElbowCsv, result);
  LineChart chart;
  chart.title = "Elbow method";
  chart.x_label = "number of clusters k";
  chart.y_label = cfg.segment.mode == ElbowMode::Pooled ? "WCSS" : "mean WCSS";
  chart.series.push_back({"WCSS", iota_from_one(result.wcss_curve.size()), result.wcss_curve});
  chart.marker_x = static_cast<double>(result.chosen_k);
  chart.marker_label = marker + " = " + std::to_string(result.chosen_k);
  write_svg(cfg.output_dir / kElbowSvg, chart);
  out << "chosen k: " << result.chosen_k << '\n';
  return 0;
}

int cmd_segment(const PipelineConfig& cfg, std::ostream& out, std::ostream& err) {
  const DatasetManifest manifest = manifest_of(cfg);
  ensure_dir(cfg.output_dir);
  std::vector<OverlapSample> samples;
  std::size_t skipped = 0;
  for (const auto& e : manifest.entries) {
    if (!e.mask) {
      err << "warning: " << e.id << ": no ground-truth mask, skipped\n";
      ++skipped;
      continue;
    }
    LabeledSample s = load_sample(manifest, e.id);
    SegmentResult r = segment_sample(s, cfg);
    write_png(cfg.output_dir / (e.id + "_mask.png"), r.mask);
    samples.push_back({e.id, std::string(label_name(e.label)), std::move(r.mask), std::move(*s.mask)});
  }

  IoUReport report;
  if (!samples.empty()) report = overlap_report(samples, cfg.segment.detect_threshold);
  write_iou_report(cfg.output_dir / kIoUReportCsv, report);
  for (const auto& [label, c] : report.per_class) {
    out << label << ": mean IoU " << csv::format_double(c.mean_iou) << " over detected, detection rate "
        << csv::format_double(c.detection_rate) << " (" << c.detected << "/" << c.total << ")\n";
  }
  out << "segmented " << samples.size() << " samples, skipped " << skipped
      << " without masks\n";
  return 0;
}

int cmd_train(const PipelineConfig& cfg, std::ostream& out, std::ostream&) {
  const DatasetManifest manifest = manifest_of(cfg);
  const Split sp = split(manifest, cfg.split);
  if (sp.train.empty() || sp.test.empty()) {
    throw InvalidArgument("train: split must leave both partitions nonempty (train " +
                          std::to_string(sp.train.size()) + ", test " +
                          std::to_string(sp.test.size()) + ")");
  }
  ensure_dir(cfg.output_dir);
  const auto train_set = build_examples(manifest, sp.train, cfg);
  const auto test_set = build_examples(manifest, sp.test, cfg);

  nn::Network net(cfg.network);
  nn::AdamState opt = cfg.train.make_optimizer();
  const auto csv_path = cfg.output_dir / kTrainReportCsv;
  std::ofstream csv_out(csv_path, std::ios::binary);
  if (!csv_out) throw IoError("cannot write " + csv_path.string());
  csv_out << train_report_header() << '\n' << std::flush;

  out << "training on " << train_set.size() << " samples, testing on " << test_set.size() << " ("
      << train_input_name(cfg.train_on) << " input, " << net.parameter_count() << " parameters)\n";
  const TrainReport report =
      nn::train(net, opt, train_set, test_set, cfg.train, [&](std::size_t epoch, const EpochMetrics& m) {
        csv_out << train_report_row(epoch, m) << '\n' << std::flush;
        if (!csv_out) throw IoError("write failed for " + csv_path.string());
        out << "epoch " << epoch << "/" << cfg.train.epochs << " train_loss " << m.train_loss
            << " test_loss " << m.test_loss << " train_acc " << m.train_acc << " test_acc "
            << m.test_acc << '\n'
            << std::flush;
      });
  csv_out.close();

  const auto epochs = iota_from_one(report.epochs());
  LineChart acc{"Model accuracy", "epoch", "accuracy",
                {{"train", epochs, report.train_acc, "#1f77b4"},
                 {"test", epochs, report.test_acc, "#ff7f0e"}},
                std::nullopt, ""};
  LineChart loss{"Model loss", "epoch", "binary cross-entropy",
                 {{"train", epochs, report.train_loss, "#1f77b4"},
                  {"test", epochs, report.test_loss, "#ff7f0e"}},
                 std::nullopt, ""};
  write_svg(cfg.output_dir / kAccuracySvg, acc);
  write_svg(cfg.output_dir / kLossSvg, loss);
  nn::save_checkpoint(cfg.output_dir / kCheckpoint, net, opt);

  out << "peak train accuracy: "
      << csv::format_double(*std::max_element(report.train_acc.begin(), report.train_acc.end()))
      << '\n';
  out << "peak test accuracy: "
      << csv::format_double(*std::max_element(report.test_acc.begin(), report.test_acc.end()))
      << '\n';
  return 0;
}

int cmd_evaluate(const PipelineConfig& cfg, const std::filesystem::path& checkpoint,
                 std::string_view which, std::ostream& out, std::ostream&) {
  const nn::Checkpoint ckpt = nn::read_checkpoint(checkpoint);
  nn::Network net(cfg.network);
  nn::restore(ckpt, net);
  const DatasetManifest manifest = manifest_of(cfg);
  const auto ids = split_ids(manifest, cfg, which);
  if (ids.empty()) throw InvalidArgument("evaluate: split '" + std::string(which) + "' is empty");
  const auto examples = build_examples(manifest, ids, cfg);
  const nn::Evaluation ev = nn::evaluate(net, examples, cfg.train.eval_batch_size);
  out << "split: " << which << " (" << examples.size() << " samples)\n";
  out << "loss: " << csv::format_double(ev.loss) << '\n';
  out << "accuracy: " << csv::format_double(ev.accuracy) << '\n';
  return 0;
}

}  // namespace tumorkit::pipeline
