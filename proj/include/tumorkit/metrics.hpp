#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "tumorkit/image.hpp"

namespace tumorkit {

// |A ∩ B| / |A ∪ B|; 0 when both masks are empty.
double iou(const BinaryMask& predicted, const BinaryMask& truth);

struct OverlapSample {
  std::string id;
  std::string label;
  BinaryMask predicted;
  BinaryMask truth;
};

struct IoURow {
  std::string id;
  std::string label;
  double iou = 0.0;
  bool detected = false;
  friend bool operator==(const IoURow&, const IoURow&) = default;
};

struct ClassOverlap {
  double mean_iou = 0.0;        // over detected samples only; 0 if none
  double detection_rate = 0.0;  // detected / total
  std::size_t total = 0;
  std::size_t detected = 0;
  friend bool operator==(const ClassOverlap&, const ClassOverlap&) = default;
};

struct IoUReport {
  std::vector<IoURow> per_image;
  std::map<std::string, ClassOverlap> per_class;
};

inline constexpr double kDefaultDetectThreshold = 0.1;

// A sample counts as detected when its IoU reaches the threshold; an empty
// prediction against an empty truth scores 0 and is not detected.
IoUReport overlap_report(std::span<const OverlapSample> samples,
                         double detect_threshold = kDefaultDetectThreshold);

// Rebuilds per-class aggregates from per-image rows.
std::map<std::string, ClassOverlap> summarize(std::span<const IoURow> rows);

// Fraction of samples where (p >= threshold) matches the {0,1} label.
double binary_accuracy(std::span<const double> probabilities, std::span<const double> labels,
                       double threshold = 0.5);

struct EpochMetrics {
  double train_loss = 0.0;
  double test_loss = 0.0;
  double train_acc = 0.0;
  double test_acc = 0.0;
  friend bool operator==(const EpochMetrics&, const EpochMetrics&) = default;
};

struct TrainReport {
  std::vector<double> train_loss;
  std::vector<double> test_loss;
  std::vector<double> train_acc;
  std::vector<double> test_acc;

  std::size_t epochs() const noexcept { return train_loss.size(); }
  void push(const EpochMetrics& m);
  EpochMetrics at(std::size_t epoch) const;
  // Throws InvalidArgument if series lengths differ or values leave range.
  void validate() const;

  friend bool operator==(const TrainReport&, const TrainReport&) = default;
};

// IoU report CSV: `id,class,iou,detected` rows, a blank line, then a
// `class,mean_iou,detection_rate,detected,total` summary block.
void write_iou_report(const std::filesystem::path& path, const IoUReport& report);
IoUReport read_iou_report(const std::filesystem::path& path);

// `epoch,train_loss,test_loss,train_acc,test_acc`, epochs numbered from 1.
std::string train_report_header();
std::string train_report_row(std::size_t epoch, const EpochMetrics& m);
void write_train_report(const std::filesystem::path& path, const TrainReport& report);
TrainReport read_train_report(const std::filesystem::path& path);

}  // namespace tumorkit
