#include "tumorkit/metrics.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "tumorkit/csv.hpp"
#include "tumorkit/error.hpp"

namespace tumorkit {

double iou(const BinaryMask& predicted, const BinaryMask& truth) {
  if (!predicted.same_shape(truth)) {
    throw ShapeError("iou: masks are " + std::to_string(predicted.width()) + "x" +
                     std::to_string(predicted.height()) + " and " + std::to_string(truth.width()) +
                     "x" + std::to_string(truth.height()));
  }
  std::size_t inter = 0;
  std::size_t uni = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const bool a = predicted.at(i);
    const bool b = truth.at(i);
    inter += a && b;
    uni += a || b;
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

std::map<std::string, ClassOverlap> summarize(std::span<const IoURow> rows) {
  std::map<std::string, ClassOverlap> out;
  std::map<std::string, double> sums;
  for (const IoURow& r : rows) {
    ClassOverlap& c = out[r.label];
    ++c.total;
    if (r.detected) {
      ++c.detected;
      sums[r.label] += r.iou;
    }
  }
  for (auto& [label, c] : out) {
    c.detection_rate = static_cast<double>(c.detected) / static_cast<double>(c.total);
    c.mean_iou = c.detected ? sums[label] / static_cast<double>(c.detected) : 0.0;
  }
  return out;
}

IoUReport overlap_report(std::span<const OverlapSample> samples, double detect_threshold) {
  if (samples.empty()) throw InvalidArgument("overlap_report: no samples");
  if (!(detect_threshold >= 0.0 && detect_threshold <= 1.0)) {
    throw InvalidArgument("overlap_report: threshold must lie in [0,1]");
  }
  IoUReport report;
  for (const OverlapSample& s : samples) {
    const double v = iou(s.predicted, s.truth);
    const bool any = s.predicted.count() + s.truth.count() > 0;
    report.per_image.push_back({s.id, s.label, v, any && v >= detect_threshold});
  }
  report.per_class = summarize(report.per_image);
  return report;
}

double binary_accuracy(std::span<const double> probabilities, std::span<const double> labels,
                       double threshold) {
  if (probabilities.size() != labels.size()) throw ShapeError("binary_accuracy: length mismatch");
  if (probabilities.empty()) throw InvalidArgument("binary_accuracy: empty input");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool predicted = probabilities[i] >= threshold;
    correct += predicted == (labels[i] >= 0.5);
  }
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

void TrainReport::push(const EpochMetrics& m) {
  train_loss.push_back(m.train_loss);
  test_loss.push_back(m.test_loss);
  train_acc.push_back(m.train_acc);
  test_acc.push_back(m.test_acc);
}

EpochMetrics TrainReport::at(std::size_t epoch) const {
  return {train_loss.at(epoch), test_loss.at(epoch), train_acc.at(epoch), test_acc.at(epoch)};
}

void TrainReport::validate() const {
  const std::size_t n = train_loss.size();
  if (test_loss.size() != n || train_acc.size() != n || test_acc.size() != n) {
    throw InvalidArgument("TrainReport: series lengths differ");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(train_loss[i] >= 0.0) || !(test_loss[i] >= 0.0)) {
      throw InvalidArgument("TrainReport: negative or NaN loss");
    }
    for (double a : {train_acc[i], test_acc[i]}) {
      if (!(a >= 0.0 && a <= 1.0)) throw InvalidArgument("TrainReport: accuracy outside [0,1]");
    }
  }
}

void write_iou_report(const std::filesystem::path& path, const IoUReport& report) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "id,class,iou,detected\n";
  for (const IoURow& r : report.per_image) {
    out << csv::join({r.id, r.label, csv::format_double(r.iou), r.detected ? "1" : "0"}) << '\n';
  }
  out << "\nclass,mean_iou,detection_rate,detected,total\n";
  for (const auto& [label, c] : report.per_class) {
    out << csv::join({label, csv::format_double(c.mean_iou), csv::format_double(c.detection_rate),
                      std::to_string(c.detected), std::to_string(c.total)})
        << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

IoUReport read_iou_report(const std::filesystem::path& path) {
  const csv::Table table = csv::read_file(path);
  if (table.rows.empty() || table.rows[0] != csv::Row{"id", "class", "iou", "detected"}) {
    throw ParseError(1, "expected header 'id,class,iou,detected'");
  }
  const csv::Row summary_header{"class", "mean_iou", "detection_rate", "detected", "total"};
  IoUReport report;
  std::size_t r = 1;
  for (; r < table.rows.size() && table.rows[r] != summary_header; ++r) {
    const auto& row = table.rows[r];
    const std::size_t line = table.line_numbers[r];
    if (row.size() != 4) throw ParseError(line, "expected 4 fields");
    if (row[3] != "0" && row[3] != "1") throw ParseError(line, "detected must be 0 or 1");
    report.per_image.push_back({row[0], row[1], csv::parse_double(row[2], line), row[3] == "1"});
  }
  for (++r; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::size_t line = table.line_numbers[r];
    if (row.size() != 5) throw ParseError(line, "expected 5 summary fields");
    report.per_class[row[0]] = {csv::parse_double(row[1], line), csv::parse_double(row[2], line),
                                csv::parse_size(row[4], line), csv::parse_size(row[3], line)};
  }
  return report;
}

std::string train_report_header() { return "epoch,train_loss,test_loss,train_acc,test_acc"; }

std::string train_report_row(std::size_t epoch, const EpochMetrics& m) {
  return csv::join({std::to_string(epoch), csv::format_double(m.train_loss),
                    csv::format_double(m.test_loss), csv::format_double(m.train_acc),
                    csv::format_double(m.test_acc)});
}

void write_train_report(const std::filesystem::path& path, const TrainReport& report) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << train_report_header() << '\n';
  for (std::size_t e = 0; e < report.epochs(); ++e) out << train_report_row(e + 1, report.at(e)) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

TrainReport read_train_report(const std::filesystem::path& path) {
  const csv::Table table = csv::read_file(path);
  if (table.rows.empty() || csv::join(table.rows[0]) != train_report_header()) {
    throw ParseError(1, "expected header '" + train_report_header() + "'");
  }
  TrainReport report;
  for (std::size_t r = 1; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::size_t line = table.line_numbers[r];
    if (row.size() != 5) throw ParseError(line, "expected 5 fields");
    if (csv::parse_size(row[0], line) != r) throw ParseError(line, "epochs must run 1, 2, ...");
    report.push({csv::parse_double(row[1], line), csv::parse_double(row[2], line),
                 csv::parse_double(row[3], line), csv::parse_double(row[4], line)});
  }
  return report;
}

}  // namespace tumorkit
