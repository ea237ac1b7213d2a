#include <gtest/gtest.h>

#include "support/oracles.hpp"
#include "support/tempdir.hpp"
#include "tumorkit/error.hpp"
#include "tumorkit/metrics.hpp"

using namespace tumorkit;

namespace {

BinaryMask block(std::size_t w, std::size_t h, std::size_t x0, std::size_t x1, std::size_t y0,
                 std::size_t y1) {
  BinaryMask m(w, h);
  for (std::size_t y = y0; y < y1; ++y)
    for (std::size_t x = x0; x < x1; ++x) m.set(x, y, true);
  return m;
}

// Masks with a chosen IoU: truth is the first `u` cells of a row, prediction
// the first `i` of them.
OverlapSample with_iou(const std::string& id, const std::string& label, std::size_t i,
                       std::size_t u) {
  return {id, label, block(u, 1, 0, i, 0, 1), block(u, 1, 0, u, 0, 1)};
}

}  // namespace

TEST(Iou, BasicCases) {
  const BinaryMask a = block(4, 4, 0, 2, 0, 2);
  EXPECT_EQ(iou(a, a), 1.0);
  EXPECT_EQ(iou(a, block(4, 4, 2, 4, 2, 4)), 0.0);
  EXPECT_DOUBLE_EQ(iou(a, block(4, 4, 1, 3, 0, 2)), 1.0 / 3.0);
  EXPECT_EQ(iou(a, BinaryMask(4, 4)), 0.0);
  EXPECT_EQ(iou(BinaryMask(4, 4), BinaryMask(4, 4)), 0.0);
  EXPECT_THROW(iou(a, BinaryMask(3, 4)), ShapeError);
}

TEST(Iou, MatchesSetOracleSymmetricAndBounded) {
  Rng rng(5);
  for (int t = 0; t < 50; ++t) {
    const std::size_t w = 1 + rng() % 32, h = 1 + rng() % 32;
    const double p = (rng() % 100) / 100.0;
    const BinaryMask a = tktest::random_mask(w, h, p, rng), b = tktest::random_mask(w, h, p, rng);
    const double v = iou(a, b);
    EXPECT_EQ(v, tktest::iou_oracle(a, b));
    EXPECT_EQ(v, iou(b, a));
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Iou, GrowingIntersectionWithFixedUnionNeverDecreases) {
  // Union fixed at 10 cells of a row; the prediction gains truth cells.
  const BinaryMask truth = block(10, 1, 0, 10, 0, 1);
  double prev = -1;
  for (std::size_t i = 1; i <= 10; ++i) {
    const double v = iou(block(10, 1, 0, i, 0, 1), truth);
    EXPECT_GE(v, prev);
    prev = v;
  }
}

TEST(OverlapReport, SingleSamples) {
  std::vector<OverlapSample> one{with_iou("a", "glioma", 4, 4)};
  IoUReport r = overlap_report(one);
  EXPECT_EQ(r.per_class.at("glioma").detection_rate, 1.0);
  EXPECT_EQ(r.per_class.at("glioma").mean_iou, 1.0);

  std::vector<OverlapSample> miss{{"b", "glioma", BinaryMask(4, 4), block(4, 4, 0, 2, 0, 2)}};
  r = overlap_report(miss);
  EXPECT_EQ(r.per_class.at("glioma").detection_rate, 0.0);
  EXPECT_FALSE(r.per_image[0].detected);
}

TEST(OverlapReport, ThreeSampleAggregation) {
  // IoUs 0.65, 0.0, 0.8.
  std::vector<OverlapSample> s{with_iou("a", "glioma", 13, 20), with_iou("b", "glioma", 0, 20),
                               with_iou("c", "glioma", 16, 20)};
  const IoUReport r = overlap_report(s, 0.1);
  const ClassOverlap& c = r.per_class.at("glioma");
  EXPECT_DOUBLE_EQ(c.detection_rate, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(c.mean_iou, (0.65 + 0.8) / 2.0);
  EXPECT_EQ(c.detected, 2u);
  EXPECT_EQ(c.total, 3u);
}

TEST(OverlapReport, PerClassRecomputesFromRows) {
  Rng rng(9);
  std::vector<OverlapSample> s;
  const char* labels[] = {"glioma", "meningioma", "pituitary"};
  for (int i = 0; i < 30; ++i) {
    s.push_back({"s" + std::to_string(i), labels[i % 3], tktest::random_mask(8, 8, 0.3, rng),
                 tktest::random_mask(8, 8, 0.3, rng)});
  }
  const IoUReport r = overlap_report(s, 0.2);
  EXPECT_EQ(summarize(r.per_image), r.per_class);
  for (const auto& [label, c] : r.per_class) {
    std::size_t total = 0, detected = 0;
    for (const auto& row : r.per_image) {
      if (row.label != label) continue;
      ++total;
      detected += row.detected;
      EXPECT_EQ(row.detected, row.iou >= 0.2);
    }
    EXPECT_EQ(c.total, total);
    EXPECT_EQ(c.detection_rate, static_cast<double>(detected) / static_cast<double>(total));
  }
}

TEST(OverlapReport, CsvRoundTrip) {
  tktest::TempDir dir;
  std::vector<OverlapSample> s{with_iou("a", "glioma", 13, 20), with_iou("b,x", "pituitary", 1, 3)};
  const IoUReport r = overlap_report(s);
  write_iou_report(dir / "iou.csv", r);
  const IoUReport back = read_iou_report(dir / "iou.csv");
  ASSERT_EQ(back.per_image.size(), 2u);
  EXPECT_EQ(back.per_image[1].id, "b,x");
  EXPECT_EQ(back.per_image[0].iou, r.per_image[0].iou);
  EXPECT_EQ(back.per_class, r.per_class);
}

TEST(OverlapReport, ValidatesInput) {
  EXPECT_THROW(overlap_report({}), InvalidArgument);
  std::vector<OverlapSample> s{with_iou("a", "glioma", 1, 2)};
  EXPECT_THROW(overlap_report(s, 1.5), InvalidArgument);
}

TEST(BinaryAccuracy, Examples) {
  EXPECT_EQ(binary_accuracy(std::vector<double>{0.9, 0.1}, std::vector<double>{1, 0}), 1.0);
  EXPECT_EQ(binary_accuracy(std::vector<double>{0.9, 0.9}, std::vector<double>{1, 0}), 0.5);
  EXPECT_EQ(binary_accuracy(std::vector<double>{0.5}, std::vector<double>{1}), 1.0);
  EXPECT_THROW(binary_accuracy(std::vector<double>{0.5}, std::vector<double>{}), ShapeError);
}

TEST(TrainReport, CsvRoundTripAndValidation) {
  tktest::TempDir dir;
  TrainReport r;
  r.push({0.69, 0.7, 0.5, 0.45});
  r.push({0.31234567890123, 0.4, 0.875, 0.8});
  write_train_report(dir / "t.csv", r);
  const std::string text = tktest::read_text(dir / "t.csv");
  EXPECT_EQ(text.substr(0, text.find('\n')), "epoch,train_loss,test_loss,train_acc,test_acc");
  EXPECT_EQ(read_train_report(dir / "t.csv"), r);

  TrainReport bad = r;
  bad.train_acc.push_back(0.5);
  EXPECT_THROW(bad.validate(), InvalidArgument);
  TrainReport neg;
  neg.push({-0.1, 0, 0, 0});
  EXPECT_THROW(neg.validate(), InvalidArgument);
}
