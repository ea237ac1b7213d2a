#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support/oracles.hpp"
#include "support/tempdir.hpp"
#include "tumorkit/error.hpp"
#include "tumorkit/segment.hpp"

using namespace tumorkit;

namespace {

void expect_nearest(std::span<const double> pts, const ClusterModel& m) {
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const std::size_t a = m.assignments[i];
    for (std::size_t j = 0; j < m.k; ++j) {
      const double dj = std::abs(pts[i] - m.centroids[j]), da = std::abs(pts[i] - m.centroids[a]);
      EXPECT_TRUE(da < dj || (da == dj && a <= j)) << "point " << i;
    }
  }
}

}  // namespace

TEST(Wcss, ClosedFormCases) {
  const std::vector<double> pts{0.2, 0.7};
  EXPECT_EQ(wcss(pts, pts, std::vector<std::size_t>{0, 1}), 0.0);
  EXPECT_DOUBLE_EQ(wcss(std::vector<double>{0, 1}, std::vector<double>{0.5},
                        std::vector<std::size_t>{0, 0}),
                   0.5);
  EXPECT_THROW(wcss(pts, pts, std::vector<std::size_t>{0, 2}), InvalidArgument);
}

TEST(Wcss, MatchesSummationOracle) {
  Rng rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> pts(20), cents{0.1, 0.5, 0.9};
  std::vector<std::size_t> asg(20);
  for (std::size_t i = 0; i < 20; ++i) {
    pts[i] = u(rng);
    asg[i] = rng() % 3;
  }
  double expected = 0;
  for (std::size_t i = 0; i < 20; ++i) expected += std::pow(pts[i] - cents[asg[i]], 2);
  EXPECT_NEAR(wcss(pts, cents, asg), expected, 1e-12);
}

TEST(NearestCentroid, TiesGoToLowestIndex) {
  EXPECT_EQ(nearest_centroid(0.5, std::vector<double>{0.4, 0.6}), 0u);
  EXPECT_EQ(nearest_centroid(0.59, std::vector<double>{0.4, 0.6}), 1u);
}

TEST(KMeans, ConstantImageSingleCluster) {
  const GrayImage img(6, 6, 0.42);
  const ClusterModel m = kmeans(img, KMeansConfig{1, 3, 100, 1e-6, 0});
  ASSERT_EQ(m.centroids.size(), 1u);
  EXPECT_DOUBLE_EQ(m.centroids[0], 0.42);
  EXPECT_NEAR(m.wcss, 0.0, 1e-24);
}

TEST(KMeans, FourPointExample) {
  const std::vector<double> pts{0.0, 0.1, 0.9, 1.0};
  const ClusterModel m = kmeans(pts, KMeansConfig{2, 10, 100, 1e-6, 7});
  std::vector<double> c = m.centroids;
  std::sort(c.begin(), c.end());
  EXPECT_NEAR(c[0], 0.05, 1e-12);
  EXPECT_NEAR(c[1], 0.95, 1e-12);
  EXPECT_NEAR(m.wcss, 0.01, 1e-12);
  EXPECT_NEAR(tktest::exhaustive_wcss(pts, 2), 0.01, 1e-12);
}

TEST(KMeans, DeterministicForSeed) {
  Rng rng(1);
  const GrayImage img = tktest::random_image(10, 10, rng);
  const KMeansConfig cfg{3, 5, 100, 1e-6, 99};
  const ClusterModel a = kmeans(img, cfg), b = kmeans(img, cfg);
  EXPECT_EQ(a.centroids, b.centroids);
  EXPECT_EQ(a.assignments, b.assignments);
  EXPECT_EQ(a.wcss, b.wcss);
}

TEST(KMeans, MatchesExhaustiveOptimumOnSmallInstances) {
  Rng rng(2024);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 2 + rng() % 7;
    const std::size_t k = 1 + rng() % std::min<std::size_t>(3, n);
    std::vector<double> pts(n);
    for (double& p : pts) p = u(rng);
    const ClusterModel m = kmeans(pts, KMeansConfig{k, 10, 100, 1e-6, static_cast<std::uint64_t>(trial)});
    EXPECT_NEAR(m.wcss, tktest::exhaustive_wcss(pts, k), 1e-9) << "trial " << trial;
  }
}

TEST(KMeans, InvariantsOnRandomData) {
  Rng rng(77);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> pts(50 + rng() % 50);
    for (double& p : pts) p = u(rng);
    const std::size_t k = 1 + rng() % 5;
    const ClusterModel m = kmeans(pts, KMeansConfig{k, 4, 100, 1e-6, rng()});
    ASSERT_EQ(m.centroids.size(), k);
    ASSERT_EQ(m.assignments.size(), pts.size());
    for (std::size_t a : m.assignments) EXPECT_LT(a, k);
    EXPECT_GE(m.wcss, 0.0);
    EXPECT_NEAR(m.wcss, wcss(pts, m.centroids, m.assignments), 1e-12);
    expect_nearest(pts, m);
    for (std::size_t i = 1; i < m.wcss_history.size(); ++i) {
      EXPECT_LE(m.wcss_history[i], m.wcss_history[i - 1] + 1e-12);
    }
  }
}

TEST(KMeans, DuplicatePointsKeepKClusters) {
  const std::vector<double> pts{0.5, 0.5, 0.5, 0.5, 0.9};
  const ClusterModel m = kmeans(pts, KMeansConfig{3, 3, 100, 1e-6, 1});
  EXPECT_EQ(m.centroids.size(), 3u);
  expect_nearest(pts, m);
}

TEST(KMeans, Preconditions) {
  const std::vector<double> pts{0.1, 0.2};
  EXPECT_THROW(kmeans(pts, KMeansConfig{3, 1, 10, 1e-6, 0}), InvalidArgument);
  EXPECT_THROW(kmeans(pts, KMeansConfig{0, 1, 10, 1e-6, 0}), InvalidArgument);
  EXPECT_THROW(kmeans(pts, KMeansConfig{1, 0, 10, 1e-6, 0}), InvalidArgument);
  EXPECT_THROW(kmeans(pts, KMeansConfig{1, 1, 10, 0.0, 0}), InvalidArgument);
}

TEST(ChooseElbow, SpecCurves) {
  const std::vector<double> curve{100, 70, 30, 28, 27, 26.5};
  EXPECT_EQ(choose_elbow(curve, ElbowRule::Linear), 3u);
  EXPECT_EQ(choose_elbow(curve, ElbowRule::LogSecondDifference), 3u);
  const std::vector<double> linear{60, 50, 40, 30, 20};
  EXPECT_EQ(choose_elbow(linear, ElbowRule::Linear), 2u);
  EXPECT_EQ(choose_elbow(linear, ElbowRule::LogSecondDifference), 2u);
  EXPECT_THROW(choose_elbow(std::vector<double>{1, 0.5}), InvalidArgument);
}

TEST(ChooseElbow, LinearRuleOracle) {
  Rng rng(6);
  std::uniform_real_distribution<double> u(0, 10);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> c(6);
    double v = 100;
    for (double& x : c) x = (v -= u(rng));
    std::size_t best = 2;
    double bd = -1e300;
    for (std::size_t k = 2; k <= 5; ++k) {
      const double d = c[k - 2] - 2 * c[k - 1] + c[k];
      if (d > bd) bd = d, best = k;
    }
    EXPECT_EQ(choose_elbow(c, ElbowRule::Linear), best);
  }
}

TEST(ElbowScan, ThreeBandImagePicksThree) {
  Rng rng(31);
  const double levels[] = {0.1, 0.5, 0.9};
  const GrayImage img = tktest::band_image(24, 24, levels, 0.03, rng);
  const ElbowResult r = elbow_scan(img, 8, KMeansConfig{3, 10, 100, 1e-6, 5});
  EXPECT_EQ(r.chosen_k, 3u);
  ASSERT_EQ(r.wcss_curve.size(), 8u);
  for (std::size_t i = 1; i < 8; ++i) EXPECT_LE(r.wcss_curve[i], r.wcss_curve[i - 1] + 1e-9);
}

TEST(ElbowScan, CurveNonIncreasingOnRandomData) {
  Rng rng(17);
  for (int t = 0; t < 5; ++t) {
    const GrayImage img = tktest::random_image(12, 12, rng);
    const ElbowResult r = elbow_scan(img, 7, KMeansConfig{1, 3, 100, 1e-6, rng()});
    for (std::size_t i = 1; i < r.wcss_curve.size(); ++i) {
      EXPECT_LE(r.wcss_curve[i], r.wcss_curve[i - 1] + 1e-9);
    }
    EXPECT_GE(r.chosen_k, 2u);
    EXPECT_LE(r.chosen_k, 6u);
  }
}

TEST(ElbowScan, NeedsThreePoints) {
  const GrayImage img(4, 4, 0.5);
  EXPECT_THROW(elbow_scan(img, 2, KMeansConfig{}), InvalidArgument);
}

TEST(ElbowCsv, RoundTrip) {
  tktest::TempDir dir;
  ElbowResult r{{10.5, 4.25, 1.0, 0.875}, 0};
  r.chosen_k = choose_elbow(r.wcss_curve);
  write_elbow_csv(dir / "e.csv", r);
  EXPECT_EQ(tktest::read_text(dir / "e.csv").substr(0, 7), "k,wcss\n");
  const ElbowResult back = read_elbow_csv(dir / "e.csv");
  EXPECT_EQ(back.wcss_curve, r.wcss_curve);
  EXPECT_EQ(back.chosen_k, r.chosen_k);
}

TEST(TumorMask, CoversBrightestBandExactly) {
  Rng rng(8);
  const double levels[] = {0.1, 0.5, 0.9};
  const GrayImage img = tktest::band_image(9, 12, levels, 0.0, rng);
  const ClusterModel m = kmeans(img, KMeansConfig{3, 10, 100, 1e-6, 3});
  const BinaryMask mask = extract_tumor_mask(img, m);
  ASSERT_EQ(mask.width(), 9u);
  for (std::size_t y = 0; y < 12; ++y)
    for (std::size_t x = 0; x < 9; ++x) EXPECT_EQ(mask(x, y), img(x, y) == 0.9);
}

TEST(TumorMask, ConstantImageAllTrue) {
  const GrayImage img(5, 5, 0.3);
  const BinaryMask mask = extract_tumor_mask(img, kmeans(img, KMeansConfig{1, 1, 10, 1e-6, 0}));
  EXPECT_EQ(mask.count(), 25u);
}

TEST(TumorMask, TwoBands) {
  Rng rng(8);
  const double levels[] = {0.2, 0.8};
  const GrayImage img = tktest::band_image(6, 6, levels, 0.0, rng);
  const BinaryMask mask = extract_tumor_mask(img, kmeans(img, KMeansConfig{2, 5, 100, 1e-6, 1}));
  for (std::size_t y = 0; y < 6; ++y)
    for (std::size_t x = 0; x < 6; ++x) EXPECT_EQ(mask(x, y), y >= 3);
}
