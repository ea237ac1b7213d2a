#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "tumorkit/image.hpp"

namespace tumorkit {

struct KMeansConfig {
  std::size_t k = 3;
  std::size_t restarts = 10;
  std::size_t max_iters = 100;
  double tol = 1e-6;
  std::uint64_t seed = 0;

  void validate() const;
};

// Result of clustering 1-D intensities.
struct ClusterModel {
  std::size_t k = 0;
  std::vector<double> centroids;
  std::vector<std::size_t> assignments;
  double wcss = 0.0;
  // WCSS after seeding and after every Lloyd iteration of the winning restart.
  std::vector<double> wcss_history;
  std::size_t restart = 0;
};

// Sum over points of the squared distance to the assigned centroid.
double wcss(std::span<const double> points, std::span<const double> centroids,
            std::span<const std::size_t> assignments);

// Index of the nearest centroid, ties to the lowest index.
std::size_t nearest_centroid(double x, std::span<const double> centroids);

// One seeded k-means++ run followed by Lloyd iterations. The stream is
// derived from (cfg.seed, restart) so restarts are independent of each other
// and of evaluation order.
ClusterModel kmeans_restart(std::span<const double> points, const KMeansConfig& cfg,
                            std::size_t restart);

// Lloyd iterations from explicit initial centroids.
ClusterModel lloyd(std::span<const double> points, std::vector<double> centroids,
                   std::size_t max_iters, double tol);

// Best of cfg.restarts runs by WCSS (ties to the lowest restart index).
ClusterModel kmeans(std::span<const double> points, const KMeansConfig& cfg);
ClusterModel kmeans(const GrayImage& img, const KMeansConfig& cfg);

enum class ElbowRule {
  // Maximum second difference of log(WCSS): scale free, so a large first drop
  // does not mask the bend that follows it.
  LogSecondDifference,
  // Maximum raw second difference wcss(k-1) - 2 wcss(k) + wcss(k+1).
  Linear,
};

struct ElbowResult {
  std::vector<double> wcss_curve;  // index i holds k = i + 1
  std::size_t chosen_k = 0;
};

// Picks k in [2, curve.size()-1] maximizing the rule's second difference,
// ties to the smallest k. Needs at least three curve points.
std::size_t choose_elbow(std::span<const double> wcss_curve,
                         ElbowRule rule = ElbowRule::LogSecondDifference);

// Clusters for k = 1..k_max (cfg.k is ignored). Each k also runs one Lloyd
// pass warm-started from the k-1 solution plus the worst-fit point, so the
// curve is non-increasing.
ElbowResult elbow_scan(std::span<const double> points, std::size_t k_max, KMeansConfig cfg,
                       ElbowRule rule = ElbowRule::LogSecondDifference);
ElbowResult elbow_scan(const GrayImage& img, std::size_t k_max, const KMeansConfig& cfg,
                       ElbowRule rule = ElbowRule::LogSecondDifference);

// Marks pixels assigned to the brightest centroid (ties to the lowest index).
BinaryMask extract_tumor_mask(const GrayImage& img, const ClusterModel& model);

// Writes `k,wcss` rows.
void write_elbow_csv(const std::filesystem::path& path, const ElbowResult& result);
ElbowResult read_elbow_csv(const std::filesystem::path& path,
                           ElbowRule rule = ElbowRule::LogSecondDifference);

}  // namespace tumorkit
