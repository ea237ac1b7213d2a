#include "tumorkit/segment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <string>

#include "tumorkit/csv.hpp"
#include "tumorkit/error.hpp"
#include "tumorkit/random.hpp"

namespace tumorkit {
namespace {

struct LloydState {
  std::vector<double> centroids;
  std::vector<std::size_t> assignments;
  std::vector<std::size_t> counts;
};

void assign_nearest(std::span<const double> points, LloydState& s) {
  std::fill(s.counts.begin(), s.counts.end(), 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const std::size_t c = nearest_centroid(points[i], s.centroids);
    s.assignments[i] = c;
    ++s.counts[c];
  }
}

// Moves the worst-fit point of a multi-member cluster into each empty
// cluster and centers that cluster on it.
void repair_empty(std::span<const double> points, LloydState& s) {
  for (std::size_t j = 0; j < s.centroids.size(); ++j) {
    if (s.counts[j] != 0) continue;
    std::size_t worst = points.size();
    double worst_d = -1.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const std::size_t a = s.assignments[i];
      if (s.counts[a] < 2) continue;
      const double d = (points[i] - s.centroids[a]) * (points[i] - s.centroids[a]);
      if (d > worst_d) {
        worst_d = d;
        worst = i;
      }
    }
    if (worst == points.size()) return;
    --s.counts[s.assignments[worst]];
    s.assignments[worst] = j;
    s.counts[j] = 1;
    s.centroids[j] = points[worst];
  }
}

// Returns the largest centroid shift.
double update_means(std::span<const double> points, LloydState& s) {
  const std::size_t k = s.centroids.size();
  std::vector<double> sums(k, 0.0);
  for (std::size_t i = 0; i < points.size(); ++i) sums[s.assignments[i]] += points[i];
  double shift = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    if (s.counts[j] == 0) continue;
    const double mean = sums[j] / static_cast<double>(s.counts[j]);
    shift = std::max(shift, std::abs(mean - s.centroids[j]));
    s.centroids[j] = mean;
  }
  return shift;
}

std::vector<double> kmeans_pp_seed(std::span<const double> points, std::size_t k, Rng& rng) {
  const std::size_t n = points.size();
  std::vector<double> centroids;
  centroids.reserve(k);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  centroids.push_back(points[pick(rng)]);
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) {
    d2[i] = (points[i] - centroids[0]) * (points[i] - centroids[0]);
  }
  while (centroids.size() < k) {
    double total = 0.0;
    for (double d : d2) total += d;
    std::size_t chosen = 0;
    if (total <= 0.0) {
      chosen = pick(rng);
    } else {
      const double u = std::uniform_real_distribution<double>(0.0, total)(rng);
      double acc = 0.0;
      chosen = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (u < acc) {
          chosen = i;
          break;
        }
      }
    }
    const double c = points[chosen];
    centroids.push_back(c);
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], (points[i] - c) * (points[i] - c));
  }
  return centroids;
}

void check_points(std::span<const double> points, std::size_t k) {
  if (k == 0) throw InvalidArgument("kmeans: k must be >= 1");
  if (k > points.size()) {
    throw InvalidArgument("kmeans: k = " + std::to_string(k) + " exceeds the " +
                          std::to_string(points.size()) + " available points");
  }
}

}  // namespace

void KMeansConfig::validate() const {
  if (k < 1) throw InvalidArgument("kmeans: k must be >= 1");
  if (restarts < 1) throw InvalidArgument("kmeans: restarts must be >= 1");
  if (max_iters < 1) throw InvalidArgument("kmeans: max_iters must be >= 1");
  if (!(tol > 0.0)) throw InvalidArgument("kmeans: tol must be positive");
}

double wcss(std::span<const double> points, std::span<const double> centroids,
            std::span<const std::size_t> assignments) {
  if (points.size() != assignments.size()) {
    throw ShapeError("wcss: " + std::to_string(points.size()) + " points but " +
                     std::to_string(assignments.size()) + " assignments");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (assignments[i] >= centroids.size()) throw InvalidArgument("wcss: assignment out of range");
    const double d = points[i] - centroids[assignments[i]];
    total += d * d;
  }
  return total;
}

std::size_t nearest_centroid(double x, std::span<const double> centroids) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < centroids.size(); ++j) {
    const double d = (x - centroids[j]) * (x - centroids[j]);
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  return best;
}

ClusterModel lloyd(std::span<const double> points, std::vector<double> centroids,
                   std::size_t max_iters, double tol) {
  check_points(points, centroids.size());
  const std::size_t k = centroids.size();
  LloydState s{std::move(centroids), std::vector<std::size_t>(points.size()),
               std::vector<std::size_t>(k)};
  ClusterModel model;
  model.k = k;

  assign_nearest(points, s);
  repair_empty(points, s);
  model.wcss_history.push_back(wcss(points, s.centroids, s.assignments));
  for (std::size_t it = 0; it < max_iters; ++it) {
    const double shift = update_means(points, s);
    assign_nearest(points, s);
    repair_empty(points, s);
    model.wcss_history.push_back(wcss(points, s.centroids, s.assignments));
    if (shift < tol) break;
  }
  // A repair can leave a point off its nearest centroid; a final plain
  // assignment restores the nearest-centroid property and can only lower WCSS.
  assign_nearest(points, s);
  model.centroids = std::move(s.centroids);
  model.assignments = std::move(s.assignments);
  model.wcss = wcss(points, model.centroids, model.assignments);
  model.wcss_history.push_back(model.wcss);
  return model;
}

ClusterModel kmeans_restart(std::span<const double> points, const KMeansConfig& cfg,
                            std::size_t restart) {
  cfg.validate();
  check_points(points, cfg.k);
  Rng rng = make_rng(derive_seed(cfg.seed, "kmeans", restart));
  ClusterModel model = lloyd(points, kmeans_pp_seed(points, cfg.k, rng), cfg.max_iters, cfg.tol);
  model.restart = restart;
  return model;
}

ClusterModel kmeans(std::span<const double> points, const KMeansConfig& cfg) {
  cfg.validate();
  check_points(points, cfg.k);
  ClusterModel best;
  for (std::size_t r = 0; r < cfg.restarts; ++r) {
    ClusterModel m = kmeans_restart(points, cfg, r);
    if (r == 0 || m.wcss < best.wcss) best = std::move(m);
  }
  return best;
}

ClusterModel kmeans(const GrayImage& img, const KMeansConfig& cfg) {
  return kmeans(img.pixels(), cfg);
}

std::size_t choose_elbow(std::span<const double> curve, ElbowRule rule) {
  if (curve.size() < 3) throw InvalidArgument("choose_elbow: need WCSS for at least k = 1..3");
  std::vector<double> v(curve.begin(), curve.end());
  if (rule == ElbowRule::LogSecondDifference) {
    // Floor keeps exact fits (WCSS 0) finite; relative to the k = 1 value so
    // the rule stays scale free.
    const double floor = curve[0] > 0.0 ? curve[0] * 1e-12 : 1.0;
    for (double& x : v) x = std::log(std::max(x, floor));
  }
  std::size_t best_k = 2;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 2; k + 1 <= v.size(); ++k) {
    const double d2 = v[k - 2] - 2.0 * v[k - 1] + v[k];
    if (d2 > best) {
      best = d2;
      best_k = k;
    }
  }
  return best_k;
}

ElbowResult elbow_scan(std::span<const double> points, std::size_t k_max, KMeansConfig cfg,
                       ElbowRule rule) {
  if (k_max < 3) throw InvalidArgument("elbow_scan: k_max must be >= 3");
  check_points(points, k_max);
  ElbowResult result;
  ClusterModel prev;
  for (std::size_t k = 1; k <= k_max; ++k) {
    cfg.k = k;
    ClusterModel m = kmeans(points, cfg);
    if (k > 1) {
      std::size_t worst = 0;
      double worst_d = -1.0;
      for (std::size_t i = 0; i < points.size(); ++i) {
        const double d = points[i] - prev.centroids[prev.assignments[i]];
        if (d * d > worst_d) {
          worst_d = d * d;
          worst = i;
        }
      }
      std::vector<double> init = prev.centroids;
      init.push_back(points[worst]);
      ClusterModel warm = lloyd(points, std::move(init), cfg.max_iters, cfg.tol);
      if (warm.wcss < m.wcss) m = std::move(warm);
    }
    result.wcss_curve.push_back(m.wcss);
    prev = std::move(m);
  }
  result.chosen_k = choose_elbow(result.wcss_curve, rule);
  return result;
}

ElbowResult elbow_scan(const GrayImage& img, std::size_t k_max, const KMeansConfig& cfg,
                       ElbowRule rule) {
  return elbow_scan(img.pixels(), k_max, cfg, rule);
}

BinaryMask extract_tumor_mask(const GrayImage& img, const ClusterModel& model) {
  if (model.assignments.size() != img.size()) {
    throw ShapeError("extract_tumor_mask: model covers " + std::to_string(model.assignments.size()) +
                     " pixels, image has " + std::to_string(img.size()));
  }
  if (model.centroids.empty()) throw InvalidArgument("extract_tumor_mask: model has no centroids");
  const auto brightest = static_cast<std::size_t>(
      std::max_element(model.centroids.begin(), model.centroids.end()) - model.centroids.begin());
  std::vector<std::uint8_t> cells(img.size());
  for (std::size_t i = 0; i < cells.size(); ++i) cells[i] = model.assignments[i] == brightest;
  return BinaryMask(img.width(), img.height(), std::move(cells));
}

void write_elbow_csv(const std::filesystem::path& path, const ElbowResult& result) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "k,wcss\n";
  for (std::size_t i = 0; i < result.wcss_curve.size(); ++i) {
    out << (i + 1) << ',' << csv::format_double(result.wcss_curve[i]) << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

ElbowResult read_elbow_csv(const std::filesystem::path& path, ElbowRule rule) {
  const csv::Table table = csv::read_file(path);
  if (table.rows.empty() || table.rows[0] != csv::Row{"k", "wcss"}) {
    throw ParseError(1, "expected header 'k,wcss'");
  }
  ElbowResult result;
  for (std::size_t r = 1; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::size_t line = table.line_numbers[r];
    if (row.size() != 2) throw ParseError(line, "expected 2 fields");
    if (csv::parse_size(row[0], line) != r) throw ParseError(line, "k values must run 1, 2, ...");
    result.wcss_curve.push_back(csv::parse_double(row[1], line));
  }
  if (result.wcss_curve.size() >= 3) result.chosen_k = choose_elbow(result.wcss_curve, rule);
  return result;
}

}  // namespace tumorkit
