#include "tumorkit/pipeline/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>

#include "tumorkit/error.hpp"
#include "tumorkit/image_io.hpp"

namespace tumorkit::pipeline {
namespace {

struct Ellipse {
  double cx, cy, a, b, theta;

  bool contains(double x, double y) const {
    const double c = std::cos(theta), s = std::sin(theta);
    const double u = (x - cx) * c + (y - cy) * s;
    const double v = -(x - cx) * s + (y - cy) * c;
    return (u * u) / (a * a) + (v * v) / (b * b) <= 1.0;
  }
};

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace

void SynthConfig::validate() const {
  if (count < 2 || count % 2 != 0) throw InvalidArgument("synth: count must be even and >= 2");
  if (size < 16) throw InvalidArgument("synth: size must be >= 16");
  if (positive_label == ClassLabel::Negative) {
    throw InvalidArgument("synth: positive label must be a tumor class");
  }
}

SynthSample synth_sample(std::size_t size, bool positive, Rng& rng) {
  const double n = static_cast<double>(size);
  const double f = n / 64.0;
  std::normal_distribution<double> noise(0.0, 1.0);

  const Ellipse head{n / 2.0 + uniform(rng, -2, 2) * f, n / 2.0 + uniform(rng, -2, 2) * f,
                     uniform(rng, 0.38, 0.44) * n, uniform(rng, 0.34, 0.42) * n, 0.0};
  const double brain_level = uniform(rng, 0.32, 0.40);
  struct Wave {
    double fx, fy, phase;
  };
  Wave waves[3];
  for (Wave& w : waves) {
    w = {uniform(rng, 1.0, 4.0), uniform(rng, 1.0, 4.0),
         uniform(rng, 0.0, 2.0 * std::numbers::pi)};
  }

  Ellipse tumor{};
  double tumor_level = 0.0;
  if (positive) {
    tumor.a = uniform(rng, 7.0, 13.0) * f;
    tumor.b = uniform(rng, 6.0, 11.0) * f;
    tumor.theta = uniform(rng, 0.0, std::numbers::pi);
    // Centre inside the head shrunk by the tumor's larger radius plus a margin.
    const double margin = std::max(tumor.a, tumor.b) + 3.0 * f;
    const double r = std::sqrt(uniform(rng, 0.0, 1.0));
    const double phi = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    tumor.cx = head.cx + r * std::max(0.0, head.a - margin) * std::cos(phi);
    tumor.cy = head.cy + r * std::max(0.0, head.b - margin) * std::sin(phi);
    tumor_level = uniform(rng, 0.78, 0.90);
  }

  SynthSample out{GrayImage(size, size), BinaryMask(size, size)};
  for (std::size_t y = 0; y < size; ++y) {
    for (std::size_t x = 0; x < size; ++x) {
      const double px = static_cast<double>(x) + 0.5, py = static_cast<double>(y) + 0.5;
      double v;
      if (positive && tumor.contains(px, py)) {
        v = tumor_level + 0.02 * noise(rng);
        out.mask.set(x, y, true);
      } else if (head.contains(px, py)) {
        v = brain_level;
        for (const Wave& w : waves) {
          v += 0.025 * std::cos(2.0 * std::numbers::pi * (w.fx * px + w.fy * py) / n + w.phase);
        }
        v += 0.02 * noise(rng);
      } else {
        v = 0.04 + 0.015 * noise(rng);
      }
      out.image(x, y) = std::clamp(v, 0.0, 1.0);
    }
  }
  return out;
}

DatasetManifest write_synth_corpus(const std::filesystem::path& dir, const SynthConfig& cfg) {
  cfg.validate();
  std::error_code ec;
  std::filesystem::create_directories(dir / "images", ec);
  std::filesystem::create_directories(dir / "masks", ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  DatasetManifest manifest;
  manifest.root = dir;
  for (std::size_t i = 0; i < cfg.count; ++i) {
    const bool positive = i % 2 == 0;
    char id[32];
    std::snprintf(id, sizeof id, "%s_%04zu", positive ? "pos" : "neg", i / 2);
    Rng rng = make_rng(derive_seed(cfg.seed, "synth", i));
    const SynthSample s = synth_sample(cfg.size, positive, rng);

    ManifestEntry e;
    e.id = id;
    e.image = std::filesystem::path("images") / (e.id + ".png");
    write_png(dir / e.image, s.image);
    if (positive) {
      e.mask = std::filesystem::path("masks") / (e.id + ".png");
      write_png(dir / *e.mask, s.mask);
    }
    e.label = positive ? cfg.positive_label : ClassLabel::Negative;
    e.patient = "synth" + std::to_string(i);
    manifest.entries.push_back(std::move(e));
  }
  write_manifest(dir / "manifest.csv", manifest);
  return manifest;
}

}  // namespace tumorkit::pipeline
