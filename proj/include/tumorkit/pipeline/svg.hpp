#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace tumorkit::pipeline {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
};

struct LineChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  // Draws a vertical marker and label at this x (the chosen elbow).
  std::optional<double> marker_x;
  std::string marker_label;
};

// Standalone SVG with axes, tick labels, one polyline per series and a legend.
std::string render_svg(const LineChart& chart);
void write_svg(const std::filesystem::path& path, const LineChart& chart);

}  // namespace tumorkit::pipeline
