// Self-contained SVG line charts (axes, ticks, polylines, optional ribbon
// bands and legend). Output is fully deterministic.
#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace agecurve::svg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  double width = 1.5;
  bool dashed = false;
};

struct Band {
  std::vector<double> x;
  std::vector<double> lo;
  std::vector<double> hi;
  std::string color = "#1f77b4";
  double opacity = 0.2;
};

struct ChartSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  int width = 720;
  int height = 480;
};

void write_line_chart(const std::filesystem::path& path, const ChartSpec& spec,
                      const std::vector<Series>& series, const std::vector<Band>& bands = {});

}  // namespace agecurve::svg
