#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace dartskill {

// One plotted series: points in data coordinates, drawn as markers and
// (optionally) a connecting polyline in draw order.
struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  bool draw_line = true;
  bool draw_markers = true;
};

struct PlotLayout {
  std::string title;
  std::string x_label;
  std::string y_label;
  int width = 720;
  int height = 480;
};

// Self-contained SVG scatter/line chart; output is a deterministic
// function of the inputs (fixed tick logic, text-formatted numbers).
std::string render_svg_plot(const PlotLayout& layout,
                            const std::vector<PlotSeries>& series);
void write_svg_plot(const std::filesystem::path& path,
                    const PlotLayout& layout,
                    const std::vector<PlotSeries>& series);

}  // namespace dartskill
