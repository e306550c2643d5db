#include "dartskill/figures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dartskill/errors.hpp"
#include "dartskill/text_io.hpp"

namespace dartskill {

namespace {

struct Range {
  double lo = 0.0;
  double hi = 1.0;
};

Range data_range(const std::vector<PlotSeries>& series, bool use_x) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const PlotSeries& s : series) {
    for (double v : use_x ? s.x : s.y) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!(lo <= hi)) return {0.0, 1.0};  // no data at all
  if (lo == hi) return {lo - 0.5, hi + 0.5};
  const double pad = 0.06 * (hi - lo);
  return {lo - pad, hi + pad};
}

// Round tick spacing to 1/2/5 x 10^n covering the range with ~5 ticks.
std::vector<double> ticks(const Range& r) {
  const double span = r.hi - r.lo;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (raw <= m * mag) {
      step = m * mag;
      break;
    }
  }
  std::vector<double> out;
  double t = std::ceil(r.lo / step) * step;
  for (; t <= r.hi + 1e-12 * span; t += step) {
    out.push_back(t == 0.0 ? 0.0 : t);  // normalize -0
  }
  return out;
}

std::string tick_label(double v) {
  // Trim float noise so labels read cleanly (ticks are round by design).
  const double rounded = std::round(v * 1e9) / 1e9;
  return format_double(rounded == 0.0 ? 0.0 : rounded);
}

std::string escape_xml(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_svg_plot(const PlotLayout& layout,
                            const std::vector<PlotSeries>& series) {
  for (const PlotSeries& s : series) {
    if (s.x.size() != s.y.size()) {
      throw ParameterDomainError("render_svg_plot: series '" + s.name +
                                 "' has mismatched x/y lengths");
    }
  }
  const double w = layout.width;
  const double h = layout.height;
  const double left = 64, right = 24, top = 40, bottom = 48;
  const double plot_w = w - left - right;
  const double plot_h = h - top - bottom;

  const Range xr = data_range(series, true);
  const Range yr = data_range(series, false);
  const auto sx = [&](double v) {
    return left + (v - xr.lo) / (xr.hi - xr.lo) * plot_w;
  };
  const auto sy = [&](double v) {
    return top + plot_h - (v - yr.lo) / (yr.hi - yr.lo) * plot_h;
  };
  const auto num = [](double v) { return format_double(std::round(v * 100.0) / 100.0); };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w) +
         "\" height=\"" + num(h) + "\" viewBox=\"0 0 " + num(w) + " " +
         num(h) + "\">\n";
  svg += "<rect width=\"" + num(w) + "\" height=\"" + num(h) +
         "\" fill=\"white\"/>\n";
  svg += "<text x=\"" + num(w / 2) +
         "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"15\" fill=\"#222\">" +
         escape_xml(layout.title) + "</text>\n";

  // Grid and ticks.
  for (double t : ticks(xr)) {
    const double px = sx(t);
    svg += "<line x1=\"" + num(px) + "\" y1=\"" + num(top) + "\" x2=\"" +
           num(px) + "\" y2=\"" + num(top + plot_h) +
           "\" stroke=\"#e4e4e4\" stroke-width=\"1\"/>\n";
    svg += "<text x=\"" + num(px) + "\" y=\"" + num(top + plot_h + 18) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"11\" fill=\"#444\">" +
           tick_label(t) + "</text>\n";
  }
  for (double t : ticks(yr)) {
    const double py = sy(t);
    svg += "<line x1=\"" + num(left) + "\" y1=\"" + num(py) + "\" x2=\"" +
           num(left + plot_w) + "\" y2=\"" + num(py) +
           "\" stroke=\"#e4e4e4\" stroke-width=\"1\"/>\n";
    svg += "<text x=\"" + num(left - 8) + "\" y=\"" + num(py + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"11\" fill=\"#444\">" +
           tick_label(t) + "</text>\n";
  }
  svg += "<rect x=\"" + num(left) + "\" y=\"" + num(top) + "\" width=\"" +
         num(plot_w) + "\" height=\"" + num(plot_h) +
         "\" fill=\"none\" stroke=\"#888\" stroke-width=\"1\"/>\n";
  svg += "<text x=\"" + num(left + plot_w / 2) + "\" y=\"" + num(h - 10) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\" fill=\"#222\">" +
         escape_xml(layout.x_label) + "</text>\n";
  svg += "<text x=\"16\" y=\"" + num(top + plot_h / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\" fill=\"#222\" transform=\"rotate(-90 16 " +
         num(top + plot_h / 2) + ")\">" +
         escape_xml(layout.y_label) + "</text>\n";

  for (const PlotSeries& s : series) {
    if (s.draw_line && s.x.size() > 1) {
      std::string points;
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (i > 0) points += ' ';
        points += num(sx(s.x[i])) + "," + num(sy(s.y[i]));
      }
      svg += "<polyline points=\"" + points + "\" fill=\"none\" stroke=\"" +
             s.color + "\" stroke-width=\"1.6\"/>\n";
    }
    if (s.draw_markers) {
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        svg += "<circle cx=\"" + num(sx(s.x[i])) + "\" cy=\"" +
               num(sy(s.y[i])) + "\" r=\"3\" fill=\"" + s.color + "\"/>\n";
      }
    }
  }

  // Legend, top-right inside the plot frame.
  double ly = top + 14;
  for (const PlotSeries& s : series) {
    if (s.name.empty()) continue;
    svg += "<rect x=\"" + num(left + plot_w - 150) + "\" y=\"" + num(ly - 9) +
           "\" width=\"10\" height=\"10\" fill=\"" + s.color + "\"/>\n";
    svg += "<text x=\"" + num(left + plot_w - 135) + "\" y=\"" + num(ly) +
           "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#222\">" +
           escape_xml(s.name) + "</text>\n";
    ly += 16;
  }

  svg += "</svg>\n";
  return svg;
}

void write_svg_plot(const std::filesystem::path& path,
                    const PlotLayout& layout,
                    const std::vector<PlotSeries>& series) {
  write_text_file(path, render_svg_plot(layout, series));
}

}  // namespace dartskill
