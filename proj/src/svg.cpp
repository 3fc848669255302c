#include "agecurve/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace agecurve::svg {

namespace {

constexpr int kMarginLeft = 64;
constexpr int kMarginRight = 24;
constexpr int kMarginTop = 40;
constexpr int kMarginBottom = 48;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

// 1-2-5 tick spacing covering [lo, hi] with roughly n intervals
std::vector<double> nice_ticks(double lo, double hi, int n) {
  const double span = hi - lo;
  if (!(span > 0.0)) return {lo};
  const double raw = span / std::max(n, 1);
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double mult : {1.0, 2.0, 5.0, 10.0}) {
    if (mag * mult >= raw) {
      step = mag * mult;
      break;
    }
  }
  std::vector<double> ticks;
  double t = std::ceil(lo / step) * step;
  for (; t <= hi + 1e-9 * span; t += step) {
    ticks.push_back(std::abs(t) < 1e-12 * span ? 0.0 : t);
  }
  return ticks;
}

}  // namespace

void write_line_chart(const std::filesystem::path& path, const ChartSpec& spec,
                      const std::vector<Series>& series, const std::vector<Band>& bands) {
  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
  double y_lo = x_lo, y_hi = -x_lo;
  auto grow = [&](const std::vector<double>& xs, const std::vector<double>& ys) {
    for (double v : xs) {
      x_lo = std::min(x_lo, v);
      x_hi = std::max(x_hi, v);
    }
    for (double v : ys) {
      y_lo = std::min(y_lo, v);
      y_hi = std::max(y_hi, v);
    }
  };
  for (const Series& s : series) grow(s.x, s.y);
  for (const Band& b : bands) {
    grow(b.x, b.lo);
    grow(b.x, b.hi);
  }
  if (!std::isfinite(x_lo) || !std::isfinite(y_lo)) {
    throw std::invalid_argument("write_line_chart: no data");
  }
  if (x_hi == x_lo) x_hi = x_lo + 1.0;
  if (y_hi == y_lo) y_hi = y_lo + 1.0;
  const double y_pad = 0.05 * (y_hi - y_lo);
  y_lo -= y_pad;
  y_hi += y_pad;

  const double plot_w = spec.width - kMarginLeft - kMarginRight;
  const double plot_h = spec.height - kMarginTop - kMarginBottom;
  auto px = [&](double x) { return kMarginLeft + (x - x_lo) / (x_hi - x_lo) * plot_w; };
  auto py = [&](double y) { return kMarginTop + (1.0 - (y - y_lo) / (y_hi - y_lo)) * plot_h; };

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\""
      << spec.height << "\" viewBox=\"0 0 " << spec.width << ' ' << spec.height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!spec.title.empty()) {
    out << "<text x=\"" << spec.width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"15\">" << spec.title << "</text>\n";
  }

  for (double t : nice_ticks(x_lo, x_hi, 8)) {
    const double x = px(t);
    out << "<line x1=\"" << num(x) << "\" y1=\"" << num(py(y_lo)) << "\" x2=\"" << num(x)
        << "\" y2=\"" << num(py(y_hi)) << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << num(x) << "\" y=\"" << spec.height - kMarginBottom + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
        << tick_label(t) << "</text>\n";
  }
  for (double t : nice_ticks(y_lo, y_hi, 6)) {
    const double y = py(t);
    out << "<line x1=\"" << kMarginLeft << "\" y1=\"" << num(y) << "\" x2=\""
        << spec.width - kMarginRight << "\" y2=\"" << num(y)
        << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << kMarginLeft - 6 << "\" y=\"" << num(y + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << tick_label(t)
        << "</text>\n";
  }
  out << "<rect x=\"" << kMarginLeft << "\" y=\"" << kMarginTop << "\" width=\"" << num(plot_w)
      << "\" height=\"" << num(plot_h) << "\" fill=\"none\" stroke=\"#333333\"/>\n";

  for (const Band& b : bands) {
    out << "<path d=\"M";
    for (size_t i = 0; i < b.x.size(); ++i) {
      out << (i ? " L" : "") << num(px(b.x[i])) << ' ' << num(py(b.hi[i]));
    }
    for (size_t i = b.x.size(); i-- > 0;) {
      out << " L" << num(px(b.x[i])) << ' ' << num(py(b.lo[i]));
    }
    out << " Z\" fill=\"" << b.color << "\" fill-opacity=\"" << b.opacity << "\"/>\n";
  }

  for (const Series& s : series) {
    out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"" << s.width
        << '"';
    if (s.dashed) out << " stroke-dasharray=\"6,4\"";
    out << " points=\"";
    for (size_t i = 0; i < s.x.size(); ++i) {
      out << (i ? " " : "") << num(px(s.x[i])) << ',' << num(py(s.y[i]));
    }
    out << "\"/>\n";
  }

  int legend_y = kMarginTop + 14;
  for (const Series& s : series) {
    if (s.label.empty()) continue;
    out << "<line x1=\"" << kMarginLeft + 10 << "\" y1=\"" << legend_y - 4 << "\" x2=\""
        << kMarginLeft + 34 << "\" y2=\"" << legend_y - 4 << "\" stroke=\"" << s.color
        << "\" stroke-width=\"2\"" << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << "/>\n";
    out << "<text x=\"" << kMarginLeft + 40 << "\" y=\"" << legend_y
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << s.label << "</text>\n";
    legend_y += 16;
  }

  if (!spec.x_label.empty()) {
    out << "<text x=\"" << spec.width / 2 << "\" y=\"" << spec.height - 12
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << spec.x_label
        << "</text>\n";
  }
  if (!spec.y_label.empty()) {
    out << "<text x=\"16\" y=\"" << spec.height / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
        << "transform=\"rotate(-90 16 " << spec.height / 2 << ")\">" << spec.y_label
        << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace agecurve::svg
