#include "fpme/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "fpme/error.hpp"

namespace fpme {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
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

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

struct Axis {
  double lo, hi;
  bool log;
  double map(double v, double p0, double p1) const {
    double a = log ? std::log10(v) : v;
    double t = hi > lo ? (a - lo) / (hi - lo) : 0.5;
    return p0 + t * (p1 - p0);
  }
};

bool drawable(double v, bool log) { return std::isfinite(v) && (!log || v > 0.0); }

Axis make_axis(const std::vector<double>& vals, bool log) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : vals) {
    double a = log ? std::log10(v) : v;
    lo = std::min(lo, a);
    hi = std::max(hi, a);
  }
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  } else {
    double pad = 0.04 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
  return {lo, hi, log};
}

}  // namespace

std::string render_svg(const PlotSpec& spec) {
  std::vector<double> xs, ys;
  for (const PlotSeries& s : spec.series)
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i)
      if (drawable(s.x[i], spec.log_x) && drawable(s.y[i], spec.log_y)) {
        xs.push_back(s.x[i]);
        ys.push_back(s.y[i]);
      }
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(spec.title)
     << "</text>\n";
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
  os << "<rect x=\"" << x0 << "\" y=\"" << y1 << "\" width=\"" << x1 - x0 << "\" height=\"" << y0 - y1
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << kHeight - 12 << "\" text-anchor=\"middle\">"
     << escape(spec.x_label) << (spec.log_x ? " (log)" : "") << "</text>\n";
  os << "<text transform=\"translate(16," << (y0 + y1) / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
     << escape(spec.y_label) << (spec.log_y ? " (log)" : "") << "</text>\n";
  if (xs.empty()) {
    os << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << (y0 + y1) / 2
       << "\" text-anchor=\"middle\" fill=\"grey\">no drawable data</text>\n</svg>\n";
    return os.str();
  }
  const Axis ax = make_axis(xs, spec.log_x);
  const Axis ay = make_axis(ys, spec.log_y);
  for (int t = 0; t <= 4; ++t) {
    double fx = ax.lo + (ax.hi - ax.lo) * t / 4.0;
    double fy = ay.lo + (ay.hi - ay.lo) * t / 4.0;
    double px = x0 + (x1 - x0) * t / 4.0;
    double py = y0 + (y1 - y0) * t / 4.0;
    os << "<text x=\"" << px << "\" y=\"" << y0 + 16 << "\" text-anchor=\"middle\" font-size=\"10\">"
       << num(spec.log_x ? std::pow(10.0, fx) : fx) << "</text>\n";
    os << "<text x=\"" << x0 - 6 << "\" y=\"" << py + 4 << "\" text-anchor=\"end\" font-size=\"10\">"
       << num(spec.log_y ? std::pow(10.0, fy) : fy) << "</text>\n";
  }
  for (std::size_t k = 0; k < spec.series.size(); ++k) {
    const PlotSeries& s = spec.series[k];
    const char* color = kColors[k % (sizeof kColors / sizeof kColors[0])];
    std::ostringstream pts;
    std::size_t count = 0;
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!drawable(s.x[i], spec.log_x) || !drawable(s.y[i], spec.log_y)) continue;
      double px = ax.map(s.x[i], x0, x1), py = ay.map(s.y[i], y0, y1);
      pts << (count ? " " : "") << num(px) << ',' << num(py);
      if (s.markers)
        os << "<circle cx=\"" << num(px) << "\" cy=\"" << num(py) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
      ++count;
    }
    if (count > 1)
      os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"" << pts.str()
         << "\"/>\n";
    os << "<text x=\"" << x1 - 8 << "\" y=\"" << y1 + 16 + 14 * k << "\" text-anchor=\"end\" fill=\"" << color
       << "\">" << escape(s.label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string render_heatmap_svg(const Field& f, const std::string& title) {
  const Grid& g = f.grid();
  require(g.dim() == 2, ErrorCode::DimensionError, "heat map needs a 2D field");
  // Block averages keep the file small on fine grids.
  const int block = std::max(1, g.cells() / 128);
  const int n = g.cells() / block;
  std::vector<double> avg(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < g.cells(); ++i)
    for (int j = 0; j < g.cells(); ++j)
      avg[static_cast<std::size_t>(i / block) * n + j / block] += f[g.flat({i, j, 0})] / (block * block);
  const double lo = *std::min_element(avg.begin(), avg.end());
  const double hi = *std::max_element(avg.begin(), avg.end());
  const double size = 512.0;
  const double cell = size / n;
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size + 20 << "\" height=\"" << size + 50
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << (size + 20) / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(title)
     << " (max " << num(f.max()) << ")</text>\n";
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double v = avg[static_cast<std::size_t>(i) * n + j];
      int shade = hi > lo ? static_cast<int>(std::lround(255.0 * (1.0 - (v - lo) / (hi - lo)))) : 255;
      os << "<rect x=\"" << num(10 + i * cell) << "\" y=\"" << num(40 + (n - 1 - j) * cell) << "\" width=\""
         << num(cell) << "\" height=\"" << num(cell) << "\" fill=\"rgb(" << shade << ',' << shade << ',' << shade
         << ")\"/>\n";
    }
  os << "</svg>\n";
  return os.str();
}

}  // namespace fpme
