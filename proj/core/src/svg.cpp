#include "dsekit/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "dsekit/errors.hpp"

namespace dsekit {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

std::string escape_xml(const std::string& s) {
  std::string out;
  out.reserve(s.size());
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
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void include(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  // 5% margin each side; degenerate ranges get a unit-ish pad.
  void pad() {
    if (!(lo <= hi)) {
      lo = 0.0;
      hi = 1.0;
    }
    double span = hi - lo;
    if (span <= 0.0) {
      span = std::max(1.0, std::abs(lo));
    }
    lo -= 0.05 * span;
    hi += 0.05 * span;
  }
};

}  // namespace

void write_line_svg(const std::filesystem::path& path,
                    const std::string& title, const std::string& x_label,
                    const std::string& y_label,
                    const std::vector<PlotSeries>& series, bool log_y) {
  auto ymap = [log_y](double v) {
    return log_y ? std::log10(std::max(v, 1e-30)) : v;
  };

  Range xr, yr;
  for (const auto& s : series) {
    for (double v : s.x) {
      xr.include(v);
    }
    for (double v : s.y) {
      yr.include(ymap(v));
    }
  }
  xr.pad();
  yr.pad();

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * plot_w; };
  auto py = [&](double y) {
    return kTop + (1.0 - (ymap(y) - yr.lo) / (yr.hi - yr.lo)) * plot_h;
  };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " "
      << kHeight << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"15\">"
      << escape_xml(title) << "</text>\n";

  // Frame.
  svg << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w
      << "\" height=\"" << plot_h
      << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";

  // Ticks and grid.
  const int n_ticks = 6;
  for (int i = 0; i < n_ticks; ++i) {
    const double fx = xr.lo + (xr.hi - xr.lo) * i / (n_ticks - 1);
    const double gx = kLeft + plot_w * i / (n_ticks - 1);
    svg << "<line x1=\"" << gx << "\" y1=\"" << kTop << "\" x2=\"" << gx
        << "\" y2=\"" << kTop + plot_h
        << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n"
        << "<text x=\"" << gx << "\" y=\"" << kTop + plot_h + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"11\">"
        << num(fx) << "</text>\n";

    const double fy = yr.lo + (yr.hi - yr.lo) * i / (n_ticks - 1);
    const double gy = kTop + plot_h * (1.0 - static_cast<double>(i) / (n_ticks - 1));
    svg << "<line x1=\"" << kLeft << "\" y1=\"" << gy << "\" x2=\""
        << kLeft + plot_w << "\" y2=\"" << gy
        << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n"
        << "<text x=\"" << kLeft - 6 << "\" y=\"" << gy + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"11\">"
        << (log_y ? "1e" + num(fy) : num(fy)) << "</text>\n";
  }

  // Axis labels.
  svg << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 12
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\">"
      << escape_xml(x_label) << "</text>\n"
      << "<text x=\"16\" y=\"" << kTop + plot_h / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\" transform=\"rotate(-90 16 "
      << kTop + plot_h / 2 << ")\">" << escape_xml(y_label) << "</text>\n";

  // Series polylines + legend.
  double legend_y = kTop + 14;
  for (const auto& s : series) {
    svg << "<polyline fill=\"none\" stroke=\"" << escape_xml(s.color)
        << "\" stroke-width=\"1.2\" points=\"";
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      svg << num(px(s.x[i])) << ',' << num(py(s.y[i])) << ' ';
    }
    svg << "\"/>\n";
    svg << "<text x=\"" << kLeft + plot_w - 8 << "\" y=\"" << legend_y
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"12\" fill=\""
        << escape_xml(s.color) << "\">" << escape_xml(s.label) << "</text>\n";
    legend_y += 16;
  }

  svg << "</svg>\n";

  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open for writing: " + path.string());
  }
  out << svg.str();
  if (!out) {
    throw IoError("write failed: " + path.string());
  }
}

}  // namespace dsekit
