#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace dsekit {

/// One polyline on a plot.
struct PlotSeries {
  std::string label;
  std::string color;  // SVG color name or #rrggbb
  std::vector<double> x;
  std::vector<double> y;
};

/// Hand-built SVG line plot: axes with 5% data margin, tick labels,
/// legend, one polyline per series. log_y plots log10(y) with
/// nonpositive values clamped to a tiny floor.
void write_line_svg(const std::filesystem::path& path,
                    const std::string& title, const std::string& x_label,
                    const std::string& y_label,
                    const std::vector<PlotSeries>& series, bool log_y = false);

}  // namespace dsekit
