// svg_plot.hpp — minimal SVG line-chart emitter (polyline, axis ticks,
// legend). Enough for the four metric charts; not a plotting library.

#pragma once

#include <string>
#include <vector>

namespace choitomo {

struct SvgSeries {
  std::string label;
  std::vector<double> y;
};

// x and every series must share a length; log_x draws decade ticks.
std::string svg_line_chart(const std::string& title, const std::string& x_label,
                           const std::string& y_label, const std::vector<double>& x,
                           bool log_x, const std::vector<SvgSeries>& series);

}  // namespace choitomo
