#include "choitomo/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace choitomo {

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 70, kRight = 610, kTop = 40, kBottom = 370;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

std::string svg_line_chart(const std::string& title, const std::string& x_label,
                           const std::string& y_label, const std::vector<double>& x,
                           bool log_x, const std::vector<SvgSeries>& series) {
  for (const SvgSeries& s : series)
    if (s.y.size() != x.size())
      throw std::invalid_argument("svg_line_chart: series length mismatch");

  std::vector<double> xs = x;
  if (log_x)
    for (double& v : xs) v = std::log10(std::max(v, 1e-300));

  double x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;
  if (!xs.empty()) {
    x_lo = *std::min_element(xs.begin(), xs.end());
    x_hi = *std::max_element(xs.begin(), xs.end());
  }
  bool have_y = false;
  for (const SvgSeries& s : series)
    for (double v : s.y) {
      if (!have_y) {
        y_lo = y_hi = v;
        have_y = true;
      }
      y_lo = std::min(y_lo, v);
      y_hi = std::max(y_hi, v);
    }
  if (x_hi - x_lo < 1e-12) {
    x_lo -= 0.5;
    x_hi += 0.5;
  }
  if (y_hi - y_lo < 1e-12) {
    y_lo -= (std::abs(y_lo) > 1e-12 ? 0.05 * std::abs(y_lo) : 0.5);
    y_hi += (std::abs(y_hi) > 1e-12 ? 0.05 * std::abs(y_hi) : 0.5);
  }

  auto sx = [&](double v) { return kLeft + (v - x_lo) / (x_hi - x_lo) * (kRight - kLeft); };
  auto sy = [&](double v) { return kBottom - (v - y_lo) / (y_hi - y_lo) * (kBottom - kTop); };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(kWidth) +
         "\" height=\"" + fmt(kHeight) + "\" viewBox=\"0 0 " + fmt(kWidth) + " " +
         fmt(kHeight) + "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + fmt(kWidth / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\" font-family=\"sans-serif\">" +
         title + "</text>\n";

  // frame
  out += "<polyline fill=\"none\" stroke=\"black\" points=\"" + fmt(kLeft) + "," + fmt(kTop) +
         " " + fmt(kLeft) + "," + fmt(kBottom) + " " + fmt(kRight) + "," + fmt(kBottom) +
         "\"/>\n";

  // x ticks: decades when log, else 5 evenly spaced
  if (log_x) {
    for (int d = static_cast<int>(std::ceil(x_lo - 1e-9)); d <= std::floor(x_hi + 1e-9); ++d) {
      double px = sx(d);
      out += "<line x1=\"" + fmt(px) + "\" y1=\"" + fmt(kBottom) + "\" x2=\"" + fmt(px) +
             "\" y2=\"" + fmt(kBottom + 6) + "\" stroke=\"black\"/>\n";
      out += "<text x=\"" + fmt(px) + "\" y=\"" + fmt(kBottom + 22) +
             "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\">1e" +
             std::to_string(d) + "</text>\n";
    }
  } else {
    for (int i = 0; i <= 4; ++i) {
      double v = x_lo + (x_hi - x_lo) * i / 4.0;
      double px = sx(v);
      out += "<line x1=\"" + fmt(px) + "\" y1=\"" + fmt(kBottom) + "\" x2=\"" + fmt(px) +
             "\" y2=\"" + fmt(kBottom + 6) + "\" stroke=\"black\"/>\n";
      out += "<text x=\"" + fmt(px) + "\" y=\"" + fmt(kBottom + 22) +
             "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\">" +
             fmt(v) + "</text>\n";
    }
  }
  // y ticks
  for (int i = 0; i <= 4; ++i) {
    double v = y_lo + (y_hi - y_lo) * i / 4.0;
    double py = sy(v);
    out += "<line x1=\"" + fmt(kLeft - 6) + "\" y1=\"" + fmt(py) + "\" x2=\"" + fmt(kLeft) +
           "\" y2=\"" + fmt(py) + "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + fmt(kLeft - 10) + "\" y=\"" + fmt(py + 4) +
           "\" text-anchor=\"end\" font-size=\"12\" font-family=\"sans-serif\">" + fmt(v) +
           "</text>\n";
  }

  out += "<text x=\"" + fmt((kLeft + kRight) / 2) + "\" y=\"" + fmt(kHeight - 8) +
         "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\">" + x_label +
         "</text>\n";
  out += "<text x=\"16\" y=\"" + fmt((kTop + kBottom) / 2) +
         "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\" transform=\"rotate(-90 16 " +
         fmt((kTop + kBottom) / 2) + ")\">" + y_label + "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % 5];
    std::string points;
    for (std::size_t i = 0; i < xs.size(); ++i)
      points += fmt(sx(xs[i])) + "," + fmt(sy(series[s].y[i])) + " ";
    out += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
    for (std::size_t i = 0; i < xs.size(); ++i)
      out += "<circle cx=\"" + fmt(sx(xs[i])) + "\" cy=\"" + fmt(sy(series[s].y[i])) +
             "\" r=\"3\" fill=\"" + color + "\"/>\n";
    out += "<text x=\"" + fmt(kRight - 4) + "\" y=\"" + fmt(kTop + 16 + 16 * static_cast<double>(s)) +
           "\" text-anchor=\"end\" font-size=\"12\" font-family=\"sans-serif\" fill=\"" +
           color + "\">" + series[s].label + "</text>\n";
  }
  if (series.empty())
    out += "<text x=\"" + fmt((kLeft + kRight) / 2) + "\" y=\"" + fmt((kTop + kBottom) / 2) +
           "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\">no data</text>\n";

  out += "</svg>\n";
  return out;
}

}  // namespace choitomo
