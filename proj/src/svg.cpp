#include "bmckde/svg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bmckde/io.hpp"

namespace bmckde {

namespace {

//! Pixel coordinates rounded to 1/100 px keep the output compact and
//! locale-independent.
std::string px(double v) {
  return format_double(std::round(v * 100.0) / 100.0);
}

//! Round tick labels to a sensible precision for display.
std::string tick_label(double v) {
  const double r = std::round(v * 1e4) / 1e4;
  return format_double(r == 0.0 ? 0.0 : r);
}

}  // namespace

SvgPlot::SvgPlot(int width, int height, std::string title)
    : width_(width), height_(height), title_(std::move(title)) {
  if (width_ < 100 || height_ < 100) {
    throw std::invalid_argument("svg canvas too small");
  }
}

void SvgPlot::add_curve(const std::vector<double>& x,
                        const std::vector<double>& y,
                        const std::string& color, double stroke_width,
                        const std::string& dash) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("curve needs >= 2 matching points");
  }
  curves_.push_back({x, y, color, stroke_width, dash});
}

std::string SvgPlot::render() const {
  if (curves_.empty()) throw std::invalid_argument("plot has no curves");

  double x_lo = curves_[0].x[0], x_hi = x_lo;
  double y_lo = curves_[0].y[0], y_hi = y_lo;
  for (const Curve& c : curves_) {
    for (double v : c.x) {
      x_lo = std::min(x_lo, v);
      x_hi = std::max(x_hi, v);
    }
    for (double v : c.y) {
      y_lo = std::min(y_lo, v);
      y_hi = std::max(y_hi, v);
    }
  }
  if (x_hi == x_lo) x_hi = x_lo + 1.0;
  if (y_hi == y_lo) y_hi = y_lo + 1.0;

  const double ml = 60.0, mr = 15.0, mt = title_.empty() ? 15.0 : 35.0,
               mb = 40.0;
  const double pw = width_ - ml - mr, ph = height_ - mt - mb;
  const auto to_px_x = [&](double v) {
    return ml + pw * (v - x_lo) / (x_hi - x_lo);
  };
  const auto to_px_y = [&](double v) {
    return mt + ph * (1.0 - (v - y_lo) / (y_hi - y_lo));
  };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(width_) + "\" height=\"" + std::to_string(height_) +
         "\" viewBox=\"0 0 " + std::to_string(width_) + " " +
         std::to_string(height_) + "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!title_.empty()) {
    out += "<text x=\"" + px(width_ / 2.0) +
           "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"14\">" +
           title_ + "</text>\n";
  }

  // Axes box.
  out += "<rect x=\"" + px(ml) + "\" y=\"" + px(mt) + "\" width=\"" + px(pw) +
         "\" height=\"" + px(ph) +
         "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";

  // Ticks: 5 per axis, inclusive of the range ends.
  constexpr int kTicks = 5;
  for (int i = 0; i < kTicks; ++i) {
    const double fx = x_lo + (x_hi - x_lo) * i / (kTicks - 1);
    const double cx = to_px_x(fx);
    out += "<line x1=\"" + px(cx) + "\" y1=\"" + px(mt + ph) + "\" x2=\"" +
           px(cx) + "\" y2=\"" + px(mt + ph + 5) +
           "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    out += "<text x=\"" + px(cx) + "\" y=\"" + px(mt + ph + 18) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"11\">" +
           tick_label(fx) + "</text>\n";

    const double fy = y_lo + (y_hi - y_lo) * i / (kTicks - 1);
    const double cy = to_px_y(fy);
    out += "<line x1=\"" + px(ml - 5) + "\" y1=\"" + px(cy) + "\" x2=\"" +
           px(ml) + "\" y2=\"" + px(cy) +
           "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    out += "<text x=\"" + px(ml - 8) + "\" y=\"" + px(cy + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"11\">" +
           tick_label(fy) + "</text>\n";
  }

  for (const Curve& c : curves_) {
    out += "<polyline fill=\"none\" stroke=\"" + c.color +
           "\" stroke-width=\"" + format_double(c.stroke_width) + "\"";
    if (!c.dash.empty()) out += " stroke-dasharray=\"" + c.dash + "\"";
    out += " points=\"";
    for (std::size_t i = 0; i < c.x.size(); ++i) {
      if (i) out += " ";
      out += px(to_px_x(c.x[i])) + "," + px(to_px_y(c.y[i]));
    }
    out += "\"/>\n";
  }
  out += "</svg>\n";
  return out;
}

void SvgPlot::write(const std::string& path) const {
  write_text_atomic(path, render());
}

}  // namespace bmckde
