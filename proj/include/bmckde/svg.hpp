#pragma once

#include <string>
#include <vector>

namespace bmckde {

//! Minimal line-plot writer: polylines over shared axes with ticks, no
//! external plotting dependency.  One <polyline> element per added curve,
//! so curve counts are checkable by scanning the output.
class SvgPlot {
 public:
  SvgPlot(int width, int height, std::string title = "");

  //! Add a curve; `dash` is an SVG stroke-dasharray (empty for solid).
  void add_curve(const std::vector<double>& x, const std::vector<double>& y,
                 const std::string& color, double stroke_width = 1.5,
                 const std::string& dash = "");

  //! Render the SVG document (axes fitted to the union of curve ranges).
  std::string render() const;

  //! Render and write atomically.
  void write(const std::string& path) const;

 private:
  struct Curve {
    std::vector<double> x, y;
    std::string color;
    double stroke_width;
    std::string dash;
  };
  int width_, height_;
  std::string title_;
  std::vector<Curve> curves_;
};

}  // namespace bmckde
