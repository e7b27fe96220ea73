// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdio>
#include <string>
#include <vector>

#include "polyband/cpa.hpp"
#include "polyband/geometry.hpp"

namespace polyband {

/// Minimal SVG assembler for contours and heatmaps. Output is byte-stable:
/// fixed-precision coordinates, no timestamps, insertion order preserved.
class SvgWriter {
 public:
  explicit SvgWriter(int canvas = 640) : canvas_(canvas) {}

  void add_polygon(const Polygon& poly, const std::string& stroke,
                   const std::string& fill = "none", double stroke_width = 1.5,
                   double fill_opacity = 1.0) {
    if (poly.empty()) return;
    std::string elem = "<polygon points=\"" + points_attr(poly) + "\" fill=\"" +
                       fill + "\"";
    if (fill != "none" && fill_opacity < 1.0) {
      elem += " fill-opacity=\"" + fmt(fill_opacity) + "\"";
    }
    elem += " stroke=\"" + stroke + "\" stroke-width=\"" + fmt(stroke_width) +
            "\"/>";
    body_.push_back(std::move(elem));
  }

  void add_polyline(const std::vector<Point>& pts, const std::string& stroke,
                    double stroke_width = 1.5) {
    if (pts.empty()) return;
    body_.push_back("<polyline points=\"" + points_attr(pts) +
                    "\" fill=\"none\" stroke=\"" + stroke +
                    "\" stroke-width=\"" + fmt(stroke_width) + "\"/>");
  }

  /// Grayscale cell grid for one feature-map channel, placed with its
  /// top-left corner at (x, y) in normalized canvas units and spanning
  /// `extent` of the canvas. Values are min/max normalized over the map.
  void add_heatmap(const FeatureMap& map, int channel, double x, double y,
                   double extent) {
    double lo = map.at(0, 0, channel), hi = lo;
    for (int i = 0; i < map.height; ++i) {
      for (int j = 0; j < map.width; ++j) {
        lo = std::min(lo, map.at(i, j, channel));
        hi = std::max(hi, map.at(i, j, channel));
      }
    }
    const double range = hi - lo;
    const double cell_w = extent / map.width;
    const double cell_h = extent / map.height;
    for (int i = 0; i < map.height; ++i) {
      for (int j = 0; j < map.width; ++j) {
        const double unit =
            range > 0.0 ? (map.at(i, j, channel) - lo) / range : 0.0;
        const int level = static_cast<int>(unit * 255.0 + 0.5);
        const std::string color = "rgb(" + std::to_string(level) + "," +
                                  std::to_string(level) + "," +
                                  std::to_string(level) + ")";
        char rect[192];
        std::snprintf(rect, sizeof(rect),
                      "<rect x=\"%.3f\" y=\"%.3f\" width=\"%.3f\" "
                      "height=\"%.3f\" fill=\"%s\"/>",
                      (x + j * cell_w) * canvas_, (y + i * cell_h) * canvas_,
                      cell_w * canvas_, cell_h * canvas_, color.c_str());
        body_.push_back(rect);
      }
    }
  }

  std::string str() const {
    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
           std::to_string(canvas_) + "\" height=\"" + std::to_string(canvas_) +
           "\" viewBox=\"0 0 " + std::to_string(canvas_) + " " +
           std::to_string(canvas_) + "\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (const std::string& elem : body_) {
      out += elem;
      out += '\n';
    }
    out += "</svg>\n";
    return out;
  }

 private:
  std::string fmt(double v) const {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
  }

  std::string points_attr(const std::vector<Point>& pts) const {
    std::string attr;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i) attr += ' ';
      attr += fmt(pts[i].x * canvas_) + "," + fmt(pts[i].y * canvas_);
    }
    return attr;
  }

  int canvas_;
  std::vector<std::string> body_;
};

}  // namespace polyband
