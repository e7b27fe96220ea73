// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace polyband {

/// 2-D point in normalized image coordinates ([0,1] on both axes, y down).
struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point& a, const Point& b) = default;
};

/// Ordered list of vertices. Closed implicitly (last connects back to first).
using Polygon = std::vector<Point>;

/// Signed shoelace area. Positive for counter-clockwise vertex order in a
/// y-up frame; callers that only care about magnitude take std::abs.
inline double polygon_signed_area(const Polygon& poly) {
  const std::size_t n = poly.size();
  if (n < 3) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point& p = poly[i];
    const Point& q = poly[(i + 1) % n];
    acc += p.x * q.y - q.x * p.y;
  }
  return 0.5 * acc;
}

inline double polygon_area(const Polygon& poly) {
  return std::abs(polygon_signed_area(poly));
}

namespace detail {

inline double cross(const Point& o, const Point& a, const Point& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

inline bool on_segment(const Point& p, const Point& q, const Point& r) {
  return std::min(p.x, r.x) <= q.x && q.x <= std::max(p.x, r.x) &&
         std::min(p.y, r.y) <= q.y && q.y <= std::max(p.y, r.y);
}

/// True when segments [p1,p2] and [p3,p4] share any point.
inline bool segments_intersect(const Point& p1, const Point& p2,
                               const Point& p3, const Point& p4) {
  const double d1 = cross(p3, p4, p1);
  const double d2 = cross(p3, p4, p2);
  const double d3 = cross(p1, p2, p3);
  const double d4 = cross(p1, p2, p4);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
      ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
    return true;
  }
  if (d1 == 0 && on_segment(p3, p1, p4)) return true;
  if (d2 == 0 && on_segment(p3, p2, p4)) return true;
  if (d3 == 0 && on_segment(p1, p3, p2)) return true;
  if (d4 == 0 && on_segment(p1, p4, p2)) return true;
  return false;
}

}  // namespace detail

/// Brute-force simplicity test: no two non-adjacent edges intersect.
/// O(n^2); contours here are a few dozen vertices at most.
inline bool polygon_is_simple(const Polygon& poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a1 = poly[i];
    const Point& a2 = poly[(i + 1) % n];
    for (std::size_t j = i + 1; j < n; ++j) {
      // Skip edges sharing a vertex with edge i.
      if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
      if (detail::segments_intersect(a1, a2, poly[j], poly[(j + 1) % n])) {
        return false;
      }
    }
  }
  return true;
}

/// Even-odd point containment. Well-defined for self-intersecting inputs.
inline bool point_in_polygon(const Point& p, const Polygon& poly) {
  const std::size_t n = poly.size();
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point& a = poly[i];
    const Point& b = poly[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double xcross = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x;
      if (p.x < xcross) inside = !inside;
    }
  }
  return inside;
}

struct BoundingBox {
  double min_x = 0, min_y = 0, max_x = 0, max_y = 0;
};

inline BoundingBox polygon_bounds(const Polygon& poly) {
  BoundingBox box;
  if (poly.empty()) return box;
  box.min_x = box.max_x = poly[0].x;
  box.min_y = box.max_y = poly[0].y;
  for (const Point& p : poly) {
    box.min_x = std::min(box.min_x, p.x);
    box.max_x = std::max(box.max_x, p.x);
    box.min_y = std::min(box.min_y, p.y);
    box.max_y = std::max(box.max_y, p.y);
  }
  return box;
}

}  // namespace polyband
