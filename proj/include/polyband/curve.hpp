// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "polyband/errors.hpp"
#include "polyband/geometry.hpp"

namespace polyband {

/// Orientation of a curve segment's independent variable.
enum class Axis {
  Horizontal,  // y = f(x); top and bottom sides
  Vertical,    // x = f(y); left and right sides
};

/// One polynomial side of a band: quadratic coefficients plus the bounded
/// definition domain of the independent variable. Coordinates are normalized
/// to [0,1]; pixel-space conversion happens only at I/O boundaries.
struct CurveSegment {
  double a2 = 0.0;
  double a1 = 0.0;
  double a0 = 0.0;
  double e0 = 0.0;
  double e1 = 1.0;
  Axis axis = Axis::Horizontal;

  friend bool operator==(const CurveSegment&, const CurveSegment&) = default;
};

inline bool curve_is_finite(const CurveSegment& seg) {
  return std::isfinite(seg.a2) && std::isfinite(seg.a1) &&
         std::isfinite(seg.a0) && std::isfinite(seg.e0) &&
         std::isfinite(seg.e1);
}

/// Returns the segment with e0 <= e1. Swapping the bounds does not change
/// the point set the segment denotes.
inline CurveSegment canonicalized(CurveSegment seg) {
  if (seg.e0 > seg.e1) std::swap(seg.e0, seg.e1);
  return seg;
}

/// Evaluates the quadratic at t. Evaluation outside [e0,e1] is permitted;
/// callers enforce domains.
inline double eval_curve(const CurveSegment& seg, double t) {
  if (!std::isfinite(t)) throw DomainError("eval_curve: non-finite t");
  return (seg.a2 * t + seg.a1) * t + seg.a0;
}

/// Points sampled from one curve at equal spacing of the independent
/// coordinate. Length is always k_segments + 1.
struct SampledPoints {
  std::vector<Point> points;
  int k_segments = 0;
  Axis axis = Axis::Horizontal;
};

namespace detail {

/// i-th of K+1 equally spaced parameters over [e0,e1]. Endpoints are exact.
inline double sample_param(double e0, double e1, int i, int k) {
  if (i == 0) return e0;
  if (i == k) return e1;
  return e0 + (e1 - e0) * (static_cast<double>(i) / k);
}

}  // namespace detail

/// Samples K+1 points at equal independent-coordinate spacing over the
/// segment's domain. Horizontal yields (t, f(t)); Vertical yields (f(t), t).
inline SampledPoints sample_curve(const CurveSegment& seg, int k) {
  if (k < 1) throw ArgumentError("sample_curve: K must be >= 1");
  SampledPoints out;
  out.k_segments = k;
  out.axis = seg.axis;
  out.points.reserve(static_cast<std::size_t>(k) + 1);
  for (int i = 0; i <= k; ++i) {
    const double t = detail::sample_param(seg.e0, seg.e1, i, k);
    const double f = eval_curve(seg, t);
    if (seg.axis == Axis::Horizontal) {
      out.points.push_back({t, f});
    } else {
      out.points.push_back({f, t});
    }
  }
  return out;
}

/// Independent coordinate of a sampled point for the given axis.
inline double independent_coord(const Point& p, Axis axis) {
  return axis == Axis::Horizontal ? p.x : p.y;
}

/// Dependent coordinate of a sampled point for the given axis.
inline double dependent_coord(const Point& p, Axis axis) {
  return axis == Axis::Horizontal ? p.y : p.x;
}

}  // namespace polyband
