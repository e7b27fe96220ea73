// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "polyband/band.hpp"
#include "polyband/curve.hpp"
#include "polyband/errors.hpp"
#include "polyband/geometry.hpp"

namespace polyband {

inline constexpr double kMinIndependentSpread = 1e-6;
inline constexpr double kMaxFitCondition = 1e10;

/// Ground-truth instance: source polygon plus the four resampled point sets.
/// class_indicator is 1 for a text instance and 0 for a padded non-text
/// element, whose point sets stay empty.
struct GtInstance {
  Polygon polygon;
  SampledPoints top;
  SampledPoints bottom;
  SampledPoints left;
  SampledPoints right;
  int class_indicator = 1;

  GtInstance() {
    left.axis = Axis::Vertical;
    right.axis = Axis::Vertical;
  }
};

/// Non-text padding element used to grow a ground-truth set to size N.
inline GtInstance padding_instance() {
  GtInstance gt;
  gt.class_indicator = 0;
  return gt;
}

struct SideSplit {
  std::vector<Point> top;
  std::vector<Point> bottom;
  std::vector<Point> left;
  std::vector<Point> right;
};

/// Splits an annotated polygon into four ordered side point lists.
///
/// The polygon must have 2n vertices (n >= 2) in the dataset convention:
/// the first n run along the top left to right, the last n along the bottom
/// right to left. Left and right sides are the connecting 2-point chords.
inline SideSplit split_polygon_sides(const Polygon& poly) {
  const std::size_t count = poly.size();
  if (count < 4 || count % 2 != 0) {
    throw FormatError("split_polygon_sides: polygon must have an even vertex "
                      "count of at least 4, got " +
                      std::to_string(count));
  }
  const std::size_t n = count / 2;
  SideSplit split;
  split.top.assign(poly.begin(), poly.begin() + n);
  split.bottom.assign(poly.rbegin(), poly.rbegin() + n);  // reversed tail
  split.left = {poly.front(), poly.back()};
  split.right = {poly[n - 1], poly[n]};
  return split;
}

namespace detail {

/// Solves the 3x3 system M x = b by Cramer's rule. Returns false when the
/// determinant vanishes.
inline bool solve3(const std::array<std::array<double, 3>, 3>& m,
                   const std::array<double, 3>& b, std::array<double, 3>& x) {
  const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                     m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                     m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  if (det == 0.0 || !std::isfinite(det)) return false;
  std::array<std::array<double, 3>, 3> t;
  for (int c = 0; c < 3; ++c) {
    t = m;
    for (int r = 0; r < 3; ++r) t[r][c] = b[r];
    const double detc = t[0][0] * (t[1][1] * t[2][2] - t[1][2] * t[2][1]) -
                        t[0][1] * (t[1][0] * t[2][2] - t[1][2] * t[2][0]) +
                        t[0][2] * (t[1][0] * t[2][1] - t[1][1] * t[2][0]);
    x[c] = detc / det;
  }
  return true;
}

/// Infinity-norm condition number of a symmetric 3x3 matrix via the
/// adjugate. Returns +inf for a singular matrix.
inline double condition3(const std::array<std::array<double, 3>, 3>& m) {
  const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                     m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                     m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  double norm_m = 0.0, norm_adj = 0.0;
  std::array<std::array<double, 3>, 3> adj;
  adj[0][0] = m[1][1] * m[2][2] - m[1][2] * m[2][1];
  adj[0][1] = m[0][2] * m[2][1] - m[0][1] * m[2][2];
  adj[0][2] = m[0][1] * m[1][2] - m[0][2] * m[1][1];
  adj[1][0] = m[1][2] * m[2][0] - m[1][0] * m[2][2];
  adj[1][1] = m[0][0] * m[2][2] - m[0][2] * m[2][0];
  adj[1][2] = m[0][2] * m[1][0] - m[0][0] * m[1][2];
  adj[2][0] = m[1][0] * m[2][1] - m[1][1] * m[2][0];
  adj[2][1] = m[0][1] * m[2][0] - m[0][0] * m[2][1];
  adj[2][2] = m[0][0] * m[1][1] - m[0][1] * m[1][0];
  for (int r = 0; r < 3; ++r) {
    double row_m = 0.0, row_adj = 0.0;
    for (int c = 0; c < 3; ++c) {
      row_m += std::abs(m[r][c]);
      row_adj += std::abs(adj[r][c]);
    }
    norm_m = std::max(norm_m, row_m);
    norm_adj = std::max(norm_adj, row_adj);
  }
  if (det == 0.0 || !std::isfinite(det)) {
    return std::numeric_limits<double>::infinity();
  }
  return norm_m * norm_adj / std::abs(det);
}

}  // namespace detail

/// Least-squares quadratic through the points in the given axis, via the
/// 3x3 normal equations. With exactly two points, or when the normal matrix
/// is ill-conditioned (cond > 1e10), the degree falls back to 1. The domain
/// bounds are the min/max of the independent coordinate.
inline CurveSegment fit_side(const std::vector<Point>& points, Axis axis) {
  const std::size_t n = points.size();
  if (n < 2) throw ArgumentError("fit_side: need at least 2 points");

  std::vector<double> u(n), w(n);
  for (std::size_t i = 0; i < n; ++i) {
    u[i] = independent_coord(points[i], axis);
    w[i] = dependent_coord(points[i], axis);
  }
  const auto [umin_it, umax_it] = std::minmax_element(u.begin(), u.end());
  const double umin = *umin_it, umax = *umax_it;
  if (umax - umin < kMinIndependentSpread) {
    throw DegeneracyError("fit_side: zero spread of independent coordinate");
  }

  CurveSegment seg;
  seg.axis = axis;
  seg.e0 = umin;
  seg.e1 = umax;

  // Power sums for the normal equations.
  double s0 = static_cast<double>(n), s1 = 0, s2 = 0, s3 = 0, s4 = 0;
  double t0 = 0, t1 = 0, t2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ui = u[i], ui2 = ui * ui;
    s1 += ui;
    s2 += ui2;
    s3 += ui2 * ui;
    s4 += ui2 * ui2;
    t0 += w[i];
    t1 += ui * w[i];
    t2 += ui2 * w[i];
  }

  bool linear = (n == 2);
  if (!linear) {
    const std::array<std::array<double, 3>, 3> m = {
        {{s0, s1, s2}, {s1, s2, s3}, {s2, s3, s4}}};
    if (detail::condition3(m) > kMaxFitCondition) {
      linear = true;
    } else {
      std::array<double, 3> coef;  // (a0, a1, a2)
      if (!detail::solve3(m, {t0, t1, t2}, coef)) {
        linear = true;
      } else {
        seg.a0 = coef[0];
        seg.a1 = coef[1];
        seg.a2 = coef[2];
      }
    }
  }
  if (linear) {
    // Degree-1 normal equations; nonsingular whenever the spread check holds.
    const double det = s0 * s2 - s1 * s1;
    seg.a2 = 0.0;
    seg.a1 = (s0 * t1 - s1 * t0) / det;
    seg.a0 = (s2 * t0 - s1 * t1) / det;
  }
  return seg;
}

/// Converts an annotated polygon into the four resampled ground-truth point
/// sets: each side is fitted, then resampled at K+1 equally spaced
/// independent coordinates spanning the side's extent.
inline GtInstance polygon_to_gt(const Polygon& poly, int k) {
  if (k < 1) throw ArgumentError("polygon_to_gt: K must be >= 1");
  const SideSplit split = split_polygon_sides(poly);
  GtInstance gt;
  gt.polygon = poly;
  gt.class_indicator = 1;
  gt.top = sample_curve(fit_side(split.top, Axis::Horizontal), k);
  gt.bottom = sample_curve(fit_side(split.bottom, Axis::Horizontal), k);
  gt.left = sample_curve(fit_side(split.left, Axis::Vertical), k);
  gt.right = sample_curve(fit_side(split.right, Axis::Vertical), k);
  return gt;
}

/// Samples a band into a dataset-convention annotation polygon: n points
/// along the top left to right, then n along the bottom right to left.
/// This is the layout split_polygon_sides expects back.
inline Polygon band_to_annotation_polygon(const PolyBand& band,
                                          int points_per_side) {
  if (points_per_side < 2) {
    throw ArgumentError("band_to_annotation_polygon: need >= 2 points per side");
  }
  const SampledPoints top = sample_curve(band.top, points_per_side - 1);
  const SampledPoints bottom = sample_curve(band.bottom, points_per_side - 1);
  Polygon poly(top.points);
  poly.insert(poly.end(), bottom.points.rbegin(), bottom.points.rend());
  return poly;
}

/// Fits a full reference band from an annotated polygon.
inline PolyBand polygon_to_band(const Polygon& poly) {
  const SideSplit split = split_polygon_sides(poly);
  PolyBand pb;
  pb.top = fit_side(split.top, Axis::Horizontal);
  pb.bottom = fit_side(split.bottom, Axis::Horizontal);
  pb.left = fit_side(split.left, Axis::Vertical);
  pb.right = fit_side(split.right, Axis::Vertical);
  return pb;
}

}  // namespace polyband
