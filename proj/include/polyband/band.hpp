// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "polyband/curve.hpp"
#include "polyband/errors.hpp"
#include "polyband/geometry.hpp"

namespace polyband {

/// Tolerances shared by the band operations.
inline constexpr double kDuplicateMergeTol = 1e-9;
inline constexpr double kDegenerateAreaTol = 1e-8;
inline constexpr double kOutOfFrameMargin = 0.1;

/// A text region as four bounded quadratic sides: top/bottom as y = f(x),
/// left/right as x = f(y). 20 scalars in total.
struct PolyBand {
  CurveSegment top;
  CurveSegment bottom;
  CurveSegment left;
  CurveSegment right;

  PolyBand() {
    left.axis = Axis::Vertical;
    right.axis = Axis::Vertical;
  }

  friend bool operator==(const PolyBand&, const PolyBand&) = default;
};

inline PolyBand canonicalized(const PolyBand& pb) {
  PolyBand out;
  out.top = canonicalized(pb.top);
  out.bottom = canonicalized(pb.bottom);
  out.left = canonicalized(pb.left);
  out.right = canonicalized(pb.right);
  return out;
}

/// Flattens to the 20-tuple ordering (per side: a2, a1, a0, e0, e1;
/// sides ordered top, bottom, left, right).
inline std::array<double, 20> flatten(const PolyBand& pb) {
  std::array<double, 20> v;
  const CurveSegment* sides[4] = {&pb.top, &pb.bottom, &pb.left, &pb.right};
  for (int s = 0; s < 4; ++s) {
    v[s * 5 + 0] = sides[s]->a2;
    v[s * 5 + 1] = sides[s]->a1;
    v[s * 5 + 2] = sides[s]->a0;
    v[s * 5 + 3] = sides[s]->e0;
    v[s * 5 + 4] = sides[s]->e1;
  }
  return v;
}

inline PolyBand unflatten(std::span<const double, 20> v) {
  PolyBand pb;
  CurveSegment* sides[4] = {&pb.top, &pb.bottom, &pb.left, &pb.right};
  for (int s = 0; s < 4; ++s) {
    sides[s]->a2 = v[s * 5 + 0];
    sides[s]->a1 = v[s * 5 + 1];
    sides[s]->a0 = v[s * 5 + 2];
    sides[s]->e0 = v[s * 5 + 3];
    sides[s]->e1 = v[s * 5 + 4];
  }
  pb.top.axis = Axis::Horizontal;
  pb.bottom.axis = Axis::Horizontal;
  pb.left.axis = Axis::Vertical;
  pb.right.axis = Axis::Vertical;
  return pb;
}

inline PolyBand unflatten(const std::array<double, 20>& v) {
  return unflatten(std::span<const double, 20>(v));
}

namespace detail {

inline bool nearly_equal_point(const Point& a, const Point& b, double tol) {
  return std::abs(a.x - b.x) <= tol && std::abs(a.y - b.y) <= tol;
}

inline void append_dedup(Polygon& out, const Point& p) {
  if (!out.empty() && nearly_equal_point(out.back(), p, kDuplicateMergeTol)) {
    return;
  }
  out.push_back(p);
}

}  // namespace detail

/// Closed contour around the band: top sampled left to right, right top to
/// bottom, bottom right to left, left bottom to top. Corner joining is pure
/// concatenation; consecutive duplicates within 1e-9 are merged.
inline Polygon band_to_contour(const PolyBand& pb, int k) {
  if (k < 1) throw ArgumentError("band_to_contour: K must be >= 1");
  const SampledPoints top = sample_curve(pb.top, k);
  const SampledPoints right = sample_curve(pb.right, k);
  const SampledPoints bottom = sample_curve(pb.bottom, k);
  const SampledPoints left = sample_curve(pb.left, k);

  Polygon poly;
  poly.reserve(4 * (static_cast<std::size_t>(k) + 1));
  for (const Point& p : top.points) detail::append_dedup(poly, p);
  for (const Point& p : right.points) detail::append_dedup(poly, p);
  for (auto it = bottom.points.rbegin(); it != bottom.points.rend(); ++it) {
    detail::append_dedup(poly, *it);
  }
  for (auto it = left.points.rbegin(); it != left.points.rend(); ++it) {
    detail::append_dedup(poly, *it);
  }
  while (poly.size() > 1 && detail::nearly_equal_point(poly.front(), poly.back(),
                                                       kDuplicateMergeTol)) {
    poly.pop_back();
  }
  if (poly.size() < 4 || polygon_area(poly) < kDegenerateAreaTol) {
    throw DegeneracyError("band_to_contour: degenerate band");
  }
  return poly;
}

/// One validation finding. Violations break the band contract; warnings
/// flag shapes that leave the frame but are still well-defined.
struct Diagnostic {
  enum class Severity { Warning, Violation };
  Severity severity = Severity::Violation;
  std::string side;
  std::string message;
};

/// Checks domain bounds, finiteness and the sampled footprint of each side.
/// Returns findings instead of throwing.
inline std::vector<Diagnostic> validate_band(const PolyBand& pb) {
  std::vector<Diagnostic> out;
  const struct {
    const char* name;
    const CurveSegment* seg;
  } sides[4] = {{"top", &pb.top},
                {"bottom", &pb.bottom},
                {"left", &pb.left},
                {"right", &pb.right}};
  for (const auto& [name, seg] : sides) {
    if (!curve_is_finite(*seg)) {
      out.push_back({Diagnostic::Severity::Violation, name,
                     "non-finite coefficient or bound"});
      continue;
    }
    if (seg->e0 > seg->e1) {
      out.push_back(
          {Diagnostic::Severity::Violation, name, "reversed domain (e0 > e1)"});
    }
    if (seg->e0 < 0.0 || seg->e0 > 1.0 || seg->e1 < 0.0 || seg->e1 > 1.0) {
      out.push_back({Diagnostic::Severity::Violation, name,
                     "domain bound outside [0,1]"});
    }
    // Sampled footprint check is a warning: the curve is well-defined, it
    // just wanders out of frame.
    const CurveSegment canon = canonicalized(*seg);
    constexpr int kProbeSegments = 8;
    for (int i = 0; i <= kProbeSegments; ++i) {
      const double t =
          detail::sample_param(canon.e0, canon.e1, i, kProbeSegments);
      const double f = eval_curve(canon, t);
      if (f < -kOutOfFrameMargin || f > 1.0 + kOutOfFrameMargin) {
        out.push_back({Diagnostic::Severity::Warning, name,
                       "sampled coordinate outside [-0.1, 1.1]"});
        break;
      }
    }
  }
  return out;
}

}  // namespace polyband
