// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#define BOOST_ALLOW_DEPRECATED_HEADERS
#include <boost/geometry.hpp>
#include <boost/geometry/geometries/point_xy.hpp>
#include <boost/geometry/geometries/polygon.hpp>

#include "polyband/errors.hpp"
#include "polyband/geometry.hpp"

namespace polyband {

inline constexpr double kZeroAreaTol = 1e-12;
inline constexpr int kRasterGrid = 1024;

namespace detail {

namespace bg = boost::geometry;
using BoostPoint = bg::model::d2::point_xy<double>;
using BoostPolygon = bg::model::polygon<BoostPoint>;

inline BoostPolygon to_boost(const Polygon& poly) {
  BoostPolygon out;
  for (const Point& p : poly) bg::append(out.outer(), BoostPoint(p.x, p.y));
  bg::correct(out);  // closes the ring and fixes orientation
  return out;
}

/// Scanline even-odd coverage of a polygon on a fixed grid over `box`.
/// One byte per cell; rows are rasterized at cell-center height.
inline std::vector<std::uint8_t> rasterize(const Polygon& poly,
                                           const BoundingBox& box, int grid) {
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(grid) * grid, 0);
  const double dx = (box.max_x - box.min_x) / grid;
  const double dy = (box.max_y - box.min_y) / grid;
  if (dx <= 0.0 || dy <= 0.0) return mask;
  const std::size_t n = poly.size();
  std::vector<double> crossings;
  for (int row = 0; row < grid; ++row) {
    const double y = box.min_y + (row + 0.5) * dy;
    crossings.clear();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
      const Point& a = poly[i];
      const Point& b = poly[j];
      if ((a.y > y) != (b.y > y)) {
        crossings.push_back((b.x - a.x) * (y - a.y) / (b.y - a.y) + a.x);
      }
    }
    std::sort(crossings.begin(), crossings.end());
    for (std::size_t c = 0; c + 1 < crossings.size(); c += 2) {
      // Cells whose center falls inside [crossings[c], crossings[c+1]).
      int first = static_cast<int>(
          std::ceil((crossings[c] - box.min_x) / dx - 0.5));
      int last = static_cast<int>(
          std::floor((crossings[c + 1] - box.min_x) / dx - 0.5));
      first = std::max(first, 0);
      last = std::min(last, grid - 1);
      for (int col = first; col <= last; ++col) {
        mask[static_cast<std::size_t>(row) * grid + col] = 1;
      }
    }
  }
  return mask;
}

}  // namespace detail

/// Grid-sampled IoU on a kRasterGrid^2 lattice over the joint bounding box.
/// A documented approximation, used directly for self-intersecting inputs.
inline double raster_iou(const Polygon& a, const Polygon& b,
                         int grid = kRasterGrid) {
  BoundingBox box_a = polygon_bounds(a);
  BoundingBox box_b = polygon_bounds(b);
  BoundingBox box{std::min(box_a.min_x, box_b.min_x),
                  std::min(box_a.min_y, box_b.min_y),
                  std::max(box_a.max_x, box_b.max_x),
                  std::max(box_a.max_y, box_b.max_y)};
  const std::vector<std::uint8_t> mask_a = detail::rasterize(a, box, grid);
  const std::vector<std::uint8_t> mask_b = detail::rasterize(b, box, grid);
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < mask_a.size(); ++i) {
    inter += mask_a[i] & mask_b[i];
    uni += mask_a[i] | mask_b[i];
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

/// Intersection-over-union of two positive-area polygons. Simple polygons
/// are clipped exactly; self-intersecting inputs fall back to the
/// rasterized approximation.
inline double polygon_iou(const Polygon& a, const Polygon& b) {
  if (a.size() < 3 || b.size() < 3) {
    throw DegeneracyError("polygon_iou: fewer than 3 vertices");
  }
  const bool simple_a = polygon_is_simple(a);
  const bool simple_b = polygon_is_simple(b);
  // The shoelace area is only meaningful for simple inputs; lobes of a
  // self-intersecting polygon cancel it even when the region is non-empty.
  if ((simple_a && polygon_area(a) < kZeroAreaTol) ||
      (simple_b && polygon_area(b) < kZeroAreaTol)) {
    throw DegeneracyError("polygon_iou: zero-area polygon");
  }
  if (!simple_a || !simple_b) {
    return raster_iou(a, b);
  }
  const detail::BoostPolygon pa = detail::to_boost(a);
  const detail::BoostPolygon pb = detail::to_boost(b);
  std::vector<detail::BoostPolygon> pieces;
  boost::geometry::intersection(pa, pb, pieces);
  double inter = 0.0;
  for (const auto& piece : pieces) inter += std::abs(boost::geometry::area(piece));
  const double area_a = std::abs(boost::geometry::area(pa));
  const double area_b = std::abs(boost::geometry::area(pb));
  const double uni = area_a + area_b - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

/// A detection reduced to its contour and confidence, ready for scoring.
struct ScoredPolygon {
  double score = 0.0;
  Polygon polygon;
};

/// Micro-averaged detection metrics plus per-image counts.
struct EvalReport {
  double precision = 0.0;
  double recall = 0.0;
  double f_measure = 0.0;
  long true_positives = 0;
  long false_positives = 0;
  long false_negatives = 0;
  struct ImageCounts {
    long tp = 0;
    long fp = 0;
    long fn = 0;
  };
  std::vector<ImageCounts> per_image;
  std::vector<std::string> errors;  // malformed-instance notes; scoring went on
};

namespace detail {

inline bool usable_polygon(const Polygon& poly) {
  if (poly.size() < 3) return false;
  for (const Point& p : poly) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) return false;
  }
  // Self-intersecting contours stay usable through the raster fallback.
  return !polygon_is_simple(poly) || polygon_area(poly) >= kZeroAreaTol;
}

}  // namespace detail

/// Greedy one-to-one matching at an IoU threshold: per image, detections
/// above the score threshold are visited in descending confidence and each
/// claims the unmatched ground truth of highest IoU. A claim is a true
/// positive only when that IoU strictly exceeds the threshold; otherwise
/// the detection is a false positive and the ground truth stays available.
inline EvalReport evaluate_detections(
    const std::vector<std::vector<ScoredPolygon>>& detections,
    const std::vector<std::vector<Polygon>>& ground_truths,
    double iou_threshold = 0.5, double score_threshold = 0.5) {
  if (detections.size() != ground_truths.size()) {
    throw ArgumentError("evaluate_detections: image count mismatch");
  }
  if (!(iou_threshold > 0.0 && iou_threshold < 1.0)) {
    throw ArgumentError("evaluate_detections: IoU threshold must be in (0,1)");
  }
  EvalReport report;
  for (std::size_t img = 0; img < detections.size(); ++img) {
    std::vector<const Polygon*> gts;
    for (const Polygon& g : ground_truths[img]) {
      if (detail::usable_polygon(g)) {
        gts.push_back(&g);
      } else {
        report.errors.push_back("image " + std::to_string(img) +
                                ": malformed ground-truth polygon skipped");
      }
    }
    std::vector<const ScoredPolygon*> dets;
    for (const ScoredPolygon& d : detections[img]) {
      if (d.score <= score_threshold) continue;
      if (detail::usable_polygon(d.polygon)) {
        dets.push_back(&d);
      } else {
        report.errors.push_back("image " + std::to_string(img) +
                                ": malformed detection polygon skipped");
      }
    }
    std::stable_sort(dets.begin(), dets.end(),
                     [](const ScoredPolygon* a, const ScoredPolygon* b) {
                       return a->score > b->score;
                     });

    EvalReport::ImageCounts counts;
    std::vector<char> gt_used(gts.size(), 0);
    for (const ScoredPolygon* d : dets) {
      double best_iou = -1.0;
      std::size_t best_gt = 0;
      for (std::size_t g = 0; g < gts.size(); ++g) {
        if (gt_used[g]) continue;
        const double iou = polygon_iou(d->polygon, *gts[g]);
        if (iou > best_iou) {
          best_iou = iou;
          best_gt = g;
        }
      }
      if (best_iou > iou_threshold) {
        gt_used[best_gt] = 1;
        ++counts.tp;
      } else {
        ++counts.fp;
      }
    }
    counts.fn = static_cast<long>(gts.size()) -
                std::count(gt_used.begin(), gt_used.end(), 1);
    report.per_image.push_back(counts);
    report.true_positives += counts.tp;
    report.false_positives += counts.fp;
    report.false_negatives += counts.fn;
  }

  const long det_total = report.true_positives + report.false_positives;
  const long gt_total = report.true_positives + report.false_negatives;
  report.precision =
      det_total > 0 ? static_cast<double>(report.true_positives) / det_total
                    : 0.0;
  report.recall =
      gt_total > 0 ? static_cast<double>(report.true_positives) / gt_total
                   : 0.0;
  const double pr = report.precision + report.recall;
  report.f_measure = pr > 0.0 ? 2.0 * report.precision * report.recall / pr
                              : 0.0;
  return report;
}

}  // namespace polyband
