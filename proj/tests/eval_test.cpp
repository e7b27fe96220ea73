// SPDX-License-Identifier: Apache-2.0
#include "polyband/eval.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

namespace polyband {
namespace {

Polygon square(double x, double y, double side = 1.0) {
  return {{x, y}, {x + side, y}, {x + side, y + side}, {x, y + side}};
}

TEST(PolygonIou, IdenticalPolygonsGiveOne) {
  const Polygon p = square(0.1, 0.1, 0.5);
  EXPECT_DOUBLE_EQ(polygon_iou(p, p), 1.0);
}

TEST(PolygonIou, DisjointPolygonsGiveZero) {
  EXPECT_DOUBLE_EQ(polygon_iou(square(0.0, 0.0, 0.2), square(0.5, 0.5, 0.2)),
                   0.0);
}

TEST(PolygonIou, OffsetUnitSquaresGiveOneThird) {
  // Intersection 0.5, union 1.5.
  EXPECT_NEAR(polygon_iou(square(0.0, 0.0), square(0.5, 0.0)), 1.0 / 3.0,
              1e-12);
}

TEST(PolygonIou, SymmetricWithinTolerance) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Polygon a = square(dist(rng) * 0.5, dist(rng) * 0.5, 0.3);
    const Polygon b = square(dist(rng) * 0.5, dist(rng) * 0.5, 0.4);
    const double ab = polygon_iou(a, b);
    const double ba = polygon_iou(b, a);
    EXPECT_NEAR(ab, ba, 1e-9);
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, 1.0);
  }
}

TEST(PolygonIou, ZeroAreaRejected) {
  const Polygon degenerate = {{0.1, 0.1}, {0.2, 0.2}, {0.3, 0.3}};
  EXPECT_THROW(polygon_iou(degenerate, square(0, 0)), DegeneracyError);
  EXPECT_THROW(polygon_iou(square(0, 0), degenerate), DegeneracyError);
}

TEST(PolygonIou, SelfIntersectingFallsBackToRaster) {
  // Bowtie: self-intersecting quad. Even-odd area is two triangles.
  const Polygon bowtie = {{0.0, 0.0}, {1.0, 1.0}, {1.0, 0.0}, {0.0, 1.0}};
  ASSERT_FALSE(polygon_is_simple(bowtie));
  const double iou = polygon_iou(bowtie, bowtie);
  EXPECT_NEAR(iou, 1.0, 1e-9);  // raster of the same mask twice
  // Against a disjoint square the result is still zero.
  EXPECT_DOUBLE_EQ(polygon_iou(bowtie, square(2.0, 2.0)), 0.0);
}

// Random convex quads: raster approximation tracks exact clipping.
TEST(PolygonIou, RasterAgreesWithExactClipping) {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> dist(0.05, 0.45);
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    // Convex quadrilaterals built from jittered rectangles.
    auto jittered = [&](double ox, double oy) {
      Polygon p = square(ox, oy, 0.4);
      for (Point& v : p) {
        v.x += dist(rng) * 0.1;
        v.y += dist(rng) * 0.1;
      }
      return p;
    };
    const Polygon a = jittered(dist(rng), dist(rng));
    const Polygon b = jittered(dist(rng), dist(rng));
    if (!polygon_is_simple(a) || !polygon_is_simple(b)) continue;
    const double exact = polygon_iou(a, b);
    const double approx = raster_iou(a, b);
    EXPECT_NEAR(approx, exact, 0.01);
    ++checked;
  }
  EXPECT_GE(checked, 90);
}

TEST(EvaluateDetections, PerfectDetectionsScorePerfectly) {
  const std::vector<std::vector<Polygon>> gts = {
      {square(0.0, 0.0, 0.3), square(0.5, 0.5, 0.3)}};
  const std::vector<std::vector<ScoredPolygon>> dets = {
      {{0.9, square(0.0, 0.0, 0.3)}, {0.8, square(0.5, 0.5, 0.3)}}};
  const EvalReport report = evaluate_detections(dets, gts);
  EXPECT_DOUBLE_EQ(report.precision, 1.0);
  EXPECT_DOUBLE_EQ(report.recall, 1.0);
  EXPECT_DOUBLE_EQ(report.f_measure, 1.0);
  EXPECT_EQ(report.true_positives, 2);
}

TEST(EvaluateDetections, SpuriousDetectionCostsPrecision) {
  const std::vector<std::vector<Polygon>> gts = {
      {square(0.0, 0.0, 0.3), square(0.5, 0.5, 0.3)}};
  const std::vector<std::vector<ScoredPolygon>> dets = {
      {{0.9, square(0.0, 0.0, 0.3)},
       {0.8, square(0.5, 0.5, 0.3)},
       {0.7, square(0.0, 0.6, 0.2)}}};
  const EvalReport report = evaluate_detections(dets, gts);
  EXPECT_NEAR(report.precision, 2.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(report.recall, 1.0);
  EXPECT_NEAR(report.f_measure, 0.8, 1e-12);
}

TEST(EvaluateDetections, EmptyDetectionsConvention) {
  const std::vector<std::vector<Polygon>> gts = {{square(0.0, 0.0, 0.3)}};
  const std::vector<std::vector<ScoredPolygon>> dets = {{}};
  const EvalReport report = evaluate_detections(dets, gts);
  EXPECT_DOUBLE_EQ(report.precision, 0.0);
  EXPECT_DOUBLE_EQ(report.recall, 0.0);
  EXPECT_DOUBLE_EQ(report.f_measure, 0.0);
  EXPECT_EQ(report.false_negatives, 1);
}

TEST(EvaluateDetections, ThresholdIsStrict) {
  // Detection overlapping exactly half the ground truth: IoU = 1/3 fails
  // a 0.3 threshold only if strictly-greater is applied at equality.
  const std::vector<std::vector<Polygon>> gts = {{square(0.0, 0.0)}};
  const std::vector<std::vector<ScoredPolygon>> dets = {
      {{0.9, square(0.5, 0.0)}}};
  const EvalReport at_third =
      evaluate_detections(dets, gts, 1.0 / 3.0, 0.5);
  EXPECT_EQ(at_third.true_positives, 0);  // IoU == threshold is not enough
  const EvalReport below =
      evaluate_detections(dets, gts, 0.33, 0.5);
  EXPECT_EQ(below.true_positives, 1);
}

TEST(EvaluateDetections, ScoreThresholdFiltersAndOneToOneHolds) {
  const Polygon gt = square(0.0, 0.0, 0.4);
  const std::vector<std::vector<Polygon>> gts = {{gt}};
  // Two detections over the same ground truth: only one true positive.
  const std::vector<std::vector<ScoredPolygon>> dets = {
      {{0.9, gt}, {0.8, gt}, {0.3, gt}}};
  const EvalReport report = evaluate_detections(dets, gts, 0.5, 0.5);
  EXPECT_EQ(report.true_positives, 1);
  EXPECT_EQ(report.false_positives, 1);  // the 0.3-score one was filtered out
  EXPECT_EQ(report.false_negatives, 0);
}

TEST(EvaluateDetections, MalformedPolygonsAreReportedNotFatal) {
  const std::vector<std::vector<Polygon>> gts = {
      {square(0.0, 0.0, 0.3), {{0.1, 0.1}, {0.2, 0.2}}}};
  const std::vector<std::vector<ScoredPolygon>> dets = {
      {{0.9, square(0.0, 0.0, 0.3)}, {0.8, Polygon{{0.0, 0.0}, {0.1, 0.1}}}}};
  const EvalReport report = evaluate_detections(dets, gts);
  EXPECT_EQ(report.true_positives, 1);
  EXPECT_EQ(report.errors.size(), 2u);
}

TEST(EvaluateDetections, ImageCountMismatchRejected) {
  EXPECT_THROW(evaluate_detections({{}}, {}), ArgumentError);
}

}  // namespace
}  // namespace polyband
