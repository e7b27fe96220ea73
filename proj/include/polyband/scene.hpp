// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <utility>
#include <vector>

#include "polyband/band.hpp"
#include "polyband/errors.hpp"
#include "polyband/eval.hpp"
#include "polyband/gt_fit.hpp"
#include "polyband/losses.hpp"
#include "polyband/matching.hpp"

namespace polyband {

/// Deterministic uniform draws on top of mt19937_64. Mapping the raw 53-bit
/// output directly keeps sequences identical across standard libraries,
/// which the reproducibility contract of the demo depends on.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) {
    const double unit = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * unit;
  }

 private:
  std::mt19937_64 engine_;
};

/// A synthetic unit-square scene of quadratic-band text instances. Every
/// contour lies inside [0,1]^2 and instances overlap pairwise with IoU
/// below 0.3 (generator guarantee via rejection sampling).
struct SyntheticScene {
  std::uint64_t seed = 0;
  std::vector<GtInstance> instances;
  std::vector<PolyBand> bands;  // the generating bands, kept for inspection
};

inline constexpr int kSceneRejectionBudget = 10000;
inline constexpr double kSceneMaxPairIou = 0.25;

namespace detail {

inline bool contour_in_frame(const Polygon& poly) {
  for (const Point& p : poly) {
    if (p.x < 0.0 || p.x > 1.0 || p.y < 0.0 || p.y > 1.0) return false;
  }
  return true;
}

/// Draws one candidate band: curved top, near-parallel bottom, straight
/// chord sides connecting the corner points.
inline PolyBand draw_band(Rng& rng) {
  PolyBand band;
  const double x0 = rng.uniform(0.05, 0.72);
  const double len = rng.uniform(0.15, std::min(0.55, 0.93 - x0));
  const double x1 = x0 + len;
  const double mid = 0.5 * (x0 + x1);

  band.top.axis = Axis::Horizontal;
  band.top.a2 = rng.uniform(-0.5, 0.5);
  band.top.a1 = rng.uniform(-0.4, 0.4);
  const double y_mid = rng.uniform(0.12, 0.64);
  band.top.a0 = y_mid - band.top.a2 * mid * mid - band.top.a1 * mid;
  band.top.e0 = x0;
  band.top.e1 = x1;

  const double thickness = rng.uniform(0.08, 0.22);
  band.bottom.axis = Axis::Horizontal;
  band.bottom.a2 = band.top.a2 + rng.uniform(-0.06, 0.06);
  band.bottom.a1 = band.top.a1 + rng.uniform(-0.06, 0.06);
  band.bottom.a0 = (y_mid + thickness) - band.bottom.a2 * mid * mid -
                   band.bottom.a1 * mid;
  band.bottom.e0 = x0 + rng.uniform(-0.02, 0.02);
  band.bottom.e1 = x1 + rng.uniform(-0.02, 0.02);

  // Chord sides through the four corner points.
  const Point tl{band.top.e0, eval_curve(band.top, band.top.e0)};
  const Point tr{band.top.e1, eval_curve(band.top, band.top.e1)};
  const Point bl{band.bottom.e0, eval_curve(band.bottom, band.bottom.e0)};
  const Point br{band.bottom.e1, eval_curve(band.bottom, band.bottom.e1)};
  if (bl.y - tl.y < 0.03 || br.y - tr.y < 0.03) {
    throw DegeneracyError("draw_band: sides too close");
  }
  band.left.axis = Axis::Vertical;
  band.left.a2 = 0.0;
  band.left.a1 = (bl.x - tl.x) / (bl.y - tl.y);
  band.left.a0 = tl.x - band.left.a1 * tl.y;
  band.left.e0 = tl.y;
  band.left.e1 = bl.y;
  band.right.axis = Axis::Vertical;
  band.right.a2 = 0.0;
  band.right.a1 = (br.x - tr.x) / (br.y - tr.y);
  band.right.a0 = tr.x - band.right.a1 * tr.y;
  band.right.e0 = tr.y;
  band.right.e1 = br.y;
  return band;
}

inline GtInstance gt_from_band(const PolyBand& band, const Polygon& contour,
                               int k) {
  GtInstance gt;
  gt.polygon = contour;
  gt.class_indicator = 1;
  gt.top = sample_curve(band.top, k);
  gt.bottom = sample_curve(band.bottom, k);
  gt.left = sample_curve(band.left, k);
  gt.right = sample_curve(band.right, k);
  return gt;
}

}  // namespace detail

/// Deterministically generates a scene of m instances for the seed.
/// Rejection sampling enforces the scene invariants; the budget guards
/// against pathological seeds.
inline SyntheticScene generate_scene(std::uint64_t seed, int m, int k = 8) {
  if (m < 1 || m > 8) throw ArgumentError("generate_scene: M must be in 1..8");
  if (k < 1) throw ArgumentError("generate_scene: K must be >= 1");
  SyntheticScene scene;
  scene.seed = seed;
  Rng rng(seed);
  int attempts = 0;
  std::vector<Polygon> contours;
  while (static_cast<int>(scene.bands.size()) < m) {
    if (++attempts > kSceneRejectionBudget) {
      throw GenerationError("generate_scene: rejection budget exhausted");
    }
    PolyBand band;
    Polygon contour;
    try {
      band = detail::draw_band(rng);
      contour = band_to_contour(band, k);
    } catch (const Error&) {
      continue;
    }
    if (!detail::contour_in_frame(contour)) continue;
    if (!polygon_is_simple(contour)) continue;
    if (polygon_area(contour) < 0.004) continue;
    bool overlaps = false;
    for (const Polygon& other : contours) {
      if (polygon_iou(contour, other) >= kSceneMaxPairIou) {
        overlaps = true;
        break;
      }
    }
    if (overlaps) continue;
    contours.push_back(contour);
    scene.instances.push_back(detail::gt_from_band(band, contour, k));
    scene.bands.push_back(band);
  }
  return scene;
}

/// Knobs of the direct set-prediction fit. The default rate keeps plain
/// gradient descent out of the large-amplitude L1 limit cycles that set in
/// around lr = 0.01 while still polarizing confidences within the budget.
struct DirectFitOptions {
  int candidates = 20;  // N, must be >= the scene's instance count
  int steps = 3000;
  double lr = 0.005;
  std::uint64_t seed = 0;
  CurveLoss kind = CurveLoss::ShapeConstrained;
  LossConfig loss;
};

/// Record of one optimization run.
struct FitTrace {
  std::vector<double> losses;     // objective before each update step
  std::vector<double> final_iou;  // per text instance, after the last step
  int steps = 0;
  double lr_initial = 0.0;
  double lr_final = 0.0;
  int decay_step = 0;  // first step using the decayed rate
  bool aborted = false;
  int abort_step = -1;
};

namespace detail {

inline std::vector<Detection> init_candidates(int n, Rng& rng) {
  std::vector<Detection> dets(n);
  for (Detection& det : dets) {
    PolyBand band;
    band.top = {0.0, 0.0, 0.42, 0.35, 0.65, Axis::Horizontal};
    band.bottom = {0.0, 0.0, 0.58, 0.35, 0.65, Axis::Horizontal};
    band.left = {0.0, 0.0, 0.35, 0.42, 0.58, Axis::Vertical};
    band.right = {0.0, 0.0, 0.65, 0.42, 0.58, Axis::Vertical};
    std::array<double, 20> theta = flatten(band);
    for (double& v : theta) v += rng.uniform(-0.05, 0.05);
    det.band = unflatten(theta);
    det.logit = -2.0 + rng.uniform(-0.25, 0.25);
  }
  return dets;
}

}  // namespace detail

/// Pads ground truths to n with non-text instances, as the matcher expects.
inline std::vector<GtInstance> pad_ground_truths(
    const std::vector<GtInstance>& gts, int n) {
  if (static_cast<int>(gts.size()) > n) {
    throw ArgumentError("pad_ground_truths: more instances than slots");
  }
  std::vector<GtInstance> padded = gts;
  padded.resize(n, padding_instance());
  return padded;
}

/// Directly optimizes N (confidence, band) candidates against the scene's
/// instances under the matched objective: every step re-solves the
/// bipartite matching, evaluates the analytic gradient for that assignment
/// and takes a plain gradient-descent step. The learning rate decays by a
/// factor of ten over the last fifth of the steps.
inline std::pair<std::vector<Detection>, FitTrace> direct_fit(
    const SyntheticScene& scene, const DirectFitOptions& opts) {
  const int n = opts.candidates;
  const int m = static_cast<int>(scene.instances.size());
  if (n < m) throw ArgumentError("direct_fit: N must be >= M");
  if (opts.steps < 1) throw ArgumentError("direct_fit: steps must be >= 1");
  validate_config(opts.loss);

  Rng rng(opts.seed);
  std::vector<Detection> dets = detail::init_candidates(n, rng);
  const std::vector<GtInstance> gts = pad_ground_truths(scene.instances, n);

  FitTrace trace;
  trace.steps = opts.steps;
  trace.lr_initial = opts.lr;
  trace.lr_final = opts.lr * 0.1;
  trace.decay_step = opts.steps - opts.steps / 5;
  trace.losses.reserve(opts.steps);

  for (int step = 0; step < opts.steps; ++step) {
    const auto cost = cost_matrix(dets, gts, opts.loss, opts.kind);
    bool finite = true;
    for (const auto& row : cost) {
      for (double v : row) finite &= std::isfinite(v);
    }
    double loss = std::numeric_limits<double>::quiet_NaN();
    MatchAssignment assign;
    if (finite) {
      assign = hungarian_assign(cost);
      loss = overall_loss(dets, gts, assign.mapping, opts.loss, opts.kind);
      finite = std::isfinite(loss);
    }
    if (!finite) {
      trace.aborted = true;
      trace.abort_step = step;
      return {std::move(dets), std::move(trace)};
    }
    trace.losses.push_back(loss);
    const std::vector<DetectionGrad> grads =
        grad_overall(dets, gts, assign.mapping, opts.loss, opts.kind);
    const double lr = step < trace.decay_step ? opts.lr : trace.lr_final;
    for (int i = 0; i < n; ++i) {
      std::array<double, 20> theta = flatten(dets[i].band);
      for (int pidx = 0; pidx < 20; ++pidx) {
        theta[pidx] -= lr * grads[i].band[pidx];
      }
      dets[i].band = unflatten(theta);
      dets[i].logit -= lr * grads[i].logit;
    }
  }

  // Final per-instance IoU under the converged assignment.
  const auto cost = cost_matrix(dets, gts, opts.loss, opts.kind);
  const MatchAssignment assign = hungarian_assign(cost);
  for (int j = 0; j < m; ++j) {
    double iou = 0.0;
    try {
      const Polygon contour = band_to_contour(
          canonicalized(dets[assign.mapping[j]].band), opts.loss.k);
      iou = polygon_iou(contour, scene.instances[j].polygon);
    } catch (const Error&) {
      iou = 0.0;
    }
    trace.final_iou.push_back(iou);
  }
  return {std::move(dets), std::move(trace)};
}

/// Mean absolute error between matched candidates' domain lengths and the
/// ground-truth sides' extents, averaged over all sides of all instances.
/// The metric of the shape-constraint ablation.
inline double mean_domain_length_error(const std::vector<Detection>& dets,
                                       const SyntheticScene& scene,
                                       const LossConfig& cfg,
                                       CurveLoss kind) {
  const int n = static_cast<int>(dets.size());
  const std::vector<GtInstance> gts = pad_ground_truths(scene.instances, n);
  const MatchAssignment assign = hungarian_assign(
      cost_matrix(dets, gts, cfg, kind));
  double acc = 0.0;
  int terms = 0;
  for (std::size_t j = 0; j < scene.instances.size(); ++j) {
    const PolyBand& band = dets[assign.mapping[j]].band;
    const GtInstance& gt = scene.instances[j];
    const struct {
      const CurveSegment* seg;
      const SampledPoints* pts;
    } sides[4] = {{&band.top, &gt.top},
                  {&band.bottom, &gt.bottom},
                  {&band.left, &gt.left},
                  {&band.right, &gt.right}};
    for (const auto& [seg, pts] : sides) {
      const double gt_len = independent_coord(pts->points.back(), pts->axis) -
                            independent_coord(pts->points.front(), pts->axis);
      acc += std::abs(std::abs(seg->e1 - seg->e0) - gt_len);
      ++terms;
    }
  }
  return terms > 0 ? acc / terms : 0.0;
}

}  // namespace polyband
