// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "polyband/band.hpp"
#include "polyband/curve.hpp"
#include "polyband/errors.hpp"
#include "polyband/gt_fit.hpp"

namespace polyband {

/// Hyper-parameters of the training objective.
struct LossConfig {
  double alpha = 0.25;  // focal class-balance weight
  double gamma = 2.0;   // focal down-weighting exponent
  double lambda = 2.0;  // weight of the focal terms
  int k = 8;            // curve sampling segments (K+1 points per side)
};

inline void validate_config(const LossConfig& cfg) {
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) {
    throw ArgumentError("LossConfig: alpha must be in (0,1)");
  }
  if (!(cfg.gamma >= 0.0)) throw ArgumentError("LossConfig: gamma must be >= 0");
  if (!(cfg.lambda > 0.0)) throw ArgumentError("LossConfig: lambda must be > 0");
  if (cfg.k < 1) throw ArgumentError("LossConfig: K must be >= 1");
}

/// Confidences are clamped to [kConfidenceEps, 1-kConfidenceEps] before logs.
inline constexpr double kConfidenceEps = 1e-7;

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

inline double logit_of(double c) { return std::log(c / (1.0 - c)); }

namespace detail {

inline double clamp_confidence(double c) {
  return std::min(std::max(c, kConfidenceEps), 1.0 - kConfidenceEps);
}

}  // namespace detail

/// One set-prediction candidate: a confidence (stored as a logit so the
/// probability stays strictly inside (0,1)) and a band. The clamp keeps the
/// mapped confidence strictly inside (0,1) even for saturating logits,
/// where the raw sigmoid would round to 0 or 1 in doubles.
struct Detection {
  double logit = 0.0;
  PolyBand band;

  double confidence() const { return detail::clamp_confidence(sigmoid(logit)); }
};

/// Which per-curve fitting loss to use inside the four-sided fit loss.
enum class CurveLoss {
  ShapeConstrained,  // default: couples shape and range
  Unconstrained,     // baseline for comparison experiments
};

namespace detail {

inline double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

inline void check_gt_side(const CurveSegment& seg, const SampledPoints& gt,
                          const char* where) {
  if (gt.points.size() != static_cast<std::size_t>(gt.k_segments) + 1) {
    throw ArgumentError(std::string(where) + ": ground-truth set length " +
                        std::to_string(gt.points.size()) +
                        " does not match K=" + std::to_string(gt.k_segments));
  }
  if (gt.axis != seg.axis) {
    throw ArgumentError(std::string(where) +
                        ": curve axis does not match ground-truth axis");
  }
}

}  // namespace detail

/// Conventional fitting loss: residuals at the ground-truth abscissae plus
/// two endpoint terms tying the domain to the ground-truth extent. The
/// curve's own range never moves the comparison points, which is exactly the
/// length insensitivity the shape-constrained variant removes.
inline double loss_unconstrained(const CurveSegment& seg,
                                 const SampledPoints& gt) {
  detail::check_gt_side(seg, gt, "loss_unconstrained");
  double acc = 0.0;
  for (const Point& p : gt.points) {
    const double ind = independent_coord(p, gt.axis);
    const double dep = dependent_coord(p, gt.axis);
    acc += std::abs(dep - eval_curve(seg, ind));
  }
  acc += std::abs(seg.e0 - independent_coord(gt.points.front(), gt.axis));
  acc += std::abs(seg.e1 - independent_coord(gt.points.back(), gt.axis));
  return acc;
}

/// Shape-constrained fitting loss: the prediction is sampled over its own
/// domain and compared point-by-point against the equally spaced
/// ground-truth set, in both coordinates.
inline double loss_shape_constrained(const CurveSegment& seg,
                                     const SampledPoints& gt) {
  detail::check_gt_side(seg, gt, "loss_shape_constrained");
  const int k = gt.k_segments;
  double acc = 0.0;
  for (int i = 0; i <= k; ++i) {
    const double t = detail::sample_param(seg.e0, seg.e1, i, k);
    const double f = eval_curve(seg, t);
    acc += std::abs(t - independent_coord(gt.points[i], gt.axis));
    acc += std::abs(f - dependent_coord(gt.points[i], gt.axis));
  }
  return acc;
}

/// Four-sided fitting loss between a predicted band and a ground-truth
/// instance. Zero for non-text (padded) instances.
inline double fit_loss(const PolyBand& band, const GtInstance& gt,
                       const LossConfig& cfg,
                       CurveLoss kind = CurveLoss::ShapeConstrained) {
  if (gt.class_indicator == 0) return 0.0;
  const struct {
    const CurveSegment* seg;
    const SampledPoints* pts;
  } sides[4] = {{&band.top, &gt.top},
                {&band.bottom, &gt.bottom},
                {&band.left, &gt.left},
                {&band.right, &gt.right}};
  double acc = 0.0;
  for (const auto& [seg, pts] : sides) {
    if (pts->points.empty()) {
      throw ArgumentError("fit_loss: text instance with empty point sets");
    }
    if (pts->k_segments != cfg.k) {
      throw ArgumentError("fit_loss: ground truth resampled at K=" +
                          std::to_string(pts->k_segments) +
                          " but config expects K=" + std::to_string(cfg.k));
    }
    acc += kind == CurveLoss::ShapeConstrained
               ? loss_shape_constrained(*seg, *pts)
               : loss_unconstrained(*seg, *pts);
  }
  return acc;
}

namespace detail {

inline void check_confidence(double c, const char* where) {
  if (!(c > 0.0 && c < 1.0)) {
    throw DomainError(std::string(where) + ": confidence must be in (0,1)");
  }
}

}  // namespace detail

/// Matching-time focal cost: the positive-class cost minus the
/// negative-class cost. Negative values are taken literally; lower is a
/// better match. Zero for non-text instances.
inline double focal_cost(double c, int c_hat, const LossConfig& cfg) {
  if (c_hat == 0) return 0.0;
  detail::check_confidence(c, "focal_cost");
  const double cc = detail::clamp_confidence(c);
  const double pos = -cfg.alpha * std::pow(1.0 - cc, cfg.gamma) * std::log(cc);
  const double neg =
      -(1.0 - cfg.alpha) * std::pow(cc, cfg.gamma) * std::log(1.0 - cc);
  return cfg.lambda * (pos - neg);
}

/// Training-time focal loss: positive branch for text, negative for
/// non-text.
inline double focal_loss(double c, int c_hat, const LossConfig& cfg) {
  detail::check_confidence(c, "focal_loss");
  const double cc = detail::clamp_confidence(c);
  if (c_hat != 0) {
    return -cfg.lambda * cfg.alpha * std::pow(1.0 - cc, cfg.gamma) *
           std::log(cc);
  }
  return -cfg.lambda * (1.0 - cfg.alpha) * std::pow(cc, cfg.gamma) *
         std::log(1.0 - cc);
}

namespace detail {

inline void check_assignment(std::size_t n_preds, std::size_t n_gts,
                             std::span<const int> assignment) {
  if (n_preds != n_gts || assignment.size() != n_gts) {
    throw ArgumentError("overall_loss: predictions, ground truths and "
                        "assignment must all have size N");
  }
  std::vector<char> seen(n_preds, 0);
  for (int g : assignment) {
    if (g < 0 || static_cast<std::size_t>(g) >= n_preds || seen[g]) {
      throw ArgumentError("overall_loss: assignment is not injective");
    }
    seen[g] = 1;
  }
}

}  // namespace detail

/// Total objective for one scene under a fixed assignment: the sum over
/// instances of the four-sided fitting loss plus the focal loss of the
/// assigned candidate's confidence.
inline double overall_loss(std::span<const Detection> preds,
                           std::span<const GtInstance> gts,
                           std::span<const int> assignment,
                           const LossConfig& cfg,
                           CurveLoss kind = CurveLoss::ShapeConstrained) {
  detail::check_assignment(preds.size(), gts.size(), assignment);
  double acc = 0.0;
  for (std::size_t j = 0; j < gts.size(); ++j) {
    const Detection& det = preds[assignment[j]];
    acc += fit_loss(det.band, gts[j], cfg, kind);
    acc += focal_loss(det.confidence(), gts[j].class_indicator, cfg);
  }
  return acc;
}

/// Gradient of the objective for one candidate: 20 band parameters in
/// flatten order plus the confidence logit.
struct DetectionGrad {
  std::array<double, 20> band{};
  double logit = 0.0;
};

namespace detail {

/// Accumulates d(loss_shape_constrained)/d(a2,a1,a0,e0,e1) for one side.
/// The chain rule runs through the sampled parameters t_i = e0+(e1-e0)i/K;
/// L1 subgradients at exactly zero are taken as zero.
inline void grad_side_shape_constrained(const CurveSegment& seg,
                                        const SampledPoints& gt,
                                        std::span<double, 5> out) {
  const int k = gt.k_segments;
  for (int i = 0; i <= k; ++i) {
    const double ufrac = static_cast<double>(i) / k;
    const double t = sample_param(seg.e0, seg.e1, i, k);
    const double f = eval_curve(seg, t);
    const double s = sgn(t - independent_coord(gt.points[i], gt.axis));
    const double r = sgn(f - dependent_coord(gt.points[i], gt.axis));
    const double fprime = 2.0 * seg.a2 * t + seg.a1;
    const double through_t = s + r * fprime;
    out[0] += r * t * t;                 // a2
    out[1] += r * t;                     // a1
    out[2] += r;                         // a0
    out[3] += through_t * (1.0 - ufrac); // e0
    out[4] += through_t * ufrac;         // e1
  }
}

/// Accumulates d(loss_unconstrained)/d(a2,a1,a0,e0,e1) for one side.
inline void grad_side_unconstrained(const CurveSegment& seg,
                                    const SampledPoints& gt,
                                    std::span<double, 5> out) {
  for (const Point& p : gt.points) {
    const double ind = independent_coord(p, gt.axis);
    const double r = sgn(eval_curve(seg, ind) - dependent_coord(p, gt.axis));
    out[0] += r * ind * ind;
    out[1] += r * ind;
    out[2] += r;
  }
  out[3] += sgn(seg.e0 - independent_coord(gt.points.front(), gt.axis));
  out[4] += sgn(seg.e1 - independent_coord(gt.points.back(), gt.axis));
}

/// d(focal_loss)/d(logit), including the sigmoid and the confidence clamp
/// (the clamp is flat, so a clamped confidence kills the gradient).
inline double grad_focal_logit(double logit, int c_hat,
                               const LossConfig& cfg) {
  const double c = sigmoid(logit);
  if (c <= kConfidenceEps || c >= 1.0 - kConfidenceEps) return 0.0;
  const double dcdz = c * (1.0 - c);
  double dldc;
  if (c_hat != 0) {
    const double pow_term =
        cfg.gamma > 0.0 ? cfg.gamma * std::pow(1.0 - c, cfg.gamma - 1.0) : 0.0;
    dldc = -cfg.lambda * cfg.alpha *
           (-pow_term * std::log(c) + std::pow(1.0 - c, cfg.gamma) / c);
  } else {
    const double pow_term =
        cfg.gamma > 0.0 ? cfg.gamma * std::pow(c, cfg.gamma - 1.0) : 0.0;
    dldc = -cfg.lambda * (1.0 - cfg.alpha) *
           (pow_term * std::log(1.0 - c) -
            std::pow(c, cfg.gamma) / (1.0 - c));
  }
  return dldc * dcdz;
}

}  // namespace detail

/// Exact gradient of overall_loss with respect to every candidate's 20 band
/// parameters and confidence logit, for the fixed assignment.
inline std::vector<DetectionGrad> grad_overall(
    std::span<const Detection> preds, std::span<const GtInstance> gts,
    std::span<const int> assignment, const LossConfig& cfg,
    CurveLoss kind = CurveLoss::ShapeConstrained) {
  detail::check_assignment(preds.size(), gts.size(), assignment);
  std::vector<DetectionGrad> grads(preds.size());
  for (std::size_t j = 0; j < gts.size(); ++j) {
    const int g = assignment[j];
    const Detection& det = preds[g];
    DetectionGrad& grad = grads[g];
    if (gts[j].class_indicator != 0) {
      const struct {
        const CurveSegment* seg;
        const SampledPoints* pts;
        int offset;
      } sides[4] = {{&det.band.top, &gts[j].top, 0},
                    {&det.band.bottom, &gts[j].bottom, 5},
                    {&det.band.left, &gts[j].left, 10},
                    {&det.band.right, &gts[j].right, 15}};
      for (const auto& [seg, pts, offset] : sides) {
        detail::check_gt_side(*seg, *pts, "grad_overall");
        if (pts->k_segments != cfg.k) {
          throw ArgumentError("grad_overall: ground-truth K mismatch");
        }
        std::span<double, 5> slot(grad.band.data() + offset, 5);
        if (kind == CurveLoss::ShapeConstrained) {
          detail::grad_side_shape_constrained(*seg, *pts, slot);
        } else {
          detail::grad_side_unconstrained(*seg, *pts, slot);
        }
      }
    }
    grad.logit +=
        detail::grad_focal_logit(det.logit, gts[j].class_indicator, cfg);
  }
  return grads;
}

}  // namespace polyband
