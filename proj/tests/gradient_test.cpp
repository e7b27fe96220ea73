// SPDX-License-Identifier: Apache-2.0
//
// Central finite differences are the oracle for the hand-written gradient.
#include "polyband/losses.hpp"

#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "gradient_fixture.hpp"

namespace polyband {
namespace {

using testsupport::GradFixture;
using testsupport::max_relative_error;
using testsupport::random_fixture;

TEST(GradOverall, ZeroAtAGlobalOptimum) {
  // Predictions hold exactly the bands that generated the ground truth, so
  // every L1 argument is bitwise zero, and the logits sit past the
  // confidence clamp where the focal gradient is flat.
  LossConfig cfg;
  cfg.k = 4;
  PolyBand band;
  band.top = {0.2, -0.1, 0.25, 0.2, 0.8, Axis::Horizontal};
  band.bottom = {0.2, -0.1, 0.45, 0.2, 0.8, Axis::Horizontal};
  band.left = {0.1, 0.0, 0.2, 0.3, 0.5, Axis::Vertical};
  band.right = {-0.1, 0.0, 0.8, 0.3, 0.5, Axis::Vertical};
  GtInstance gt;
  gt.class_indicator = 1;
  gt.top = sample_curve(band.top, cfg.k);
  gt.bottom = sample_curve(band.bottom, cfg.k);
  gt.left = sample_curve(band.left, cfg.k);
  gt.right = sample_curve(band.right, cfg.k);

  std::vector<Detection> preds(2);
  preds[0].band = band;
  preds[0].logit = 18.0;  // sigmoid(18) is inside the clamp plateau
  preds[1].band = band;
  preds[1].logit = -18.0;
  const std::vector<GtInstance> gts = {gt, padding_instance()};
  const std::vector<int> assignment = {0, 1};

  const auto grads = grad_overall(preds, gts, assignment, cfg);
  for (const DetectionGrad& g : grads) {
    EXPECT_DOUBLE_EQ(g.logit, 0.0);
    for (double v : g.band) EXPECT_DOUBLE_EQ(v, 0.0);
  }
}

TEST(GradOverall, MatchesFiniteDifferencesShapeConstrained) {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 20; ++trial) {
    GradFixture fx = random_fixture(rng, 4, 2, 8, CurveLoss::ShapeConstrained);
    EXPECT_LT(max_relative_error(fx, CurveLoss::ShapeConstrained), 1e-4);
  }
}

TEST(GradOverall, MatchesFiniteDifferencesUnconstrained) {
  std::mt19937_64 rng(202);
  for (int trial = 0; trial < 10; ++trial) {
    GradFixture fx = random_fixture(rng, 4, 2, 8, CurveLoss::Unconstrained);
    EXPECT_LT(max_relative_error(fx, CurveLoss::Unconstrained), 1e-4);
  }
}

// Moving e1 must feed back into the loss through the resampling chain:
// the half-range fixture has a strictly nonzero domain gradient.
TEST(GradOverall, DomainBoundsCarryGradient) {
  LossConfig cfg;
  cfg.k = 2;
  GtInstance gt;
  gt.class_indicator = 1;
  const CurveSegment identity{0.0, 1.0, 0.0, 0.0, 1.0, Axis::Horizontal};
  gt.top = sample_curve(identity, 2);
  gt.bottom = sample_curve(identity, 2);
  const CurveSegment vertical{0.0, 1.0, 0.0, 0.0, 1.0, Axis::Vertical};
  gt.left = sample_curve(vertical, 2);
  gt.right = sample_curve(vertical, 2);

  std::vector<Detection> preds(1);
  preds[0].band.top = {0.0, 1.0, 0.0, 0.0, 0.5, Axis::Horizontal};
  preds[0].band.bottom = identity;
  preds[0].band.left = vertical;
  preds[0].band.right = vertical;
  preds[0].logit = 0.0;
  const std::vector<GtInstance> gts = {gt};
  const std::vector<int> assignment = {0};

  const auto grads = grad_overall(preds, gts, assignment, cfg);
  // d/de1 of the top side: through_t = sign(t - x̂) + sign(f - ŷ) = -2 at
  // the two non-anchored samples, weighted by u_i = i/K: -2*(0.5 + 1).
  EXPECT_NEAR(grads[0].band[4], -3.0, 1e-12);

  // Finite differences agree (the fixture is smooth in e1).
  const double h = 1e-6;
  auto eval_with_e1 = [&](double e1) {
    std::vector<Detection> p = preds;
    p[0].band.top.e1 = e1;
    return overall_loss(p, gts, assignment, cfg);
  };
  const double fd = (eval_with_e1(0.5 + h) - eval_with_e1(0.5 - h)) / (2 * h);
  EXPECT_NEAR(fd, -3.0, 1e-6);
}

}  // namespace
}  // namespace polyband
