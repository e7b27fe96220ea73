// SPDX-License-Identifier: Apache-2.0
#include "polyband/scene.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

namespace polyband {
namespace {

TEST(GenerateScene, DeterministicForFixedSeed) {
  const SyntheticScene a = generate_scene(42, 3);
  const SyntheticScene b = generate_scene(42, 3);
  ASSERT_EQ(a.instances.size(), b.instances.size());
  for (std::size_t i = 0; i < a.bands.size(); ++i) {
    EXPECT_EQ(flatten(a.bands[i]), flatten(b.bands[i]));
    ASSERT_EQ(a.instances[i].polygon.size(), b.instances[i].polygon.size());
    for (std::size_t p = 0; p < a.instances[i].polygon.size(); ++p) {
      EXPECT_EQ(a.instances[i].polygon[p], b.instances[i].polygon[p]);
    }
  }
  const SyntheticScene c = generate_scene(43, 3);
  EXPECT_NE(flatten(a.bands[0]), flatten(c.bands[0]));
}

TEST(GenerateScene, SingleInstanceIsValid) {
  const SyntheticScene scene = generate_scene(7, 1);
  ASSERT_EQ(scene.instances.size(), 1u);
  const GtInstance& gt = scene.instances[0];
  EXPECT_EQ(gt.class_indicator, 1);
  EXPECT_EQ(gt.top.points.size(), 9u);  // default K=8
  for (const Point& p : gt.polygon) {
    EXPECT_GE(p.x, 0.0);
    EXPECT_LE(p.x, 1.0);
    EXPECT_GE(p.y, 0.0);
    EXPECT_LE(p.y, 1.0);
  }
  EXPECT_TRUE(polygon_is_simple(gt.polygon));
}

TEST(GenerateScene, PairwiseOverlapStaysLow) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const SyntheticScene scene = generate_scene(seed, 5);
    ASSERT_EQ(scene.instances.size(), 5u);
    for (std::size_t i = 0; i < scene.instances.size(); ++i) {
      for (std::size_t j = i + 1; j < scene.instances.size(); ++j) {
        EXPECT_LT(polygon_iou(scene.instances[i].polygon,
                              scene.instances[j].polygon),
                  0.3);
      }
    }
  }
}

TEST(GenerateScene, RejectsBadArguments) {
  EXPECT_THROW(generate_scene(1, 0), ArgumentError);
  EXPECT_THROW(generate_scene(1, 9), ArgumentError);
}

TEST(DirectFit, SingleInstanceConverges) {
  const SyntheticScene scene = generate_scene(10, 1);
  DirectFitOptions opts;
  opts.candidates = 4;
  opts.steps = 2000;
  opts.lr = 0.01;
  opts.seed = 10;
  const auto [dets, trace] = direct_fit(scene, opts);
  ASSERT_FALSE(trace.aborted);
  ASSERT_EQ(trace.final_iou.size(), 1u);
  EXPECT_GT(trace.final_iou[0], 0.9);
  EXPECT_EQ(trace.losses.size(), 2000u);
}

TEST(DirectFit, TraceIsBitwiseReproducible) {
  const SyntheticScene scene = generate_scene(11, 2);
  DirectFitOptions opts;
  opts.candidates = 8;
  opts.steps = 300;
  opts.seed = 3;
  const auto [dets_a, trace_a] = direct_fit(scene, opts);
  const auto [dets_b, trace_b] = direct_fit(scene, opts);
  ASSERT_EQ(trace_a.losses.size(), trace_b.losses.size());
  for (std::size_t i = 0; i < trace_a.losses.size(); ++i) {
    EXPECT_EQ(trace_a.losses[i], trace_b.losses[i]);
  }
  for (std::size_t i = 0; i < dets_a.size(); ++i) {
    EXPECT_EQ(dets_a[i].logit, dets_b[i].logit);
    EXPECT_EQ(flatten(dets_a[i].band), flatten(dets_b[i].band));
  }
}

TEST(DirectFit, LossTrendsDownward) {
  const SyntheticScene scene = generate_scene(19, 2);
  DirectFitOptions opts;
  opts.candidates = 8;
  opts.steps = 1200;
  opts.seed = 19;
  const auto [dets, trace] = direct_fit(scene, opts);
  ASSERT_FALSE(trace.aborted);
  // 100-step moving average is non-increasing over the run, up to the
  // oscillation jitter of the converged L1 plateau.
  const int window = 100;
  double prev_avg = 1e300;
  for (std::size_t start = 0; start + window <= trace.losses.size();
       start += window) {
    double avg = 0.0;
    for (int i = 0; i < window; ++i) avg += trace.losses[start + i];
    avg /= window;
    EXPECT_LE(avg, prev_avg * 1.02 + 1e-9);
    prev_avg = avg;
  }
}

TEST(DirectFit, MatchedConfidencesPolarize) {
  const SyntheticScene scene = generate_scene(23, 3);
  DirectFitOptions opts;
  opts.candidates = 12;
  opts.steps = 1500;
  opts.seed = 23;
  const auto [dets, trace] = direct_fit(scene, opts);
  ASSERT_FALSE(trace.aborted);
  const std::vector<GtInstance> padded =
      pad_ground_truths(scene.instances, opts.candidates);
  const MatchAssignment assign =
      hungarian_assign(cost_matrix(dets, padded, opts.loss, opts.kind));
  std::vector<char> matched(dets.size(), 0);
  for (std::size_t j = 0; j < scene.instances.size(); ++j) {
    matched[assign.mapping[j]] = 1;
  }
  double min_matched = 1.0, max_unmatched = 0.0;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    const double c = dets[i].confidence();
    if (matched[i]) {
      min_matched = std::min(min_matched, c);
    } else {
      max_unmatched = std::max(max_unmatched, c);
    }
  }
  EXPECT_GT(min_matched, max_unmatched);
}

// With a step budget that cannot fully propagate the conventional loss's
// unit-strength endpoint pull, the shape-constrained variant still drives
// the domains home: ranges and shapes are optimized together, so every
// sampled point pushes on the bounds.
TEST(DirectFit, ShapeConstraintRecoversDomainLengthsBetter) {
  double err_constrained = 0.0, err_unconstrained = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const SyntheticScene scene = generate_scene(seed, 3);
    DirectFitOptions opts;
    opts.candidates = 20;
    opts.steps = 3000;
    opts.lr = 1e-4;
    opts.seed = seed;

    opts.kind = CurveLoss::ShapeConstrained;
    const auto [dets_c, trace_c] = direct_fit(scene, opts);
    err_constrained +=
        mean_domain_length_error(dets_c, scene, opts.loss, opts.kind);

    opts.kind = CurveLoss::Unconstrained;
    const auto [dets_u, trace_u] = direct_fit(scene, opts);
    err_unconstrained +=
        mean_domain_length_error(dets_u, scene, opts.loss, opts.kind);
  }
  EXPECT_LT(err_constrained, err_unconstrained);
}

// An absurd learning rate drives parameters to overflow; the run must stop
// at the first non-finite objective and hand back the partial trace.
TEST(DirectFit, NonFiniteLossAborts) {
  const SyntheticScene scene = generate_scene(2, 1);
  DirectFitOptions opts;
  opts.candidates = 2;
  opts.steps = 50;
  opts.lr = 1e80;
  opts.seed = 2;
  const auto [dets, trace] = direct_fit(scene, opts);
  EXPECT_TRUE(trace.aborted);
  EXPECT_GE(trace.abort_step, 1);
  EXPECT_LT(trace.abort_step, 50);
  EXPECT_EQ(trace.losses.size(), static_cast<std::size_t>(trace.abort_step));
  EXPECT_TRUE(trace.final_iou.empty());
}

TEST(DirectFit, RequiresEnoughCandidates) {
  const SyntheticScene scene = generate_scene(3, 3);
  DirectFitOptions opts;
  opts.candidates = 2;
  EXPECT_THROW(direct_fit(scene, opts), ArgumentError);
}

TEST(PadGroundTruths, FillsWithNonText) {
  const SyntheticScene scene = generate_scene(31, 2);
  const std::vector<GtInstance> padded = pad_ground_truths(scene.instances, 6);
  ASSERT_EQ(padded.size(), 6u);
  EXPECT_EQ(padded[0].class_indicator, 1);
  EXPECT_EQ(padded[1].class_indicator, 1);
  for (std::size_t i = 2; i < 6; ++i) {
    EXPECT_EQ(padded[i].class_indicator, 0);
    EXPECT_TRUE(padded[i].top.points.empty());
  }
}

}  // namespace
}  // namespace polyband
