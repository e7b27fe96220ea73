// SPDX-License-Identifier: Apache-2.0
#include "polyband/cpa.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <random>

namespace polyband {
namespace {

std::array<FeatureMap, 4> constant_pyramid(double value, int channels = 2) {
  const int sizes[4] = {10, 5, 3, 2};
  std::array<FeatureMap, 4> pyramid;
  for (int s = 0; s < 4; ++s) {
    pyramid[s] = make_feature_map(sizes[s], sizes[s], channels, value);
  }
  return pyramid;
}

CpaConfig small_config() {
  CpaConfig cfg;
  cfg.target_sizes = {16, 8, 4, 2};
  cfg.common_size = 8;
  return cfg;
}

TEST(ResizeBilinear, SameSizeIsIdentity) {
  FeatureMap m = make_feature_map(4, 3, 2);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (double& v : m.values) v = dist(rng);
  const FeatureMap out = resize_bilinear(m, 4, 3);
  EXPECT_EQ(out.values, m.values);
}

TEST(ResizeBilinear, OnePixelExtendsAsConstant) {
  FeatureMap m = make_feature_map(1, 1, 1, 0.7);
  const FeatureMap out = resize_bilinear(m, 5, 9);
  for (double v : out.values) EXPECT_DOUBLE_EQ(v, 0.7);
}

TEST(ResizeBilinear, CheckerboardCenter) {
  FeatureMap m = make_feature_map(2, 2, 1);
  m.at(0, 0, 0) = 0.0;
  m.at(0, 1, 0) = 1.0;
  m.at(1, 0, 0) = 1.0;
  m.at(1, 1, 0) = 0.0;
  const FeatureMap out = resize_bilinear(m, 3, 3);
  EXPECT_DOUBLE_EQ(out.at(1, 1, 0), 0.5);
  // Corners stay aligned.
  EXPECT_DOUBLE_EQ(out.at(0, 0, 0), 0.0);
  EXPECT_DOUBLE_EQ(out.at(0, 2, 0), 1.0);
  EXPECT_DOUBLE_EQ(out.at(2, 0, 0), 1.0);
  EXPECT_DOUBLE_EQ(out.at(2, 2, 0), 0.0);
}

TEST(ResizeBilinear, RejectsBadArguments) {
  EXPECT_THROW(resize_bilinear(FeatureMap{}, 4, 4), ArgumentError);
  FeatureMap m = make_feature_map(2, 2, 1);
  EXPECT_THROW(resize_bilinear(m, 0, 4), ArgumentError);
}

TEST(CpaForward, UniformInputGetsQuarterWeights) {
  const auto out = cpa_forward(constant_pyramid(4.0), small_config());
  const CpaConfig cfg = small_config();
  for (int s = 0; s < 4; ++s) {
    EXPECT_EQ(out[s].height, cfg.target_sizes[s]);
    EXPECT_EQ(out[s].width, cfg.target_sizes[s]);
    for (double v : out[s].values) EXPECT_NEAR(v, 0.25 * 4.0, 1e-12);
  }
}

TEST(CpaForward, DominantScaleTakesNearlyAll) {
  auto pyramid = constant_pyramid(0.0, 1);
  // Uniform +20 on one scale dominates everywhere after resizing.
  for (double& v : pyramid[2].values) v = 20.0;
  const auto attention = cpa_attention(pyramid, small_config());
  const double expected = std::exp(20.0) / (std::exp(20.0) + 3.0);
  EXPECT_GT(expected, 0.999);
  for (int s = 0; s < 4; ++s) {
    for (double v : attention[s].values) {
      if (s == 2) {
        EXPECT_NEAR(v, expected, 1e-9);
      } else {
        EXPECT_LT(v, 1e-3);
      }
    }
  }
  // The winning scale's features pass through nearly unchanged.
  const auto out = cpa_forward(pyramid, small_config());
  for (double v : out[2].values) EXPECT_NEAR(v, 20.0, 20.0 * 1e-3);
  for (double v : out[0].values) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(CpaAttention, SumsToOneEverywhere) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> dist(-3.0, 3.0);
  auto pyramid = constant_pyramid(0.0, 3);
  for (auto& map : pyramid) {
    for (double& v : map.values) v = dist(rng);
  }
  const auto attention = cpa_attention(pyramid, small_config());
  const int d = small_config().common_size;
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      for (int k = 0; k < 3; ++k) {
        double sum = 0.0;
        for (int s = 0; s < 4; ++s) sum += attention[s].at(i, j, k);
        EXPECT_NEAR(sum, 1.0, 1e-6);
      }
    }
  }
}

TEST(CpaAttention, ShiftEquivariantAndMonotone) {
  auto pyramid = constant_pyramid(0.0, 1);
  pyramid[0].at(0, 0, 0) = 0.4;
  pyramid[1].at(0, 0, 0) = -0.2;
  const auto base = cpa_attention(pyramid, small_config());

  // Adding a constant to all four stacked values leaves attention alone.
  // Constant maps stay constant through bilinear resizing, so shifting the
  // whole pyramid shifts every stacked value equally.
  auto shifted = pyramid;
  for (auto& map : shifted) {
    for (double& v : map.values) v += 1.7;
  }
  const auto after = cpa_attention(shifted, small_config());
  for (int s = 0; s < 4; ++s) {
    for (std::size_t i = 0; i < base[s].values.size(); ++i) {
      EXPECT_NEAR(after[s].values[i], base[s].values[i], 1e-6);
    }
  }

  // Raising one scale strictly raises its weight at that site.
  auto raised = pyramid;
  for (double& v : raised[3].values) v += 0.5;
  const auto raised_attention = cpa_attention(raised, small_config());
  for (std::size_t i = 0; i < base[3].values.size(); ++i) {
    EXPECT_GT(raised_attention[3].values[i], base[3].values[i]);
  }
}

TEST(CpaForward, ChannelMismatchRejected) {
  auto pyramid = constant_pyramid(1.0, 2);
  pyramid[1] = make_feature_map(5, 5, 3);
  EXPECT_THROW(cpa_forward(pyramid, small_config()), ArgumentError);
}

TEST(CpaConfigChecks, CommonSizeMustBeATarget) {
  CpaConfig cfg;
  cfg.target_sizes = {16, 8, 4, 2};
  cfg.common_size = 5;
  EXPECT_THROW(validate_config(cfg), ArgumentError);
  EXPECT_NO_THROW(validate_config(CpaConfig{}));  // defaults: 128/64/32/16, 64
}

}  // namespace
}  // namespace polyband
