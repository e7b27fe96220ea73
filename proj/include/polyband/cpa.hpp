// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "polyband/errors.hpp"

namespace polyband {

/// Dense feature map, row-major with the channel index fastest:
/// values[(i * width + j) * channels + k].
struct FeatureMap {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<double> values;

  double at(int i, int j, int k) const {
    return values[(static_cast<std::size_t>(i) * width + j) * channels + k];
  }
  double& at(int i, int j, int k) {
    return values[(static_cast<std::size_t>(i) * width + j) * channels + k];
  }
  bool shape_consistent() const {
    return height > 0 && width > 0 && channels > 0 &&
           values.size() == static_cast<std::size_t>(height) * width * channels;
  }
};

inline FeatureMap make_feature_map(int h, int w, int c, double fill = 0.0) {
  FeatureMap m;
  m.height = h;
  m.width = w;
  m.channels = c;
  m.values.assign(static_cast<std::size_t>(h) * w * c, fill);
  return m;
}

/// Scale sizes of the cross-scale attention operator. The four pyramid maps
/// are enlarged to target_sizes, compared at common_size, and emitted back
/// at target_sizes.
struct CpaConfig {
  std::array<int, 4> target_sizes = {128, 64, 32, 16};
  int common_size = 64;
};

inline void validate_config(const CpaConfig& cfg) {
  for (int d : cfg.target_sizes) {
    if (d < 1) throw ArgumentError("CpaConfig: target sizes must be >= 1");
  }
  if (std::find(cfg.target_sizes.begin(), cfg.target_sizes.end(),
                cfg.common_size) == cfg.target_sizes.end()) {
    throw ArgumentError("CpaConfig: common size must be one of the targets");
  }
}

/// Bilinear resize with corner-aligned sampling. Same-size inputs come back
/// value-for-value; a 1x1 input extends as a constant.
inline FeatureMap resize_bilinear(const FeatureMap& map, int out_h, int out_w) {
  if (!map.shape_consistent()) {
    throw ArgumentError("resize_bilinear: empty or inconsistent feature map");
  }
  if (out_h < 1 || out_w < 1) {
    throw ArgumentError("resize_bilinear: output size must be >= 1");
  }
  FeatureMap out = make_feature_map(out_h, out_w, map.channels);
  const double scale_i =
      out_h > 1 ? static_cast<double>(map.height - 1) / (out_h - 1) : 0.0;
  const double scale_j =
      out_w > 1 ? static_cast<double>(map.width - 1) / (out_w - 1) : 0.0;
  for (int i = 0; i < out_h; ++i) {
    const double src_i = i * scale_i;
    const int i0 = std::min(static_cast<int>(src_i), map.height - 1);
    const int i1 = std::min(i0 + 1, map.height - 1);
    const double fi = src_i - i0;
    for (int j = 0; j < out_w; ++j) {
      const double src_j = j * scale_j;
      const int j0 = std::min(static_cast<int>(src_j), map.width - 1);
      const int j1 = std::min(j0 + 1, map.width - 1);
      const double fj = src_j - j0;
      for (int k = 0; k < map.channels; ++k) {
        const double v00 = map.at(i0, j0, k);
        const double v01 = map.at(i0, j1, k);
        const double v10 = map.at(i1, j0, k);
        const double v11 = map.at(i1, j1, k);
        out.at(i, j, k) = (1.0 - fi) * ((1.0 - fj) * v00 + fj * v01) +
                          fi * ((1.0 - fj) * v10 + fj * v11);
      }
    }
  }
  return out;
}

namespace detail {

inline void check_pyramid(const std::array<FeatureMap, 4>& pyramid,
                          const char* where) {
  const int c = pyramid[0].channels;
  for (const FeatureMap& m : pyramid) {
    if (!m.shape_consistent()) {
      throw ArgumentError(std::string(where) +
                          ": empty or inconsistent feature map");
    }
    if (m.channels != c) {
      throw ArgumentError(std::string(where) +
                          ": all maps must share the channel count");
    }
  }
}

/// Two-step rescale: each map to its target square size, then everything to
/// the common comparison size.
inline std::array<FeatureMap, 4> to_common_grid(
    const std::array<FeatureMap, 4>& pyramid, const CpaConfig& cfg) {
  std::array<FeatureMap, 4> common;
  for (int s = 0; s < 4; ++s) {
    const FeatureMap enlarged =
        resize_bilinear(pyramid[s], cfg.target_sizes[s], cfg.target_sizes[s]);
    common[s] = resize_bilinear(enlarged, cfg.common_size, cfg.common_size);
  }
  return common;
}

/// Numerically stable softmax over the four stacked scale values.
inline std::array<double, 4> scale_softmax(const std::array<FeatureMap, 4>& f,
                                           int i, int j, int k) {
  double vmax = f[0].at(i, j, k);
  for (int s = 1; s < 4; ++s) vmax = std::max(vmax, f[s].at(i, j, k));
  std::array<double, 4> a;
  double denom = 0.0;
  for (int s = 0; s < 4; ++s) {
    a[s] = std::exp(f[s].at(i, j, k) - vmax);
    denom += a[s];
  }
  for (int s = 0; s < 4; ++s) a[s] /= denom;
  return a;
}

}  // namespace detail

/// Cross-scale pixel attention. Enlarges each of the four maps to its
/// target square size, rescales all of them to the common size, takes a
/// per-pixel per-channel softmax across the four scales, multiplies the
/// attention back into the stacked features, and emits the four maps at
/// their target sizes again. Deterministic and parameter-free.
inline std::array<FeatureMap, 4> cpa_forward(
    const std::array<FeatureMap, 4>& pyramid, const CpaConfig& cfg = {}) {
  validate_config(cfg);
  detail::check_pyramid(pyramid, "cpa_forward");
  std::array<FeatureMap, 4> common = detail::to_common_grid(pyramid, cfg);
  const int d = cfg.common_size;
  const int c = pyramid[0].channels;
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      for (int k = 0; k < c; ++k) {
        const std::array<double, 4> a = detail::scale_softmax(common, i, j, k);
        for (int s = 0; s < 4; ++s) common[s].at(i, j, k) *= a[s];
      }
    }
  }
  std::array<FeatureMap, 4> out;
  for (int s = 0; s < 4; ++s) {
    out[s] =
        resize_bilinear(common[s], cfg.target_sizes[s], cfg.target_sizes[s]);
  }
  return out;
}

/// Attention weights only (no feature multiplication), at the common size.
/// Useful for inspection and heatmap rendering.
inline std::array<FeatureMap, 4> cpa_attention(
    const std::array<FeatureMap, 4>& pyramid, const CpaConfig& cfg = {}) {
  validate_config(cfg);
  detail::check_pyramid(pyramid, "cpa_attention");
  const std::array<FeatureMap, 4> common = detail::to_common_grid(pyramid, cfg);
  const int d = cfg.common_size;
  const int c = pyramid[0].channels;
  std::array<FeatureMap, 4> attention;
  for (int s = 0; s < 4; ++s) attention[s] = make_feature_map(d, d, c);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      for (int k = 0; k < c; ++k) {
        const std::array<double, 4> a = detail::scale_softmax(common, i, j, k);
        for (int s = 0; s < 4; ++s) attention[s].at(i, j, k) = a[s];
      }
    }
  }
  return attention;
}

}  // namespace polyband
