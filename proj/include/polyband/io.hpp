// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "polyband/band.hpp"
#include "polyband/cpa.hpp"
#include "polyband/errors.hpp"
#include "polyband/eval.hpp"
#include "polyband/gt_fit.hpp"
#include "polyband/losses.hpp"
#include "polyband/matching.hpp"

namespace polyband {

using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// Generic helpers

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw FormatError(path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path);
  out << body;
}

inline void write_json_file(const std::string& path, const Json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

namespace detail {

inline double get_number(const Json& j, const char* key, const char* what) {
  if (!j.contains(key) || !j[key].is_number()) {
    throw FormatError(std::string(what) + ": missing numeric field '" + key +
                      "'");
  }
  return j[key].get<double>();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Points and polygons: [[x, y], ...]

inline Json points_to_json(const std::vector<Point>& pts) {
  Json arr = Json::array();
  for (const Point& p : pts) arr.push_back({p.x, p.y});
  return arr;
}

inline std::vector<Point> points_from_json(const Json& j, const char* what) {
  if (!j.is_array()) {
    throw FormatError(std::string(what) + ": expected an array of [x,y] pairs");
  }
  std::vector<Point> pts;
  pts.reserve(j.size());
  for (const Json& e : j) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() ||
        !e[1].is_number()) {
      throw FormatError(std::string(what) + ": point must be [x, y]");
    }
    pts.push_back({e[0].get<double>(), e[1].get<double>()});
  }
  return pts;
}

// ---------------------------------------------------------------------------
// Curve segments and bands

inline Json curve_to_json(const CurveSegment& seg) {
  return Json{{"a2", seg.a2},
              {"a1", seg.a1},
              {"a0", seg.a0},
              {"e0", seg.e0},
              {"e1", seg.e1}};
}

inline CurveSegment curve_from_json(const Json& j, Axis axis,
                                    const char* what) {
  CurveSegment seg;
  seg.a2 = detail::get_number(j, "a2", what);
  seg.a1 = detail::get_number(j, "a1", what);
  seg.a0 = detail::get_number(j, "a0", what);
  seg.e0 = detail::get_number(j, "e0", what);
  seg.e1 = detail::get_number(j, "e1", what);
  seg.axis = axis;
  return seg;
}

inline Json band_to_json(const PolyBand& pb) {
  return Json{{"top", curve_to_json(pb.top)},
              {"bottom", curve_to_json(pb.bottom)},
              {"left", curve_to_json(pb.left)},
              {"right", curve_to_json(pb.right)}};
}

inline PolyBand band_from_json(const Json& j) {
  for (const char* side : {"top", "bottom", "left", "right"}) {
    if (!j.contains(side)) {
      throw FormatError(std::string("band: missing side '") + side + "'");
    }
  }
  PolyBand pb;
  pb.top = curve_from_json(j["top"], Axis::Horizontal, "band.top");
  pb.bottom = curve_from_json(j["bottom"], Axis::Horizontal, "band.bottom");
  pb.left = curve_from_json(j["left"], Axis::Vertical, "band.left");
  pb.right = curve_from_json(j["right"], Axis::Vertical, "band.right");
  return pb;
}

// ---------------------------------------------------------------------------
// Ground-truth instances

namespace detail {

inline Json sampled_to_json(const SampledPoints& sp) {
  return points_to_json(sp.points);
}

inline SampledPoints sampled_from_json(const Json& j, Axis axis,
                                       const char* what) {
  SampledPoints sp;
  sp.points = points_from_json(j, what);
  sp.axis = axis;
  sp.k_segments = sp.points.empty() ? 0 : static_cast<int>(sp.points.size()) - 1;
  return sp;
}

}  // namespace detail

inline Json gt_to_json(const GtInstance& gt) {
  return Json{{"class_indicator", gt.class_indicator},
              {"polygon", points_to_json(gt.polygon)},
              {"top", detail::sampled_to_json(gt.top)},
              {"bottom", detail::sampled_to_json(gt.bottom)},
              {"left", detail::sampled_to_json(gt.left)},
              {"right", detail::sampled_to_json(gt.right)}};
}

inline GtInstance gt_from_json(const Json& j) {
  GtInstance gt;
  if (j.contains("class_indicator")) {
    gt.class_indicator = j["class_indicator"].get<int>();
  }
  if (j.contains("polygon")) {
    gt.polygon = points_from_json(j["polygon"], "gt.polygon");
  }
  gt.top = detail::sampled_from_json(j.value("top", Json::array()),
                                     Axis::Horizontal, "gt.top");
  gt.bottom = detail::sampled_from_json(j.value("bottom", Json::array()),
                                        Axis::Horizontal, "gt.bottom");
  gt.left = detail::sampled_from_json(j.value("left", Json::array()),
                                      Axis::Vertical, "gt.left");
  gt.right = detail::sampled_from_json(j.value("right", Json::array()),
                                       Axis::Vertical, "gt.right");
  return gt;
}

// ---------------------------------------------------------------------------
// Annotations: pixel-space polygons plus the image size used to normalize

struct Annotation {
  int image_w = 0;
  int image_h = 0;
  std::vector<Polygon> polygons;  // normalized to [0,1]
};

inline Annotation annotation_from_json(const Json& j) {
  if (!j.contains("image_w") || !j.contains("image_h") ||
      !j.contains("polygons")) {
    throw FormatError(
        "annotation: expected {\"image_w\", \"image_h\", \"polygons\"}");
  }
  Annotation ann;
  ann.image_w = j["image_w"].get<int>();
  ann.image_h = j["image_h"].get<int>();
  if (ann.image_w <= 0 || ann.image_h <= 0) {
    throw FormatError("annotation: image size must be positive");
  }
  for (const Json& pj : j["polygons"]) {
    Polygon poly = points_from_json(pj, "annotation.polygon");
    for (Point& p : poly) {
      p.x /= ann.image_w;
      p.y /= ann.image_h;
    }
    ann.polygons.push_back(std::move(poly));
  }
  return ann;
}

// ---------------------------------------------------------------------------
// Detections

inline Json detection_to_json(const Detection& det) {
  return Json{{"score", det.confidence()}, {"band", band_to_json(det.band)}};
}

inline Detection detection_from_json(const Json& j) {
  Detection det;
  const double score = detail::get_number(j, "score", "detection");
  if (!(score > 0.0 && score < 1.0)) {
    throw FormatError("detection: score must be strictly inside (0,1)");
  }
  det.logit = logit_of(std::clamp(score, kConfidenceEps, 1.0 - kConfidenceEps));
  if (!j.contains("band")) throw FormatError("detection: missing 'band'");
  det.band = band_from_json(j["band"]);
  return det;
}

/// One evaluation-ready detection entry: either a band (sampled to a
/// contour with K segments per side) or a raw polygon.
inline ScoredPolygon scored_polygon_from_json(const Json& j, int k) {
  ScoredPolygon sp;
  sp.score = detail::get_number(j, "score", "detection");
  if (j.contains("band")) {
    sp.polygon = band_to_contour(band_from_json(j["band"]), k);
  } else if (j.contains("polygon")) {
    sp.polygon = points_from_json(j["polygon"], "detection.polygon");
  } else {
    throw FormatError("detection: need either 'band' or 'polygon'");
  }
  return sp;
}

// ---------------------------------------------------------------------------
// Feature maps: {"maps": [{"h", "w", "c", "data"} x4]}

inline Json feature_maps_to_json(const std::vector<FeatureMap>& maps) {
  Json arr = Json::array();
  for (const FeatureMap& m : maps) {
    arr.push_back(Json{
        {"h", m.height}, {"w", m.width}, {"c", m.channels}, {"data", m.values}});
  }
  return Json{{"maps", arr}};
}

inline std::vector<FeatureMap> feature_maps_from_json(const Json& j) {
  if (!j.contains("maps") || !j["maps"].is_array()) {
    throw FormatError("tensor file: expected {\"maps\": [...]}");
  }
  std::vector<FeatureMap> maps;
  for (const Json& mj : j["maps"]) {
    FeatureMap m;
    m.height = static_cast<int>(detail::get_number(mj, "h", "tensor map"));
    m.width = static_cast<int>(detail::get_number(mj, "w", "tensor map"));
    m.channels = static_cast<int>(detail::get_number(mj, "c", "tensor map"));
    if (!mj.contains("data") || !mj["data"].is_array()) {
      throw FormatError("tensor map: missing 'data' array");
    }
    m.values = mj["data"].get<std::vector<double>>();
    if (!m.shape_consistent()) {
      throw FormatError("tensor map: data length does not match h*w*c");
    }
    maps.push_back(std::move(m));
  }
  return maps;
}

// ---------------------------------------------------------------------------
// Configs

inline Json loss_config_to_json(const LossConfig& cfg) {
  return Json{{"alpha", cfg.alpha},
              {"gamma", cfg.gamma},
              {"lambda", cfg.lambda},
              {"K", cfg.k}};
}

inline LossConfig loss_config_from_json(const Json& j) {
  LossConfig cfg;
  cfg.alpha = j.value("alpha", cfg.alpha);
  cfg.gamma = j.value("gamma", cfg.gamma);
  cfg.lambda = j.value("lambda", cfg.lambda);
  cfg.k = j.value("K", cfg.k);
  validate_config(cfg);
  return cfg;
}

inline Json cpa_config_to_json(const CpaConfig& cfg) {
  return Json{{"target_sizes", cfg.target_sizes}, {"common_size", cfg.common_size}};
}

inline CpaConfig cpa_config_from_json(const Json& j) {
  CpaConfig cfg;
  if (j.contains("target_sizes")) {
    const auto sizes = j["target_sizes"].get<std::vector<int>>();
    if (sizes.size() != 4) {
      throw FormatError("cpa config: target_sizes must hold 4 entries");
    }
    std::copy(sizes.begin(), sizes.end(), cfg.target_sizes.begin());
  }
  cfg.common_size = j.value("common_size", cfg.common_size);
  validate_config(cfg);
  return cfg;
}

/// The --config document: {"loss": {...}, "cpa": {...}}, both optional.
struct FullConfig {
  LossConfig loss;
  CpaConfig cpa;
};

inline FullConfig full_config_from_json(const Json& j) {
  FullConfig cfg;
  if (j.contains("loss")) cfg.loss = loss_config_from_json(j["loss"]);
  if (j.contains("cpa")) cfg.cpa = cpa_config_from_json(j["cpa"]);
  return cfg;
}

// ---------------------------------------------------------------------------
// Reports

inline Json eval_report_to_json(const EvalReport& report) {
  Json per_image = Json::array();
  for (const auto& c : report.per_image) {
    per_image.push_back(Json{{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}});
  }
  return Json{{"precision", report.precision},
              {"recall", report.recall},
              {"f_measure", report.f_measure},
              {"true_positives", report.true_positives},
              {"false_positives", report.false_positives},
              {"false_negatives", report.false_negatives},
              {"per_image", per_image},
              {"errors", report.errors}};
}

inline Json assignment_to_json(const MatchAssignment& assign) {
  return Json{{"mapping", assign.mapping}, {"total_cost", assign.total_cost}};
}

}  // namespace polyband
