// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: every subcommand reads/writes the JSON formats of
// the library and emits SVG where asked. Outputs are byte-stable for fixed
// inputs and flags.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "polyband/band.hpp"
#include "polyband/cpa.hpp"
#include "polyband/eval.hpp"
#include "polyband/gt_fit.hpp"
#include "polyband/io.hpp"
#include "polyband/log.hpp"
#include "polyband/losses.hpp"
#include "polyband/matching.hpp"
#include "polyband/scene.hpp"
#include "polyband/svg.hpp"

namespace {

using namespace polyband;

struct CommandResult {
  int exit_code = 0;
  std::vector<std::string> artifacts;
};

// Flag values > config file > built-in defaults.
struct CommonOptions {
  std::string config_path;
  FullConfig config;

  void load() {
    if (!config_path.empty()) {
      config = full_config_from_json(read_json_file(config_path));
    }
  }
};

void emit_json(const Json& j, const std::string& out_path,
               CommandResult& result) {
  if (out_path.empty()) {
    std::printf("%s\n", j.dump(2).c_str());
  } else {
    write_json_file(out_path, j);
    result.artifacts.push_back(out_path);
  }
}

const char* side_color(int index) {
  static const char* kColors[4] = {"#1f77b4", "#2ca02c", "#d62728", "#9467bd"};
  return kColors[index % 4];
}

// --- fit ---------------------------------------------------------------

CommandResult run_fit(const std::string& annotations_path,
                      const std::string& out_path, int k_flag,
                      CommonOptions& common) {
  common.load();
  const int k = k_flag > 0 ? k_flag : common.config.loss.k;
  const Annotation ann = annotation_from_json(read_json_file(annotations_path));
  Json instances = Json::array();
  for (const Polygon& poly : ann.polygons) {
    const GtInstance gt = polygon_to_gt(poly, k);
    const PolyBand band = polygon_to_band(poly);
    instances.push_back(Json{{"gt", gt_to_json(gt)}, {"band", band_to_json(band)}});
  }
  const Json out = {{"image_w", ann.image_w},
                    {"image_h", ann.image_h},
                    {"k", k},
                    {"instances", instances}};
  CommandResult result;
  emit_json(out, out_path, result);
  return result;
}

// --- sample ------------------------------------------------------------

CommandResult run_sample(const std::string& band_path,
                         const std::string& contour_path,
                         const std::string& svg_path, int k_flag,
                         CommonOptions& common) {
  common.load();
  const int k = k_flag > 0 ? k_flag : common.config.loss.k;
  const PolyBand band = band_from_json(read_json_file(band_path));
  const Polygon contour = band_to_contour(band, k);
  CommandResult result;
  const Json contour_json = {{"k", k}, {"contour", points_to_json(contour)}};
  if (!svg_path.empty()) {
    SvgWriter svg;
    svg.add_polygon(contour, "#1f77b4");
    write_text_file(svg_path, svg.str());
    result.artifacts.push_back(svg_path);
  }
  if (!contour_path.empty() || svg_path.empty()) {
    emit_json(contour_json, contour_path, result);
  }
  return result;
}

// --- loss --------------------------------------------------------------

CommandResult run_loss(const std::string& band_path,
                       const std::string& gt_path, bool unconstrained,
                       const std::string& out_path, CommonOptions& common) {
  common.load();
  const PolyBand band = band_from_json(read_json_file(band_path));
  const GtInstance gt = gt_from_json(read_json_file(gt_path));
  const CurveLoss kind =
      unconstrained ? CurveLoss::Unconstrained : CurveLoss::ShapeConstrained;
  Json report = {{"variant", unconstrained ? "unconstrained" : "shape_constrained"}};
  double total = 0.0;
  if (gt.class_indicator != 0) {
    const struct {
      const char* name;
      const CurveSegment* seg;
      const SampledPoints* pts;
    } sides[4] = {{"top", &band.top, &gt.top},
                  {"bottom", &band.bottom, &gt.bottom},
                  {"left", &band.left, &gt.left},
                  {"right", &band.right, &gt.right}};
    for (const auto& [name, seg, pts] : sides) {
      const double value = kind == CurveLoss::ShapeConstrained
                               ? loss_shape_constrained(*seg, *pts)
                               : loss_unconstrained(*seg, *pts);
      report[name] = value;
      total += value;
    }
  }
  report["fit_loss"] = total;
  CommandResult result;
  emit_json(report, out_path, result);
  return result;
}

// --- match -------------------------------------------------------------

CommandResult run_match(const std::string& preds_path,
                        const std::string& gts_path, bool unconstrained,
                        const std::string& out_path, CommonOptions& common) {
  common.load();
  const Json preds_json = read_json_file(preds_path);
  const Json gts_json = read_json_file(gts_path);
  if (!preds_json.is_array() || !gts_json.is_array()) {
    throw FormatError("match: both inputs must be JSON arrays");
  }
  std::vector<Detection> preds;
  for (const Json& j : preds_json) preds.push_back(detection_from_json(j));
  std::vector<GtInstance> gts;
  for (const Json& j : gts_json) gts.push_back(gt_from_json(j));
  if (gts.size() > preds.size()) {
    throw FormatError("match: more ground-truth instances than predictions");
  }
  while (gts.size() < preds.size()) gts.push_back(padding_instance());

  LossConfig cfg = common.config.loss;
  for (const GtInstance& gt : gts) {
    if (gt.class_indicator != 0) {
      cfg.k = gt.top.k_segments;
      break;
    }
  }
  const CurveLoss kind =
      unconstrained ? CurveLoss::Unconstrained : CurveLoss::ShapeConstrained;
  const MatchAssignment assign =
      hungarian_assign(cost_matrix(preds, gts, cfg, kind));
  CommandResult result;
  emit_json(assignment_to_json(assign), out_path, result);
  return result;
}

// --- cpa ---------------------------------------------------------------

CommandResult run_cpa(const std::string& input_path,
                      const std::string& out_path,
                      const std::string& svg_path, CommonOptions& common) {
  common.load();
  const std::vector<FeatureMap> maps =
      feature_maps_from_json(read_json_file(input_path));
  if (maps.size() != 4) {
    throw FormatError("cpa: tensor file must hold exactly 4 maps");
  }
  const std::array<FeatureMap, 4> pyramid = {maps[0], maps[1], maps[2],
                                             maps[3]};
  const std::array<FeatureMap, 4> enhanced =
      cpa_forward(pyramid, common.config.cpa);
  CommandResult result;
  emit_json(feature_maps_to_json(
                {enhanced.begin(), enhanced.end()}),
            out_path, result);
  if (!svg_path.empty()) {
    // Attention heatmaps (channel 0) as a 2x2 grid of per-scale panels.
    const std::array<FeatureMap, 4> attention =
        cpa_attention(pyramid, common.config.cpa);
    SvgWriter svg;
    const double panel = 0.48;
    const double pos[4][2] = {{0.01, 0.01}, {0.51, 0.01}, {0.01, 0.51},
                              {0.51, 0.51}};
    for (int s = 0; s < 4; ++s) {
      svg.add_heatmap(attention[s], 0, pos[s][0], pos[s][1], panel);
    }
    write_text_file(svg_path, svg.str());
    result.artifacts.push_back(svg_path);
  }
  return result;
}

// --- eval --------------------------------------------------------------

std::vector<std::vector<Polygon>> gt_polygons_from_file(const Json& j) {
  std::vector<std::vector<Polygon>> out;
  if (j.is_object()) {
    out.push_back(annotation_from_json(j).polygons);
  } else if (j.is_array()) {
    for (const Json& img : j) {
      out.push_back(annotation_from_json(img).polygons);
    }
  } else {
    throw FormatError("eval: ground-truth file must be an annotation object "
                      "or an array of them");
  }
  return out;
}

CommandResult run_eval(const std::string& det_path, const std::string& gt_path,
                       double iou_threshold, double score_threshold,
                       int k_flag, const std::string& out_path,
                       CommonOptions& common) {
  common.load();
  const int k = k_flag > 0 ? k_flag : common.config.loss.k;
  const Json det_json = read_json_file(det_path);
  if (!det_json.is_array()) {
    throw FormatError("eval: detection file must be an array over images");
  }
  std::vector<std::vector<ScoredPolygon>> dets;
  for (const Json& img : det_json) {
    if (!img.is_array()) {
      throw FormatError("eval: each image entry must be an array of detections");
    }
    std::vector<ScoredPolygon> scored;
    for (const Json& d : img) scored.push_back(scored_polygon_from_json(d, k));
    dets.push_back(std::move(scored));
  }
  const std::vector<std::vector<Polygon>> gts =
      gt_polygons_from_file(read_json_file(gt_path));
  const EvalReport report =
      evaluate_detections(dets, gts, iou_threshold, score_threshold);
  CommandResult result;
  emit_json(eval_report_to_json(report), out_path, result);
  return result;
}

// --- demo --------------------------------------------------------------

std::string trace_to_csv(const FitTrace& trace) {
  std::string csv = "step,loss\n";
  char line[64];
  for (std::size_t i = 0; i < trace.losses.size(); ++i) {
    std::snprintf(line, sizeof(line), "%zu,%.17g\n", i, trace.losses[i]);
    csv += line;
  }
  return csv;
}

CommandResult run_demo(std::uint64_t seed, int m, int n, int steps, double lr,
                       bool unconstrained, const std::string& trace_path,
                       const std::string& svg_path, CommonOptions& common) {
  common.load();
  DirectFitOptions opts;
  opts.candidates = n;
  opts.steps = steps;
  opts.lr = lr;
  opts.seed = seed;
  opts.kind =
      unconstrained ? CurveLoss::Unconstrained : CurveLoss::ShapeConstrained;
  opts.loss = common.config.loss;

  const SyntheticScene scene = generate_scene(seed, m, opts.loss.k);
  const auto [dets, trace] = direct_fit(scene, opts);

  CommandResult result;
  if (!trace_path.empty()) {
    write_text_file(trace_path, trace_to_csv(trace));
    result.artifacts.push_back(trace_path);
  }
  if (trace.aborted) {
    throw NumericError("demo: non-finite loss at step " +
                       std::to_string(trace.abort_step) +
                       (trace_path.empty() ? "" : "; partial trace written"));
  }
  if (!svg_path.empty()) {
    SvgWriter svg;
    for (const GtInstance& gt : scene.instances) {
      svg.add_polygon(gt.polygon, "#2ca02c", "#2ca02c", 1.5, 0.15);
    }
    for (const Detection& det : dets) {
      if (det.confidence() <= 0.5) continue;
      try {
        svg.add_polygon(band_to_contour(canonicalized(det.band), opts.loss.k),
                        "#d62728", "none", 1.5);
      } catch (const DegeneracyError&) {
        // degenerate leftover candidate; nothing to draw
      }
    }
    write_text_file(svg_path, svg.str());
    result.artifacts.push_back(svg_path);
  }
  double last_loss = trace.losses.empty() ? 0.0 : trace.losses.back();
  log_info("demo: final loss " + std::to_string(last_loss));
  for (std::size_t j = 0; j < trace.final_iou.size(); ++j) {
    log_info("demo: instance " + std::to_string(j) + " IoU " +
             std::to_string(trace.final_iou[j]));
  }
  return result;
}

// --- render ------------------------------------------------------------

Polygon polygon_from_file(const Json& j) {
  if (j.is_array()) return points_from_json(j, "render.polygon");
  if (j.is_object()) {
    if (j.contains("polygon")) {
      return points_from_json(j["polygon"], "render.polygon");
    }
    if (j.contains("contour")) {
      return points_from_json(j["contour"], "render.contour");
    }
  }
  throw FormatError("render: polygon file must be [[x,y],...] or hold a "
                    "'polygon'/'contour' key");
}

CommandResult run_render(const std::vector<std::string>& band_paths,
                         const std::vector<std::string>& polygon_paths,
                         int k_flag, const std::string& svg_path,
                         CommonOptions& common) {
  common.load();
  const int k = k_flag > 0 ? k_flag : common.config.loss.k;
  SvgWriter svg;
  int color = 0;
  for (const std::string& path : polygon_paths) {
    svg.add_polygon(polygon_from_file(read_json_file(path)),
                    side_color(color++));
  }
  for (const std::string& path : band_paths) {
    const PolyBand band = band_from_json(read_json_file(path));
    svg.add_polygon(band_to_contour(band, k), side_color(color++));
  }
  write_text_file(svg_path, svg.str());
  CommandResult result;
  result.artifacts.push_back(svg_path);
  return result;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polynomial-band scene-text toolbox"};
  app.require_subcommand(1);

  CommonOptions common;
  app.add_option("--config", common.config_path,
                 "JSON config mirroring the loss and attention settings");

  // fit
  auto* fit = app.add_subcommand("fit", "Fit annotated polygons to bands");
  std::string fit_annotations, fit_out;
  int fit_k = 0;
  fit->add_option("--annotations", fit_annotations, "annotation JSON file")
      ->required();
  fit->add_option("--out", fit_out, "output JSON path (default stdout)");
  fit->add_option("--k", fit_k, "sampling segments per side");

  // sample
  auto* sample = app.add_subcommand("sample", "Sample a band into a contour");
  std::string sample_band, sample_contour, sample_svg;
  int sample_k = 0;
  sample->add_option("--band", sample_band, "band JSON file")->required();
  sample->add_option("--contour", sample_contour, "contour JSON output");
  sample->add_option("--svg", sample_svg, "SVG output");
  sample->add_option("--k", sample_k, "sampling segments per side");

  // loss
  auto* loss = app.add_subcommand("loss", "Per-side fitting loss report");
  std::string loss_band, loss_gt, loss_out;
  bool loss_constrained = false, loss_unconstrained = false;
  loss->add_option("--band", loss_band, "predicted band JSON")->required();
  loss->add_option("--gt", loss_gt, "ground-truth instance JSON")->required();
  loss->add_flag("--constrained", loss_constrained,
                 "shape-constrained loss (default)");
  loss->add_flag("--unconstrained", loss_unconstrained,
                 "conventional fitting loss");
  loss->add_option("--out", loss_out, "output JSON path (default stdout)");

  // match
  auto* match = app.add_subcommand("match", "Bipartite assignment");
  std::string match_preds, match_gts, match_out;
  bool match_unconstrained = false;
  match->add_option("--preds", match_preds, "detections JSON array")
      ->required();
  match->add_option("--gts", match_gts, "ground-truth instances JSON array")
      ->required();
  match->add_flag("--unconstrained", match_unconstrained,
                  "use the conventional loss in the cost");
  match->add_option("--out", match_out, "output JSON path (default stdout)");

  // cpa
  auto* cpa = app.add_subcommand("cpa", "Cross-scale pixel attention");
  std::string cpa_in, cpa_out, cpa_svg;
  cpa->add_option("--input", cpa_in, "tensor JSON file with 4 maps")
      ->required();
  cpa->add_option("--out", cpa_out, "output tensor JSON (default stdout)");
  cpa->add_option("--svg", cpa_svg, "attention heatmap SVG");

  // eval
  auto* eval = app.add_subcommand("eval", "Detection metrics");
  std::string eval_det, eval_gt, eval_out;
  double eval_iou = 0.5, eval_score = 0.5;
  int eval_k = 0;
  eval->add_option("--det", eval_det, "detections JSON")->required();
  eval->add_option("--gt", eval_gt, "ground-truth annotations JSON")
      ->required();
  eval->add_option("--iou-threshold", eval_iou, "IoU threshold (default 0.5)");
  eval->add_option("--score-threshold", eval_score,
                   "confidence threshold (default 0.5)");
  eval->add_option("--k", eval_k, "segments when sampling band detections");
  eval->add_option("--out", eval_out, "output JSON path (default stdout)");

  // demo
  auto* demo = app.add_subcommand("demo", "Direct-fit a synthetic scene");
  std::uint64_t demo_seed = 0;
  int demo_m = 3, demo_n = 20, demo_steps = 3000;
  double demo_lr = 0.005;
  bool demo_unconstrained = false;
  std::string demo_trace, demo_svg;
  demo->add_option("--seed", demo_seed, "scene and init seed");
  demo->add_option("--m", demo_m, "instances in the scene (1..8)");
  demo->add_option("--n", demo_n, "candidate count N");
  demo->add_option("--steps", demo_steps, "gradient steps");
  demo->add_option("--lr", demo_lr, "learning rate");
  demo->add_flag("--unconstrained", demo_unconstrained,
                 "train with the conventional loss");
  demo->add_option("--trace", demo_trace, "loss trace CSV output");
  demo->add_option("--svg", demo_svg, "scene rendering SVG output");

  // render
  auto* render = app.add_subcommand("render", "Overlay bands and polygons");
  std::vector<std::string> render_bands, render_polys;
  std::string render_svg;
  int render_k = 0;
  render->add_option("--band", render_bands, "band JSON file (repeatable)");
  render->add_option("--polygon", render_polys,
                     "polygon JSON file (repeatable)");
  render->add_option("--k", render_k, "segments when sampling bands");
  render->add_option("--svg", render_svg, "SVG output")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints help, exit 0
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    CommandResult result;
    if (*fit) {
      result = run_fit(fit_annotations, fit_out, fit_k, common);
    } else if (*sample) {
      result = run_sample(sample_band, sample_contour, sample_svg, sample_k,
                          common);
    } else if (*loss) {
      if (loss_constrained && loss_unconstrained) {
        std::fprintf(stderr, "polyband: choose one of --constrained / "
                             "--unconstrained\n");
        return 1;
      }
      result = run_loss(loss_band, loss_gt, loss_unconstrained, loss_out,
                        common);
    } else if (*match) {
      result =
          run_match(match_preds, match_gts, match_unconstrained, match_out,
                    common);
    } else if (*cpa) {
      result = run_cpa(cpa_in, cpa_out, cpa_svg, common);
    } else if (*eval) {
      result = run_eval(eval_det, eval_gt, eval_iou, eval_score, eval_k,
                        eval_out, common);
    } else if (*demo) {
      result = run_demo(demo_seed, demo_m, demo_n, demo_steps, demo_lr,
                        demo_unconstrained, demo_trace, demo_svg, common);
    } else if (*render) {
      result = run_render(render_bands, render_polys, render_k, render_svg,
                          common);
    }
    for (const std::string& path : result.artifacts) {
      log_info("wrote " + path);
    }
    return result.exit_code;
  } catch (const FormatError& e) {
    std::fprintf(stderr, "polyband: data error: %s\n", e.what());
    return 2;
  } catch (const ArgumentError& e) {
    std::fprintf(stderr, "polyband: data error: %s\n", e.what());
    return 2;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "polyband: numerical failure: %s\n", e.what());
    return 3;
  } catch (const DegeneracyError& e) {
    std::fprintf(stderr, "polyband: numerical failure: %s\n", e.what());
    return 3;
  } catch (const Error& e) {
    std::fprintf(stderr, "polyband: error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "polyband: error: %s\n", e.what());
    return 3;
  }
}
