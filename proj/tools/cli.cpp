#include "cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>

#include "roadseg/errors.hpp"
#include "roadseg/pipeline.hpp"
#include "roadseg/tensor_io.hpp"

namespace roadseg::cli {

namespace {

using nlohmann::json;

PipelineConfig config_from_json(const json& j) {
  PipelineConfig cfg;
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    cfg.grid.rows = g.value("rows", cfg.grid.rows);
    cfg.grid.cols = g.value("cols", cfg.grid.cols);
    cfg.grid.azimuth_res_deg = g.value("azimuth_res_deg", cfg.grid.azimuth_res_deg);
    cfg.grid.azimuth_max_deg = g.value("azimuth_max_deg", cfg.grid.azimuth_max_deg);
    cfg.grid.elevation_min_deg = g.value("elevation_min_deg", cfg.grid.elevation_min_deg);
    cfg.grid.elevation_max_deg = g.value("elevation_max_deg", cfg.grid.elevation_max_deg);
  }
  if (j.contains("bev")) {
    const auto& b = j.at("bev");
    cfg.bev.x_min_m = b.value("x_min_m", cfg.bev.x_min_m);
    cfg.bev.x_max_m = b.value("x_max_m", cfg.bev.x_max_m);
    cfg.bev.y_min_m = b.value("y_min_m", cfg.bev.y_min_m);
    cfg.bev.y_max_m = b.value("y_max_m", cfg.bev.y_max_m);
    cfg.bev.resolution_m = b.value("resolution_m", cfg.bev.resolution_m);
  }
  if (j.contains("quant")) {
    const auto& q = j.at("quant");
    cfg.feature_q.frac_bits = q.value("feature_frac_bits", cfg.feature_q.frac_bits);
    cfg.weight_q.frac_bits = q.value("weight_frac_bits", cfg.weight_q.frac_bits);
  }
  if (j.contains("schedule")) {
    const auto& s = j.at("schedule");
    cfg.clock_hz = s.value("clock_hz", cfg.clock_hz);
    cfg.pipeline_latency = s.value("pipeline_latency", cfg.pipeline_latency);
    cfg.inter_pass_overhead = s.value("inter_pass_overhead", cfg.inter_pass_overhead);
  }
  if (j.contains("engine"))
    cfg.engine = j.at("engine").get<std::string>() == "streaming" ? EngineKind::streaming
                                                                  : EngineKind::reference;
  if (j.contains("threshold")) cfg.threshold = j.at("threshold").get<double>();
  return cfg;
}

// The config file (if any) seeds the defaults; explicitly passed flags then
// overwrite the seeded values during parsing.
PipelineConfig load_base_config(int argc, char** argv) {
  std::string path;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc) {
      path = argv[i + 1];
      break;
    }
    if (arg.rfind("--config=", 0) == 0) {
      path = arg.substr(9);
      break;
    }
  }
  if (path.empty()) {
    if (const char* env = std::getenv("ROADSEG_CONFIG")) path = env;
  }
  if (path.empty()) return PipelineConfig{};

  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("malformed config file " + path + ": " + e.what());
  }
  return config_from_json(j);
}

void add_grid_options(CLI::App* sub, PipelineConfig& cfg) {
  sub->add_option("--rows", cfg.grid.rows, "Spherical grid rows");
  sub->add_option("--cols", cfg.grid.cols, "Spherical grid columns");
  sub->add_option("--azimuth-res", cfg.grid.azimuth_res_deg, "Azimuth bin width (deg)");
  sub->add_option("--azimuth-max", cfg.grid.azimuth_max_deg, "Azimuth half-FOV (deg)");
  sub->add_option("--elev-min", cfg.grid.elevation_min_deg, "Lowest elevation (deg)");
  sub->add_option("--elev-max", cfg.grid.elevation_max_deg, "Highest elevation (deg)");
}

void add_bev_options(CLI::App* sub, PipelineConfig& cfg) {
  sub->add_option("--bev-x-min", cfg.bev.x_min_m, "BEV near edge (m)");
  sub->add_option("--bev-x-max", cfg.bev.x_max_m, "BEV far edge (m)");
  sub->add_option("--bev-y-min", cfg.bev.y_min_m, "BEV right edge (m)");
  sub->add_option("--bev-y-max", cfg.bev.y_max_m, "BEV left edge (m)");
  sub->add_option("--bev-res", cfg.bev.resolution_m, "BEV cell size (m)");
}

void add_quant_options(CLI::App* sub, PipelineConfig& cfg) {
  sub->add_option("--feature-frac", cfg.feature_q.frac_bits,
                  "Fractional bits of the feature word");
  sub->add_option("--weight-frac", cfg.weight_q.frac_bits,
                  "Fractional bits of the weight word");
}

void add_schedule_options(CLI::App* sub, PipelineConfig& cfg) {
  sub->add_option("--clock-hz", cfg.clock_hz, "Engine clock (Hz)")
      ->check(CLI::PositiveNumber);
  sub->add_option("--latency", cfg.pipeline_latency, "Pipeline flush cycles per pass");
  sub->add_option("--overhead", cfg.inter_pass_overhead, "Extra cycles between passes");
}

void add_engine_option(CLI::App* sub, std::string& engine) {
  sub->add_option("--engine", engine, "Inference engine: reference | streaming")
      ->check(CLI::IsMember({"reference", "streaming"}));
}

json report_to_json(const CycleReport& report, const StreamSchedule& sched) {
  json per_layer = json::array();
  for (const auto& lc : report.per_layer)
    per_layer.push_back({{"layer", lc.layer}, {"passes", lc.passes}, {"cycles", lc.cycles}});
  return json{{"clock_hz", static_cast<std::uint64_t>(report.clock_hz)},
              {"per_pass_cycles", sched.per_pass_cycles},
              {"inter_pass_overhead_cycles", sched.inter_pass_overhead_cycles},
              {"passes", report.passes},
              {"cycles_total", report.cycles_total},
              {"wall_seconds", report.wall_seconds()},
              {"wall_milliseconds", report.wall_seconds() * 1e3},
              {"per_layer", per_layer}};
}

void emit(const json& j, const std::string& output) {
  const std::string text = j.dump(2) + "\n";
  if (output.empty() || output == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(output);
  if (!out) throw FormatError("cannot open for writing: " + output);
  out << text;
}

StreamSchedule schedule_for(const PipelineConfig& cfg, const WeightSet& ws) {
  return make_schedule(ws, cfg.grid, cfg.pipeline_latency, cfg.clock_hz,
                       cfg.inter_pass_overhead);
}

}  // namespace

int run(int argc, char** argv) {
  PipelineConfig cfg;
  try {
    cfg = load_base_config(argc, argv);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  CLI::App app{"LiDAR road segmentation pipeline with a fixed-point streaming engine"};
  app.require_subcommand(0, 1);
  std::string config_path;
  app.add_option("--config", config_path,
                 "JSON config file (flags override; env ROADSEG_CONFIG)");

  std::string engine = cfg.engine == EngineKind::streaming ? "streaming" : "reference";
  std::uint64_t seed = 0;
  std::string scan_path, tensor_path, weights_path, scores_path, features_path;
  std::string gt_path, pred_path, calib_path, output_path, report_path;
  std::string dump_tensor_path, dump_scores_path;
  std::size_t uniform_loops = 0;
  ImageDims image_dims;

  auto* gen = app.add_subcommand("gen-weights", "Write a deterministic random weight file");
  gen->add_option("--seed", seed, "PRNG seed")->capture_default_str();
  gen->add_option("--output", output_path, "Weight file path")->required();

  auto* pre = app.add_subcommand("preprocess", "Project a scan into a feature tensor");
  pre->add_option("--scan", scan_path, "Velodyne .bin scan")->required();
  pre->add_option("--output", output_path, "Feature tensor file")->required();
  add_grid_options(pre, cfg);

  auto* inf = app.add_subcommand("infer", "Run the network on a feature tensor");
  inf->add_option("--tensor", tensor_path, "Feature tensor file")->required();
  inf->add_option("--weights", weights_path, "Weight file")->required();
  inf->add_option("--output", output_path, "Score map file")->required();
  inf->add_option("--report", report_path, "Cycle report JSON (streaming engine)");
  add_engine_option(inf, engine);
  add_quant_options(inf, cfg);
  add_grid_options(inf, cfg);
  add_schedule_options(inf, cfg);

  auto* post = app.add_subcommand("postprocess", "Scores to drivable-area BEV mask");
  post->add_option("--scores", scores_path, "Score map file")->required();
  post->add_option("--features", features_path, "Feature tensor file")->required();
  post->add_option("--output", output_path, "Mask PGM path")->required();
  post->add_option("--threshold", cfg.threshold, "Road probability cut; negative = argmax");
  add_bev_options(post, cfg);

  auto* pipe = app.add_subcommand("pipeline", "Scan to mask in one shot");
  pipe->add_option("--scan", scan_path, "Velodyne .bin scan")->required();
  pipe->add_option("--weights", weights_path, "Weight file")->required();
  pipe->add_option("--output", output_path, "Mask PGM path")->required();
  pipe->add_option("--dump-tensor", dump_tensor_path, "Also write the feature tensor");
  pipe->add_option("--dump-scores", dump_scores_path, "Also write the score map");
  pipe->add_option("--report", report_path, "Cycle report JSON (streaming engine)");
  pipe->add_option("--threshold", cfg.threshold, "Road probability cut; negative = argmax");
  add_engine_option(pipe, engine);
  add_quant_options(pipe, cfg);
  add_grid_options(pipe, cfg);
  add_bev_options(pipe, cfg);
  add_schedule_options(pipe, cfg);

  auto* ev = app.add_subcommand("eval", "Score a prediction against ground truth");
  ev->add_option("--gt", gt_path, "Ground-truth mask PGM")->required();
  ev->add_option("--pred", pred_path, "Predicted mask PGM (single-point evaluation)");
  ev->add_option("--scores", scores_path, "Score map file (threshold sweep)");
  ev->add_option("--features", features_path, "Feature tensor file (threshold sweep)");
  ev->add_option("--output", output_path, "Report JSON path; '-' = stdout");
  add_bev_options(ev, cfg);

  auto* tim = app.add_subcommand("timing", "Cycle/latency model of the layer engine");
  tim->add_option("--uniform-loops", uniform_loops,
                  "Uniform per-layer loop count instead of the derived schedule")
      ->capture_default_str();
  tim->add_option("--output", output_path, "Report JSON path; '-' = stdout");
  add_grid_options(tim, cfg);
  add_schedule_options(tim, cfg);

  auto* st = app.add_subcommand("stats", "View coverage statistics of a scan");
  st->add_option("--scan", scan_path, "Velodyne .bin scan")->required();
  st->add_option("--calib", calib_path, "Camera calibration file (enables image-view)");
  st->add_option("--image-width", image_dims.width, "Image width in pixels")
      ->capture_default_str();
  st->add_option("--image-height", image_dims.height, "Image height in pixels")
      ->capture_default_str();
  st->add_option("--output", output_path, "Report JSON path; '-' = stdout");
  add_grid_options(st, cfg);
  add_bev_options(st, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints help, exit 0
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  cfg.engine = engine == "streaming" ? EngineKind::streaming : EngineKind::reference;

  try {
    if (gen->parsed()) {
      save_weights(generate_random_weights(seed), output_path);
      return 0;
    }

    if (pre->parsed()) {
      const PointCloud cloud = load_point_cloud(scan_path);
      if (cloud.rejected_nonfinite > 0)
        std::cerr << "warning: dropped " << cloud.rejected_nonfinite
                  << " non-finite records\n";
      save_feature_tensor(build_feature_tensor(cloud, cfg.grid), output_path);
      return 0;
    }

    if (inf->parsed()) {
      const FeatureTensor t = load_feature_tensor(tensor_path);
      const WeightSet ws = load_weights(weights_path);
      std::optional<CycleReport> cycles;
      const ScoreMap scores = run_inference(t, ws, cfg, &cycles);
      save_blob(scores, output_path);
      if (!report_path.empty()) {
        if (!cycles) throw ConfigError("--report requires --engine streaming");
        emit(report_to_json(*cycles, schedule_for(cfg, ws)), report_path);
      }
      return 0;
    }

    if (post->parsed()) {
      const Blob scores = load_blob(scores_path);
      const FeatureTensor features = load_feature_tensor(features_path);
      const LabelMap labels = threshold_labels(scores, cfg.threshold);
      save_mask_pgm(drivable_area_mask(labels, features, cfg.bev), output_path);
      return 0;
    }

    if (pipe->parsed()) {
      const PointCloud cloud = load_point_cloud(scan_path);
      const WeightSet ws = load_weights(weights_path);
      const PipelineResult result = run_pipeline(cloud, ws, cfg);
      save_mask_pgm(result.mask, output_path);
      if (!dump_tensor_path.empty()) save_feature_tensor(result.tensor, dump_tensor_path);
      if (!dump_scores_path.empty()) save_blob(result.scores, dump_scores_path);
      if (!report_path.empty()) {
        if (!result.cycles) throw ConfigError("--report requires --engine streaming");
        emit(report_to_json(*result.cycles, schedule_for(cfg, ws)), report_path);
      }
      return 0;
    }

    if (ev->parsed()) {
      const RoadMask gt = load_mask(gt_path, cfg.bev);
      if (!pred_path.empty()) {
        // Single binary mask: one-point evaluation.
        const Confusion c = confusion(load_mask(pred_path, cfg.bev), gt);
        const double precision = (c.tp + c.fp == 0)
                                     ? 1.0
                                     : static_cast<double>(c.tp) /
                                           static_cast<double>(c.tp + c.fp);
        const double recall = (c.tp + c.fn == 0)
                                  ? 1.0
                                  : static_cast<double>(c.tp) /
                                        static_cast<double>(c.tp + c.fn);
        const double f1 = (precision + recall == 0.0)
                              ? 0.0
                              : 2.0 * precision * recall / (precision + recall);
        emit(json{{"tp", c.tp},
                  {"fp", c.fp},
                  {"fn", c.fn},
                  {"tn", c.tn},
                  {"precision", precision},
                  {"recall", recall},
                  {"f1", f1}},
             output_path);
        return 0;
      }
      if (scores_path.empty() || features_path.empty())
        throw ConfigError("eval needs either --pred or both --scores and --features");
      const Blob scores = load_blob(scores_path);
      const FeatureTensor features = load_feature_tensor(features_path);
      const auto thresholds = default_thresholds();
      const EvalReport report = sweep_eval(scores, features, gt, cfg, thresholds);
      json curve = json::array();
      for (const auto& pt : report.curve)
        curve.push_back({{"threshold", pt.threshold},
                         {"precision", pt.precision},
                         {"recall", pt.recall}});
      emit(json{{"f_max", report.f_max},
                {"average_precision", report.average_precision},
                {"curve", curve}},
           output_path);
      return 0;
    }

    if (tim->parsed()) {
      StreamSchedule sched;
      if (uniform_loops > 0) {
        sched = uniform_schedule(kNetworkLayers, uniform_loops, cfg.grid,
                                 cfg.pipeline_latency, cfg.clock_hz, cfg.inter_pass_overhead);
      } else {
        sched = schedule_for(cfg, generate_random_weights(0));  // architecture only
      }
      emit(report_to_json(estimate_timing(sched), sched), output_path);
      return 0;
    }

    if (st->parsed()) {
      const PointCloud cloud = load_point_cloud(scan_path);
      std::optional<CameraCalib> calib;
      if (!calib_path.empty()) calib = load_calib(calib_path);
      const CoverageReport report =
          coverage_stats(cloud, cfg.grid, calib, cfg.bev, image_dims, calib.has_value());
      json j{{"points", cloud.size()},
             {"spherical_fraction", report.spherical_fraction},
             {"topview_fraction", report.topview_fraction}};
      if (report.imageview_fraction) j["imageview_fraction"] = *report.imageview_fraction;
      emit(j, output_path);
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  std::cerr << app.help();
  return 2;
}

}  // namespace roadseg::cli
