#include "roadseg/pipeline.hpp"

namespace roadseg {

ScoreMap run_inference(const FeatureTensor& t, const WeightSet& ws, const PipelineConfig& cfg,
                       std::optional<CycleReport>* cycles_out) {
  if (cfg.engine == EngineKind::reference) {
    if (cycles_out) cycles_out->reset();
    return forward(t, ws);
  }
  const StreamSchedule sched =
      make_schedule(ws, cfg.grid, cfg.pipeline_latency, cfg.clock_hz, cfg.inter_pass_overhead);
  StreamingResult result =
      network_forward_streaming(t, ws, sched, StreamingOptions{cfg.feature_q, cfg.weight_q});
  if (cycles_out) *cycles_out = std::move(result.report);
  return std::move(result.scores);
}

PipelineResult run_pipeline(const PointCloud& cloud, const WeightSet& ws,
                            const PipelineConfig& cfg) {
  PipelineResult out;
  out.tensor = build_feature_tensor(cloud, cfg.grid);
  out.scores = run_inference(out.tensor, ws, cfg, &out.cycles);
  const LabelMap labels = threshold_labels(out.scores, cfg.threshold);
  out.mask = drivable_area_mask(labels, out.tensor, cfg.bev);
  return out;
}

EvalReport sweep_eval(const ScoreMap& scores, const FeatureTensor& features, const RoadMask& gt,
                      const PipelineConfig& cfg, std::span<const double> thresholds) {
  auto prob_source = [&](double tau) {
    const LabelMap labels = threshold_labels(scores, tau);
    return drivable_area_mask(labels, features, cfg.bev);
  };
  return make_report(pr_sweep(prob_source, gt, thresholds));
}

}  // namespace roadseg
