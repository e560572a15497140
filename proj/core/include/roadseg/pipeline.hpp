#ifndef ROADSEG_PIPELINE_HPP
#define ROADSEG_PIPELINE_HPP

#include <optional>
#include <string>

#include "roadseg/bev.hpp"
#include "roadseg/eval.hpp"
#include "roadseg/fixedpoint.hpp"
#include "roadseg/kitti_io.hpp"
#include "roadseg/postprocess.hpp"
#include "roadseg/projection.hpp"
#include "roadseg/refnet.hpp"
#include "roadseg/streamconv.hpp"

namespace roadseg {

enum class EngineKind { reference, streaming };

/// Everything a run needs. Flag and config-file handling lives in the CLI;
/// this struct is the resolved result.
struct PipelineConfig {
  GridSpec grid;
  BevSpec bev;
  QFormat feature_q = QFormat::features();
  QFormat weight_q = QFormat::weights();
  std::uint64_t pipeline_latency = kDefaultPipelineLatency;
  std::uint64_t inter_pass_overhead = 0;
  double clock_hz = kDefaultClockHz;
  EngineKind engine = EngineKind::reference;
  /// Road confidence cut; negative selects argmax labeling.
  double threshold = -1.0;
};

struct PipelineResult {
  FeatureTensor tensor;
  ScoreMap scores;
  RoadMask mask;
  std::optional<CycleReport> cycles;  // streaming engine only
};

ScoreMap run_inference(const FeatureTensor& t, const WeightSet& ws, const PipelineConfig& cfg,
                       std::optional<CycleReport>* cycles_out = nullptr);

/// scan -> features -> scores -> labels -> filled BEV mask.
PipelineResult run_pipeline(const PointCloud& cloud, const WeightSet& ws,
                            const PipelineConfig& cfg);

/// Threshold sweep for the evaluator: re-runs labeling and post-processing
/// per threshold against fixed scores/features.
EvalReport sweep_eval(const ScoreMap& scores, const FeatureTensor& features, const RoadMask& gt,
                      const PipelineConfig& cfg, std::span<const double> thresholds);

}  // namespace roadseg

#endif  // ROADSEG_PIPELINE_HPP
