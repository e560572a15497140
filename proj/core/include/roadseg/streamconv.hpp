#ifndef ROADSEG_STREAMCONV_HPP
#define ROADSEG_STREAMCONV_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "roadseg/fixedpoint.hpp"
#include "roadseg/kitti_io.hpp"
#include "roadseg/projection.hpp"
#include "roadseg/refnet.hpp"

namespace roadseg {

/// One quantized feature-map plane (16-bit codes).
struct QPlane {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::int16_t> v;

  QPlane() = default;
  QPlane(std::size_t r, std::size_t c) : rows(r), cols(c), v(r * c, 0) {}
  std::int16_t at(std::size_t r, std::size_t c) const { return v[r * cols + c]; }
  std::int16_t& at(std::size_t r, std::size_t c) { return v[r * cols + c]; }
};

/// Channel stack of quantized planes.
struct QBlob {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<QPlane> planes;
};

/// Feature plane with the two-wide zero border baked in, mirroring the
/// padding RAM: pixels stream out of it without any edge special-casing.
struct PaddedPlane {
  std::size_t rows = 0;  // interior dimensions
  std::size_t cols = 0;
  std::vector<std::int16_t> v;  // (rows + 4) * (cols + 4), row-major

  std::size_t padded_rows() const { return rows + 4; }
  std::size_t padded_cols() const { return cols + 4; }
  std::int16_t at(std::size_t r, std::size_t c) const { return v[r * padded_cols() + c]; }
  std::int16_t& at(std::size_t r, std::size_t c) { return v[r * padded_cols() + c]; }
};

/// Copy a plane into a fresh padded plane; the border stays zero.
PaddedPlane pad_plane(const QPlane& p);

/// 5x5 pixel window, taps in row-major order (oldest line first).
struct Window5x5 {
  std::array<std::int16_t, 25> taps{};
  std::int16_t at(std::size_t r, std::size_t c) const { return taps[r * 5 + c]; }
};

/// Streaming window former: 4 line stores plus a 5x5 register window. Push
/// pixels in raster order; a window appears once 4 full lines and 5 more
/// pixels have been consumed, then once per fully-interior position.
class LineBuffer {
 public:
  explicit LineBuffer(std::size_t padded_cols);

  /// Consume one pixel; returns the 5x5 window it completes, if any.
  std::optional<Window5x5> push(std::int16_t px);

  std::uint64_t consumed() const { return consumed_; }
  std::uint64_t emitted() const { return emitted_; }

 private:
  std::size_t width_;
  std::array<std::vector<std::int16_t>, 4> lines_;  // lines_[0] newest
  Window5x5 window_{};
  std::uint64_t consumed_ = 0;
  std::uint64_t emitted_ = 0;
};

/// All 5x5 windows of a padded plane in raster order: exactly rows * cols of
/// them, one per interior position.
std::vector<Window5x5> stream_windows(const PaddedPlane& pp);

/// Quantized 5x5 kernel.
using QKernel = std::array<std::int16_t, 25>;

/// One layer's weights in fixed point. Kernels carry weight_q codes; biases
/// are feature_q codes shifted to the accumulator scale at use.
struct QLayerWeights {
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::vector<QKernel> kernels;       // [out][in]
  std::vector<std::int16_t> biases;   // [out], feature_q codes
  QFormat feature_q = QFormat::features();
  QFormat weight_q = QFormat::weights();

  const QKernel& kernel(std::size_t out, std::size_t in) const {
    return kernels[out * in_channels + in];
  }
};

QLayerWeights quantize_layer(const LayerWeights& lw, QFormat feature_q, QFormat weight_q);

/// Exact integer partial sums of one 2D convolution unit. 64-bit entries so
/// a 25-product window sum can never wrap whatever the codes are.
struct PartialPlane {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::int64_t> v;

  PartialPlane() = default;
  PartialPlane(std::size_t r, std::size_t c) : rows(r), cols(c), v(r * c, 0) {}
  std::int64_t at(std::size_t r, std::size_t c) const { return v[r * cols + c]; }
};

struct PartialPlanes {
  PartialPlane first;
  PartialPlane second;
};

/// One streaming pass of a conv unit over a padded plane with its 2 filters:
/// per window, two 25-multiplier dot products.
PartialPlanes conv_unit_pass(const PaddedPlane& pp, const QKernel& k0, const QKernel& k1);

/// Pass decomposition and cycle accounting of the layer engine. Loop l of a
/// layer produces output channels 2l and 2l+1.
struct StreamSchedule {
  std::vector<std::size_t> loops_per_layer;  // ceil(out_channels / 2) each
  std::uint64_t per_pass_cycles = 18000;
  std::uint64_t inter_pass_overhead_cycles = 0;
  double clock_hz = 350e6;
};

/// Streaming a padded plane costs one cycle per pixel plus the pipeline
/// flush; the default latency lands on 18,000 cycles for the 256x64 grid.
inline constexpr std::uint64_t kDefaultPipelineLatency = 320;
inline constexpr double kDefaultClockHz = 350e6;

std::uint64_t per_pass_cycles(const GridSpec& g,
                              std::uint64_t pipeline_latency = kDefaultPipelineLatency);

/// Schedule with loop counts derived from each layer's output depth.
StreamSchedule make_schedule(const WeightSet& ws, const GridSpec& g,
                             std::uint64_t pipeline_latency = kDefaultPipelineLatency,
                             double clock_hz = kDefaultClockHz,
                             std::uint64_t inter_pass_overhead = 0);

/// Schedule with a uniform loop count for every layer (the full-depth
/// reading: 11 layers x 32 loops = 352 passes).
StreamSchedule uniform_schedule(std::size_t layers = kNetworkLayers, std::size_t loops = 32,
                                const GridSpec& g = GridSpec{},
                                std::uint64_t pipeline_latency = kDefaultPipelineLatency,
                                double clock_hz = kDefaultClockHz,
                                std::uint64_t inter_pass_overhead = 0);

struct LayerCycles {
  std::size_t layer = 0;  // 1-based
  std::uint64_t passes = 0;
  std::uint64_t cycles = 0;
};

struct CycleReport {
  std::uint64_t passes = 0;
  std::uint64_t cycles_total = 0;
  std::vector<LayerCycles> per_layer;
  double clock_hz = kDefaultClockHz;

  double wall_seconds() const { return static_cast<double>(cycles_total) / clock_hz; }
};

/// Cycle accounting for a schedule without running any data through it.
CycleReport estimate_timing(const StreamSchedule& sched);

/// Bits of one on-chip feature memory: every plane is rows*cols 16-bit words.
constexpr std::uint64_t feature_memory_bits(const GridSpec& g) {
  return static_cast<std::uint64_t>(g.rows) * g.cols * 16;
}

/// Run one layer: ceil(out/2) loops; each loop streams every input channel
/// through a conv unit, fuses the partials in an exact adder tree, folds in
/// the bias and writes back 2 output planes. Returns the output stack and the
/// cycles consumed (loops * per_pass_cycles).
std::pair<QBlob, std::uint64_t> layer_pass(const QBlob& in, const QLayerWeights& lw,
                                           const StreamSchedule& sched, bool relu_activation);

struct StreamingOptions {
  QFormat feature_q = QFormat::features();
  QFormat weight_q = QFormat::weights();
};

struct StreamingResult {
  ScoreMap scores;
  CycleReport report;
};

/// Software model of the full layer engine: quantizes input and weights, runs
/// the 11 layers through two ping-pong banks of 64 plane memories, and
/// dequantizes the final two score planes.
class StreamingEngine {
 public:
  StreamingEngine(const WeightSet& ws, StreamSchedule sched, StreamingOptions options = {});

  StreamingResult forward(const FeatureTensor& t);

  /// Writebacks that hit the 16-bit rails in the last forward() call.
  std::uint64_t saturated_writebacks() const { return saturated_; }
  /// Most feature planes simultaneously alive in the last forward() call.
  std::size_t peak_live_planes() const { return peak_live_planes_; }

 private:
  std::vector<QLayerWeights> qlayers_;
  StreamSchedule sched_;
  StreamingOptions options_;
  std::uint64_t saturated_ = 0;
  std::size_t peak_live_planes_ = 0;
};

StreamingResult network_forward_streaming(const FeatureTensor& t, const WeightSet& ws,
                                          const StreamSchedule& sched,
                                          StreamingOptions options = {});

}  // namespace roadseg

#endif  // ROADSEG_STREAMCONV_HPP
