#include "roadseg/streamconv.hpp"

#include <cassert>
#include <sstream>
#include <utility>

#include "roadseg/errors.hpp"

namespace roadseg {

PaddedPlane pad_plane(const QPlane& p) {
  PaddedPlane pp;
  pp.rows = p.rows;
  pp.cols = p.cols;
  pp.v.assign(pp.padded_rows() * pp.padded_cols(), 0);
  for (std::size_t r = 0; r < p.rows; ++r)
    for (std::size_t c = 0; c < p.cols; ++c) pp.at(r + 2, c + 2) = p.at(r, c);
  return pp;
}

LineBuffer::LineBuffer(std::size_t padded_cols) : width_(padded_cols) {
  for (auto& line : lines_) line.assign(width_, 0);
}

std::optional<Window5x5> LineBuffer::push(std::int16_t px) {
  const std::size_t c = static_cast<std::size_t>(consumed_ % width_);
  const std::uint64_t r = consumed_ / width_;

  // Shift the register window one column left, then load the new right
  // column from the line taps: oldest stored line on top, fresh pixel at
  // the bottom.
  auto& w = window_.taps;
  for (std::size_t t = 0; t < 5; ++t) {
    w[t * 5 + 0] = w[t * 5 + 1];
    w[t * 5 + 1] = w[t * 5 + 2];
    w[t * 5 + 2] = w[t * 5 + 3];
    w[t * 5 + 3] = w[t * 5 + 4];
  }
  w[0 * 5 + 4] = lines_[3][c];
  w[1 * 5 + 4] = lines_[2][c];
  w[2 * 5 + 4] = lines_[1][c];
  w[3 * 5 + 4] = lines_[0][c];
  w[4 * 5 + 4] = px;

  lines_[3][c] = lines_[2][c];
  lines_[2][c] = lines_[1][c];
  lines_[1][c] = lines_[0][c];
  lines_[0][c] = px;

  ++consumed_;
  if (r >= 4 && c >= 4) {
    ++emitted_;
    return window_;
  }
  return std::nullopt;
}

std::vector<Window5x5> stream_windows(const PaddedPlane& pp) {
  LineBuffer lb(pp.padded_cols());
  std::vector<Window5x5> windows;
  windows.reserve(pp.rows * pp.cols);
  for (std::int16_t px : pp.v) {
    if (auto w = lb.push(px)) windows.push_back(*w);
  }
  assert(windows.size() == pp.rows * pp.cols);
  return windows;
}

QLayerWeights quantize_layer(const LayerWeights& lw, QFormat feature_q, QFormat weight_q) {
  QLayerWeights q;
  q.in_channels = lw.in_channels;
  q.out_channels = lw.out_channels;
  q.feature_q = feature_q;
  q.weight_q = weight_q;
  q.kernels.resize(lw.in_channels * lw.out_channels);
  for (std::size_t oc = 0; oc < lw.out_channels; ++oc) {
    for (std::size_t ic = 0; ic < lw.in_channels; ++ic) {
      const auto src = lw.kernel(oc, ic);
      auto& dst = q.kernels[oc * lw.in_channels + ic];
      for (std::size_t t = 0; t < kKernelTaps; ++t) dst[t] = quantize(src[t], weight_q);
    }
  }
  q.biases.resize(lw.out_channels);
  for (std::size_t oc = 0; oc < lw.out_channels; ++oc)
    q.biases[oc] = quantize(lw.biases[oc], feature_q);
  return q;
}

namespace {

// Accumulate one conv unit's pass over the padded plane into two int64
// planes. Products are exact in int32 (16x16 bits), sums exact in int64.
void accumulate_unit_pass(const PaddedPlane& pp, const QKernel& k0, const QKernel& k1,
                          std::int64_t* acc0, std::int64_t* acc1) {
  const std::size_t rows = pp.rows, cols = pp.cols;
  const std::size_t pc = pp.padded_cols();
  const std::int16_t* base = pp.v.data();
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      std::int64_t d0 = 0, d1 = 0;
      for (std::size_t u = 0; u < 5; ++u) {
        const std::int16_t* row = base + (i + u) * pc + j;
        const std::int16_t* kr0 = k0.data() + u * 5;
        const std::int16_t* kr1 = k1.data() + u * 5;
        for (std::size_t v = 0; v < 5; ++v) {
          const std::int32_t px = row[v];
          d0 += static_cast<std::int64_t>(px * kr0[v]);
          d1 += static_cast<std::int64_t>(px * kr1[v]);
        }
      }
      acc0[i * cols + j] += d0;
      acc1[i * cols + j] += d1;
    }
  }
}

std::int16_t writeback_counting(std::int64_t acc, QFormat feature_q, QFormat weight_q, bool relu,
                                std::uint64_t* saturated) {
  std::int64_t v = round_half_even_shift(acc, weight_q.frac_bits);
  if (relu && v < 0) v = 0;
  if (v > feature_q.code_max()) {
    if (saturated) ++*saturated;
    v = feature_q.code_max();
  } else if (v < feature_q.code_min()) {
    if (saturated) ++*saturated;
    v = feature_q.code_min();
  }
  return static_cast<std::int16_t>(v);
}

std::pair<QBlob, std::uint64_t> layer_pass_impl(const QBlob& in, const QLayerWeights& lw,
                                                const StreamSchedule& sched, bool relu_activation,
                                                std::uint64_t* saturated) {
  if (in.planes.size() != lw.in_channels) {
    std::ostringstream msg;
    msg << "layer_pass: input has " << in.planes.size() << " channels, weights expect "
        << lw.in_channels;
    throw ShapeError(msg.str());
  }
  const std::size_t rows = in.rows, cols = in.cols;
  const std::size_t loops = (lw.out_channels + 1) / 2;

  // Pad every input plane once; the hardware holds them in the padding RAM
  // and re-scans them every loop.
  std::vector<PaddedPlane> padded;
  padded.reserve(lw.in_channels);
  for (const auto& plane : in.planes) padded.push_back(pad_plane(plane));

  QBlob out;
  out.rows = rows;
  out.cols = cols;
  out.planes.assign(lw.out_channels, QPlane(rows, cols));

  std::vector<std::int64_t> acc0(rows * cols), acc1(rows * cols);
  for (std::size_t loop = 0; loop < loops; ++loop) {
    const std::size_t oc0 = 2 * loop;
    const std::size_t oc1 = oc0 + 1;
    const bool has_second = oc1 < lw.out_channels;

    // Bias enters the adder tree pre-scaled to the accumulator's
    // 2^(feat+weight) scale.
    const std::int64_t bias0 = static_cast<std::int64_t>(lw.biases[oc0])
                               << lw.weight_q.frac_bits;
    const std::int64_t bias1 = has_second ? (static_cast<std::int64_t>(lw.biases[oc1])
                                             << lw.weight_q.frac_bits)
                                          : 0;
    acc0.assign(rows * cols, bias0);
    acc1.assign(rows * cols, bias1);

    for (std::size_t ic = 0; ic < lw.in_channels; ++ic) {
      // Unused second filter of the last odd loop convolves zeros.
      static const QKernel kZero{};
      const QKernel& k1 = has_second ? lw.kernel(oc1, ic) : kZero;
      accumulate_unit_pass(padded[ic], lw.kernel(oc0, ic), k1, acc0.data(), acc1.data());
    }

    auto& plane0 = out.planes[oc0];
    for (std::size_t px = 0; px < rows * cols; ++px)
      plane0.v[px] = writeback_counting(acc0[px], lw.feature_q, lw.weight_q, relu_activation,
                                        saturated);
    if (has_second) {
      auto& plane1 = out.planes[oc1];
      for (std::size_t px = 0; px < rows * cols; ++px)
        plane1.v[px] = writeback_counting(acc1[px], lw.feature_q, lw.weight_q, relu_activation,
                                          saturated);
    }
  }
  return {std::move(out), static_cast<std::uint64_t>(loops) * sched.per_pass_cycles};
}

}  // namespace

PartialPlanes conv_unit_pass(const PaddedPlane& pp, const QKernel& k0, const QKernel& k1) {
  PartialPlanes out{PartialPlane(pp.rows, pp.cols), PartialPlane(pp.rows, pp.cols)};
  accumulate_unit_pass(pp, k0, k1, out.first.v.data(), out.second.v.data());
  return out;
}

std::uint64_t per_pass_cycles(const GridSpec& g, std::uint64_t pipeline_latency) {
  return static_cast<std::uint64_t>(g.rows + 4) * (g.cols + 4) + pipeline_latency;
}

StreamSchedule make_schedule(const WeightSet& ws, const GridSpec& g,
                             std::uint64_t pipeline_latency, double clock_hz,
                             std::uint64_t inter_pass_overhead) {
  StreamSchedule sched;
  sched.loops_per_layer.reserve(ws.layers.size());
  for (const auto& lw : ws.layers) sched.loops_per_layer.push_back((lw.out_channels + 1) / 2);
  sched.per_pass_cycles = per_pass_cycles(g, pipeline_latency);
  sched.clock_hz = clock_hz;
  sched.inter_pass_overhead_cycles = inter_pass_overhead;
  return sched;
}

StreamSchedule uniform_schedule(std::size_t layers, std::size_t loops, const GridSpec& g,
                                std::uint64_t pipeline_latency, double clock_hz,
                                std::uint64_t inter_pass_overhead) {
  StreamSchedule sched;
  sched.loops_per_layer.assign(layers, loops);
  sched.per_pass_cycles = per_pass_cycles(g, pipeline_latency);
  sched.clock_hz = clock_hz;
  sched.inter_pass_overhead_cycles = inter_pass_overhead;
  return sched;
}

CycleReport estimate_timing(const StreamSchedule& sched) {
  CycleReport report;
  report.clock_hz = sched.clock_hz;
  for (std::size_t l = 0; l < sched.loops_per_layer.size(); ++l) {
    LayerCycles lc;
    lc.layer = l + 1;
    lc.passes = sched.loops_per_layer[l];
    lc.cycles = lc.passes * (sched.per_pass_cycles + sched.inter_pass_overhead_cycles);
    report.passes += lc.passes;
    report.cycles_total += lc.cycles;
    report.per_layer.push_back(lc);
  }
  return report;
}

std::pair<QBlob, std::uint64_t> layer_pass(const QBlob& in, const QLayerWeights& lw,
                                           const StreamSchedule& sched, bool relu_activation) {
  return layer_pass_impl(in, lw, sched, relu_activation, nullptr);
}

StreamingEngine::StreamingEngine(const WeightSet& ws, StreamSchedule sched,
                                 StreamingOptions options)
    : sched_(std::move(sched)), options_(options) {
  ws.validate();
  qlayers_.reserve(ws.layers.size());
  for (const auto& lw : ws.layers)
    qlayers_.push_back(quantize_layer(lw, options_.feature_q, options_.weight_q));
}

StreamingResult StreamingEngine::forward(const FeatureTensor& t) {
  saturated_ = 0;
  peak_live_planes_ = 0;

  // Input bank: the 16 input channels, quantized to the feature format.
  QBlob bank;
  bank.rows = t.rows;
  bank.cols = t.cols;
  bank.planes.assign(kFeatureChannels, QPlane(t.rows, t.cols));
  for (std::size_t ch = 0; ch < kFeatureChannels; ++ch)
    for (std::size_t i = 0; i < t.rows; ++i)
      for (std::size_t j = 0; j < t.cols; ++j)
        bank.planes[ch].at(i, j) = quantize(t.at(ch, i, j), options_.feature_q);

  CycleReport report;
  report.clock_hz = sched_.clock_hz;

  for (std::size_t l = 0; l < qlayers_.size(); ++l) {
    const bool relu_activation = l + 1 < qlayers_.size();
    auto [next, cycles] = layer_pass_impl(bank, qlayers_[l], sched_, relu_activation, &saturated_);

    // Ping-pong banks: while a layer runs, its input bank and output bank
    // are both alive; two banks of 64 planes bound the footprint.
    peak_live_planes_ = std::max(peak_live_planes_, bank.planes.size() + next.planes.size());
    assert(bank.planes.size() <= kHiddenChannels && next.planes.size() <= kHiddenChannels);

    LayerCycles lc;
    lc.layer = l + 1;
    lc.passes = (qlayers_[l].out_channels + 1) / 2;
    lc.cycles = cycles + lc.passes * sched_.inter_pass_overhead_cycles;
    report.passes += lc.passes;
    report.cycles_total += lc.cycles;
    report.per_layer.push_back(lc);

    bank = std::move(next);
  }

  StreamingResult result;
  result.scores = ScoreMap(t.rows, t.cols, bank.planes.size());
  for (std::size_t c = 0; c < bank.planes.size(); ++c)
    for (std::size_t i = 0; i < t.rows; ++i)
      for (std::size_t j = 0; j < t.cols; ++j)
        result.scores.at(c, i, j) =
            static_cast<float>(dequantize(bank.planes[c].at(i, j), options_.feature_q));
  result.report = std::move(report);
  return result;
}

StreamingResult network_forward_streaming(const FeatureTensor& t, const WeightSet& ws,
                                          const StreamSchedule& sched, StreamingOptions options) {
  StreamingEngine engine(ws, sched, options);
  return engine.forward(t);
}

}  // namespace roadseg
