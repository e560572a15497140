#include <benchmark/benchmark.h>

#include <random>

#include "roadseg/streamconv.hpp"

using namespace roadseg;

namespace {

QPlane random_plane(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
  QPlane p(rows, cols);
  for (auto& v : p.v) v = static_cast<std::int16_t>(rng() % 8192) - 4096;
  return p;
}

QKernel random_kernel(std::mt19937_64& rng) {
  QKernel k;
  for (auto& v : k) v = static_cast<std::int16_t>(rng() % 2800) - 1400;
  return k;
}

void PadPlane(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const QPlane p = random_plane(rng, 64, 256);
  for (auto _ : state) {
    PaddedPlane pp = pad_plane(p);
    benchmark::DoNotOptimize(pp.v.data());
  }
}
BENCHMARK(PadPlane);

void StreamWindows(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const PaddedPlane pp = pad_plane(random_plane(rng, 64, 256));
  for (auto _ : state) {
    auto windows = stream_windows(pp);
    benchmark::DoNotOptimize(windows.data());
  }
  state.SetItemsProcessed(state.iterations() * 16384);
}
BENCHMARK(StreamWindows);

void ConvUnitPass(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const PaddedPlane pp = pad_plane(random_plane(rng, 64, 256));
  const QKernel k0 = random_kernel(rng);
  const QKernel k1 = random_kernel(rng);
  for (auto _ : state) {
    PartialPlanes parts = conv_unit_pass(pp, k0, k1);
    benchmark::DoNotOptimize(parts.first.v.data());
  }
  state.SetItemsProcessed(state.iterations() * 16384 * 50);  // multiplies
}
BENCHMARK(ConvUnitPass);

void LayerPass(benchmark::State& state) {
  const auto channels = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(4);
  QBlob in;
  in.rows = 64;
  in.cols = 256;
  for (std::size_t c = 0; c < channels; ++c)
    in.planes.push_back(random_plane(rng, in.rows, in.cols));

  LayerWeights lw;
  lw.in_channels = channels;
  lw.out_channels = channels;
  lw.kernels.resize(channels * channels * kKernelTaps);
  std::uniform_real_distribution<float> w(-0.04f, 0.04f);
  for (auto& v : lw.kernels) v = w(rng);
  lw.biases.assign(channels, 0.0f);
  const QLayerWeights qlw = quantize_layer(lw, QFormat::features(), QFormat::weights());
  const StreamSchedule sched = uniform_schedule();

  for (auto _ : state) {
    auto [out, cycles] = layer_pass(in, qlw, sched, true);
    benchmark::DoNotOptimize(out.planes.data());
    benchmark::DoNotOptimize(cycles);
  }
}
BENCHMARK(LayerPass)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void FullStreamingForward(benchmark::State& state) {
  std::mt19937_64 rng(5);
  FeatureTensor t(16, 64);
  for (auto& v : t.data)
    v = std::uniform_real_distribution<float>(-40.0f, 40.0f)(rng);
  const WeightSet ws = generate_random_weights(42);
  const StreamSchedule sched = make_schedule(ws, GridSpec{});
  for (auto _ : state) {
    StreamingResult r = network_forward_streaming(t, ws, sched);
    benchmark::DoNotOptimize(r.scores.data.data());
  }
}
BENCHMARK(FullStreamingForward)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
