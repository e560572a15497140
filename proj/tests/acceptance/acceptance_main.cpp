// Acceptance suite: one line per criterion, nonzero exit if any fails.
//
// Run it through ctest (test name "acceptance") or directly:
//   ./acceptance [--kitti-dir DIR]
// Criterion 7 uses real Velodyne scans from ROADSEG_KITTI_DIR (or the flag)
// when provided; otherwise it falls back to three pinned synthetic street
// scenes from the simulator in tests/support.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <iostream>
#include <vector>

#include "oracles.hpp"
#include "roadseg/eval.hpp"
#include "roadseg/pipeline.hpp"
#include "test_support.hpp"

using namespace roadseg;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
  std::cout << (pass ? "[PASS]" : "[FAIL]") << " criterion " << criterion << ": " << detail
            << std::endl;
  if (!pass) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Platform-pinned uniform in [0, 1): raw mt19937_64 draws, no distribution.
double unit_draw(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

FeatureTensor random_tensor(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
  FeatureTensor t(rows, cols);
  for (auto& v : t.data)
    v = static_cast<float>(-100.0 + unit_draw(rng) * 200.0);
  return t;
}

WeightSet random_weights_with_biases(std::uint64_t seed, std::mt19937_64& rng) {
  WeightSet ws = generate_random_weights(seed);
  for (auto& lw : ws.layers)
    for (auto& b : lw.biases) b = static_cast<float>(-0.25 + unit_draw(rng) * 0.5);
  return ws;
}

// ---------------------------------------------------------------------------
// 1. Streaming engine vs direct quantized convolution oracle, bit-identical.
void criterion_1() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20240801);
  const test::QuantizedOracle oracle;

  std::size_t trials = 0, mismatches = 0;
  auto run_trial = [&](std::size_t rows, std::size_t cols, std::uint64_t seed) {
    const WeightSet ws = random_weights_with_biases(seed, rng);
    const FeatureTensor t = random_tensor(rng, rows, cols);
    const StreamSchedule sched = make_schedule(ws, GridSpec{});
    const StreamingResult got = network_forward_streaming(t, ws, sched);
    const ScoreMap want = oracle.forward(t, ws);
    ++trials;
    if (got.scores.data != want.data) ++mismatches;
  };

  for (std::uint64_t i = 0; i < 100; ++i) run_trial(8, 16, 1000 + i);  // 16x8x16
  for (std::uint64_t i = 0; i < 3; ++i) run_trial(64, 256, 2000 + i);  // full size

  std::ostringstream msg;
  msg << "oracle equivalence: " << trials - mismatches << "/" << trials
      << " bit-identical (100 trials at 16x8x16, 3 at 256x64x16), "
      << std::fixed << std::setprecision(1) << seconds_since(t0) << " s";
  report(1, mismatches == 0, msg.str());
}

// ---------------------------------------------------------------------------
// 2. Streaming vs float reference within the propagated quantization bound;
//    argmax agreement on at least 95% of cells for seed-42 weights.
void criterion_2() {
  const auto t0 = std::chrono::steady_clock::now();

  GridSpec g;
  g.rows = 16;
  g.cols = 32;
  g.azimuth_max_deg = 32 * 0.4 / 2.0;
  const PointCloud cloud = test::simulate_velodyne_scene(42);
  // Keep coordinates modest so no channel saturates the 16-bit feature word.
  PointCloud trimmed;
  for (const Point& p : cloud.points)
    if (std::abs(p.x) < 60.0f && std::abs(p.y) < 60.0f) trimmed.points.push_back(p);
  const FeatureTensor t = build_feature_tensor(trimmed, g);
  const WeightSet ws = generate_random_weights(42);

  const ScoreMap ref = forward(t, ws);

  StreamingEngine engine(ws, make_schedule(ws, g));
  const StreamingResult streamed = engine.forward(t);
  const bool no_saturation = engine.saturated_writebacks() == 0;

  // Per-layer propagation: e_l = L1(qw_l) * e_{l-1} + 25*Cin*Xmax_{l-1}*ew
  //                              + 2*ef
  // with ef, ew the half-LSB quantization steps, L1 the largest per-output
  // L1 norm of the dequantized kernels, Xmax the largest |activation| of the
  // float reference entering the layer. Exact interval arithmetic: deep
  // networks make it very conservative, so the argmax-agreement clause below
  // is the sharp check.
  const QFormat fq = QFormat::features(), wq = QFormat::weights();
  const double ef = fq.lsb() / 2.0, ew = wq.lsb() / 2.0;
  double e = ef;
  Blob x = tensor_to_blob(t);
  for (std::size_t l = 0; l < ws.layers.size(); ++l) {
    const auto& lw = ws.layers[l];
    double l1 = 0.0;
    for (std::size_t oc = 0; oc < lw.out_channels; ++oc) {
      double sum = 0.0;
      for (std::size_t ic = 0; ic < lw.in_channels; ++ic)
        for (float w : lw.kernel(oc, ic))
          sum += std::abs(dequantize(quantize(w, wq), wq));
      l1 = std::max(l1, sum);
    }
    double xmax = 0.0;
    for (float v : x.data) xmax = std::max(xmax, static_cast<double>(std::abs(v)));
    e = l1 * e + 25.0 * static_cast<double>(lw.in_channels) * xmax * ew + 2.0 * ef;
    x = conv2d_same(x, lw);
    if (l + 1 < ws.layers.size())
      for (auto& v : x.data) v = std::max(0.0f, v);
  }

  double max_err = 0.0;
  for (std::size_t k = 0; k < ref.data.size(); ++k)
    max_err = std::max(max_err,
                       static_cast<double>(std::abs(streamed.scores.data[k] - ref.data[k])));

  const LabelMap lref = argmax_labels(ref);
  const LabelMap lstr = argmax_labels(streamed.scores);
  std::size_t agree = 0;
  for (std::size_t k = 0; k < lref.road.size(); ++k)
    if (lref.road[k] == lstr.road[k]) ++agree;
  const double agreement = static_cast<double>(agree) / static_cast<double>(lref.road.size());

  std::ostringstream msg;
  msg << "float-reference agreement: max |score delta| " << std::scientific
      << std::setprecision(3) << max_err << " <= propagated bound " << e << ", argmax agreement "
      << std::fixed << std::setprecision(4) << agreement << " (>= 0.95), saturated writebacks "
      << engine.saturated_writebacks() << ", " << std::setprecision(1) << seconds_since(t0)
      << " s";
  report(2, max_err <= e && agreement >= 0.95 && no_saturation, msg.str());
}

// ---------------------------------------------------------------------------
// 3. Timing model: both pass-count readings land in [16.0 ms, 18.2 ms] and
//    bracket 16.9 ms at 18,000 cycles/pass, 350 MHz.
void criterion_3() {
  const GridSpec g;
  const WeightSet ws = generate_random_weights(0);
  const CycleReport derived = estimate_timing(make_schedule(ws, g));
  const CycleReport full = estimate_timing(uniform_schedule());

  const double ms321 = derived.wall_seconds() * 1e3;
  const double ms352 = full.wall_seconds() * 1e3;
  const bool pass = per_pass_cycles(g) == 18000 && derived.passes == 321 &&
                    full.passes == 352 && ms321 >= 16.0 && ms321 <= 18.2 && ms352 >= 16.0 &&
                    ms352 <= 18.2 && ms321 <= 16.9 && 16.9 <= ms352;

  std::ostringstream msg;
  msg << "timing model: 18000 cycles/pass at 350 MHz -> " << std::fixed << std::setprecision(4)
      << ms321 << " ms (321 passes), " << ms352
      << " ms (352 passes); both in [16.0, 18.2] ms, bracketing 16.9 ms";
  report(3, pass, msg.str());
}

// ---------------------------------------------------------------------------
// 4. Feature-memory word width: 256x64 cells x 16 bits = 256 kbit.
void criterion_4() {
  const GridSpec g;
  const bool pass = feature_memory_bits(g) == 262144 && feature_memory_bits(g) == 256 * 1024;
  std::ostringstream msg;
  msg << "memory word derivation: " << g.cols << "x" << g.rows << " x 16 bit = "
      << feature_memory_bits(g) << " bits = 256 kbit";
  report(4, pass, msg.str());
}

// ---------------------------------------------------------------------------
// 5. Pass decomposition: 64->64 in 32 loops, 16->64 in 32, 64->2 in 1.
void criterion_5() {
  std::mt19937_64 rng(5);
  const StreamSchedule sched = uniform_schedule();
  auto make_qlayer = [&](std::size_t in, std::size_t out) {
    LayerWeights lw;
    lw.in_channels = in;
    lw.out_channels = out;
    lw.kernels.assign(in * out * kKernelTaps, 0.01f);
    lw.biases.assign(out, 0.0f);
    return quantize_layer(lw, QFormat::features(), QFormat::weights());
  };
  auto blob = [&](std::size_t ch) {
    QBlob b;
    b.rows = 4;
    b.cols = 6;
    for (std::size_t c = 0; c < ch; ++c) {
      QPlane p(4, 6);
      for (auto& v : p.v) v = static_cast<std::int16_t>(rng() % 512);
      b.planes.push_back(std::move(p));
    }
    return b;
  };

  const auto [o64, c64] = layer_pass(blob(64), make_qlayer(64, 64), sched, true);
  const auto [o16, c16] = layer_pass(blob(16), make_qlayer(16, 64), sched, true);
  const auto [o2, c2] = layer_pass(blob(64), make_qlayer(64, 2), sched, false);

  const bool pass = c64 == 32 * sched.per_pass_cycles && o64.planes.size() == 64 &&
                    c16 == 32 * sched.per_pass_cycles && o16.planes.size() == 64 &&
                    c2 == 1 * sched.per_pass_cycles && o2.planes.size() == 2;
  std::ostringstream msg;
  msg << "pass decomposition: 64->64 used " << c64 / sched.per_pass_cycles
      << " loops for 64 maps, 16->64 used " << c16 / sched.per_pass_cycles << ", 64->2 used "
      << c2 / sched.per_pass_cycles;
  report(5, pass, msg.str());
}

// ---------------------------------------------------------------------------
// 6. Window stream: 260x68 padded plane -> 16,384 windows, first after 1,045
//    consumed pixels.
void criterion_6() {
  std::mt19937_64 rng(6);
  QPlane p(64, 256);
  for (auto& v : p.v) v = static_cast<std::int16_t>(rng() % 4096);
  const PaddedPlane pp = pad_plane(p);

  const auto windows = stream_windows(pp);
  LineBuffer lb(pp.padded_cols());
  std::uint64_t first_after = 0;
  for (std::int16_t px : pp.v) {
    if (lb.push(px)) {
      first_after = lb.consumed();
      break;
    }
  }
  const bool pass = pp.padded_rows() == 68 && pp.padded_cols() == 260 &&
                    windows.size() == 16384 && first_after == 1045;
  std::ostringstream msg;
  msg << "window stream: " << pp.padded_cols() << "x" << pp.padded_rows() << " padded plane -> "
      << windows.size() << " windows, first after " << first_after << " pixels";
  report(6, pass, msg.str());
}

// ---------------------------------------------------------------------------
// 7. Coverage statistics on >= 3 scans: spherical >= 0.80, top in [0.02,
//    0.12], image in [0.01, 0.10], ranked spherical > top > image.
void criterion_7(const std::string& kitti_dir) {
  const auto t0 = std::chrono::steady_clock::now();

  struct Scan {
    std::string name;
    PointCloud cloud;
  };
  std::vector<Scan> scans;
  std::optional<CameraCalib> calib;
  std::string source;

  if (!kitti_dir.empty()) {
    std::vector<std::filesystem::path> bins;
    for (const auto& entry : std::filesystem::directory_iterator(kitti_dir))
      if (entry.path().extension() == ".bin") bins.push_back(entry.path());
    std::sort(bins.begin(), bins.end());
    for (const auto& bin : bins) {
      if (scans.size() >= 3) break;
      scans.push_back(Scan{bin.filename().string(), load_point_cloud(bin)});
    }
    const auto calib_path = std::filesystem::path(kitti_dir) / "calib.txt";
    calib = std::filesystem::exists(calib_path) ? load_calib(calib_path)
                                                : test::typical_calib();
    source = "real scans from " + kitti_dir;
  }
  if (scans.size() < 3) {
    scans.clear();
    for (std::uint64_t seed : {2, 8, 15})
      scans.push_back(
          Scan{"synthetic-scene-" + std::to_string(seed), test::simulate_velodyne_scene(seed)});
    calib = test::typical_calib();
    source = "synthetic street scenes (set ROADSEG_KITTI_DIR for real scans)";
  }

  bool pass = true;
  std::ostringstream detail;
  for (const auto& scan : scans) {
    const CoverageReport r =
        coverage_stats(scan.cloud, GridSpec{}, calib, BevSpec{}, ImageDims{}, true);
    const double img = r.imageview_fraction.value_or(0.0);
    const bool ok = r.spherical_fraction >= 0.80 && r.topview_fraction >= 0.02 &&
                    r.topview_fraction <= 0.12 && img >= 0.01 && img <= 0.10 &&
                    r.spherical_fraction > r.topview_fraction && r.topview_fraction > img;
    pass = pass && ok;
    detail << " [" << scan.name << ": sph " << std::fixed << std::setprecision(3)
           << r.spherical_fraction << ", top " << r.topview_fraction << ", img " << img
           << (ok ? "" : " <- out of window") << "]";
  }

  std::ostringstream msg;
  msg << "coverage statistics on " << scans.size() << " scans (" << source << "):"
      << detail.str() << ", " << std::setprecision(1) << seconds_since(t0) << " s";
  report(7, pass && scans.size() >= 3, msg.str());
}

// ---------------------------------------------------------------------------
// 8. Polygon fill equals the per-cell ray-casting oracle on 200 random
//    simple polygons over a 64x64 grid, exact.
void criterion_8() {
  const auto t0 = std::chrono::steady_clock::now();
  BevSpec bev;
  bev.x_min_m = 0.0;
  bev.x_max_m = 6.4;
  bev.y_min_m = 0.0;
  bev.y_max_m = 6.4;
  bev.resolution_m = 0.1;

  std::mt19937_64 rng(8);
  std::size_t bad_polygons = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 3 + static_cast<int>(rng() % 10);
    std::vector<double> angles(static_cast<std::size_t>(n));
    for (auto& a : angles) a = unit_draw(rng) * 6.283185307179586;
    std::sort(angles.begin(), angles.end());
    Polygon poly;
    for (double a : angles) {
      const double radius = 2.0 + unit_draw(rng) * 28.0;
      poly.vertices.push_back(
          Vertex{32.0 + radius * std::cos(a), 32.0 + radius * std::sin(a)});
    }

    const RoadMask got = fill_polygon(poly, bev);
    bool ok = true;
    for (std::size_t ix = 0; ix < 64 && ok; ++ix)
      for (std::size_t iy = 0; iy < 64 && ok; ++iy) {
        const double cu = static_cast<double>(ix) + 0.5;
        const double cv = static_cast<double>(iy) + 0.5;
        const bool want = test::pnpoly_contains(poly.vertices, cu, cv) ||
                          test::on_polygon_boundary(poly.vertices, cu, cv);
        ok = got.at(ix, iy) == want;
      }
    if (!ok) ++bad_polygons;
  }

  std::ostringstream msg;
  msg << "geometry/fill: " << 200 - bad_polygons
      << "/200 random polygons match the ray-casting oracle exactly, " << std::fixed
      << std::setprecision(1) << seconds_since(t0) << " s";
  report(8, bad_polygons == 0, msg.str());
}

// ---------------------------------------------------------------------------
// 9. Metric fixtures, exact to 1e-12.
void criterion_9() {
  auto close = [](double a, double b) { return std::abs(a - b) <= 1e-12; };

  const bool f_ok = close(f_max({PrPoint{0.5, 1.0, 1.0}}), 1.0) &&
                    close(f_max({PrPoint{0.5, 0.5, 1.0}}), 2.0 / 3.0) &&
                    close(f_max({PrPoint{0.5, 0.0, 0.0}}), 0.0);

  PrCurve perfect;
  for (int i = 1; i <= 9; ++i) perfect.push_back(PrPoint{i / 10.0, 1.0, 1.0});
  const bool ap_ok = close(average_precision(perfect), 1.0) &&
                     close(average_precision({PrPoint{0.5, 1.0, 0.5}}), 6.0 / 11.0) &&
                     close(average_precision({PrPoint{0.5, 0.0, 1.0}}), 0.0);

  report(9, f_ok && ap_ok,
         "metric fixtures: f_max {1, 2/3, 0} and AP {1, 6/11, 0} exact to 1e-12");
}

// ---------------------------------------------------------------------------
// 10. Accuracy reproduction is out of scope by construction.
void criterion_10(bool deps_passed) {
  report(10, deps_passed,
         "published accuracy (F1max 91.79%, AP 84.76%) is not reproducible without the "
         "unpublished trained weights; correctness is covered by criteria 1-2 and the "
         "16.9 ms latency is reproduced as a cycle model by criterion 3");
}

}  // namespace

int main(int argc, char** argv) {
  std::string kitti_dir;
  if (const char* env = std::getenv("ROADSEG_KITTI_DIR")) kitti_dir = env;
  for (int i = 1; i + 1 < argc; ++i)
    if (std::strcmp(argv[i], "--kitti-dir") == 0) kitti_dir = argv[i + 1];

  std::cout << "roadseg acceptance suite\n";

  const int before_123 = g_failures;
  criterion_1();
  criterion_2();
  criterion_3();
  const bool deps_passed = g_failures == before_123;
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7(kitti_dir);
  criterion_8();
  criterion_9();
  criterion_10(deps_passed);

  std::cout << (g_failures == 0 ? "all criteria passed" : "FAILURES: ") << std::flush;
  if (g_failures != 0) std::cout << g_failures;
  std::cout << std::endl;
  return g_failures == 0 ? 0 : 1;
}
