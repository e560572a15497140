#ifndef ROADSEG_KITTI_IO_HPP
#define ROADSEG_KITTI_IO_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace roadseg {

/// One LiDAR return in the vehicle frame: x forward, y left, z up (meters),
/// plus unitless reflectance.
struct Point {
  float x = 0.0f;
  float y = 0.0f;
  float z = 0.0f;
  float intensity = 0.0f;
};

struct PointCloud {
  std::vector<Point> points;
  /// Records dropped at load time because a field was NaN/inf.
  std::size_t rejected_nonfinite = 0;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

inline constexpr std::size_t kKernelDim = 5;
inline constexpr std::size_t kKernelTaps = kKernelDim * kKernelDim;
inline constexpr std::size_t kNetworkLayers = 11;
inline constexpr std::size_t kInputChannels = 16;
inline constexpr std::size_t kHiddenChannels = 64;
inline constexpr std::size_t kOutputChannels = 2;

/// One convolution layer: a 5x5 filter bank per (out, in) channel pair and a
/// per-output-channel bias.
struct LayerWeights {
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::vector<float> kernels;  // [out][in][row][col], out*in*25 values
  std::vector<float> biases;   // [out]

  std::span<const float, kKernelTaps> kernel(std::size_t out, std::size_t in) const {
    return std::span<const float, kKernelTaps>(
        kernels.data() + (out * in_channels + in) * kKernelTaps, kKernelTaps);
  }
  std::span<float, kKernelTaps> kernel(std::size_t out, std::size_t in) {
    return std::span<float, kKernelTaps>(
        kernels.data() + (out * in_channels + in) * kKernelTaps, kKernelTaps);
  }
};

/// The full 11-layer network: 16 -> 64 -> ... -> 64 -> 2.
struct WeightSet {
  std::vector<LayerWeights> layers;

  /// Throws ShapeError unless the set matches the fixed architecture
  /// (11 layers, 16 in, 2 out, 64 everywhere else, 5x5 kernels).
  void validate() const;
};

/// KITTI camera calibration: P2 projection (3x4), R0 rectification (3x3),
/// velodyne-to-camera extrinsic (3x4). Row-major.
struct CameraCalib {
  std::array<double, 12> p2{};
  std::array<double, 9> r0{};
  std::array<double, 12> tr_velo_to_cam{};
};

/// Load a KITTI Velodyne scan: packed little-endian float32 quadruples
/// (x, y, z, intensity). File size must be a multiple of 16 bytes. Records
/// with non-finite fields are dropped and counted; intensity is clamped to
/// [0, 1].
PointCloud load_point_cloud(const std::filesystem::path& path);

/// Parse a KITTI calibration text file ("key: v1 v2 ... vN" lines). Requires
/// P2 (12 values), R0_rect (9) and Tr_velo_to_cam (12); other keys ignored.
CameraCalib load_calib(const std::filesystem::path& path);

/// Weight file ("LRSW"): magic, u32 version=1, u32 layer count, then per
/// layer u32 in, u32 out, u32 kh=5, u32 kw=5, out*in*25 float32 kernels in
/// [out][in][row][col] order, then out float32 biases. All little-endian.
void save_weights(const WeightSet& ws, const std::filesystem::path& path);
WeightSet load_weights(const std::filesystem::path& path);

/// Deterministic cross-platform weight init: a SplitMix64 stream seeded with
/// `seed` yields one u64 per weight in (layer, out, in, row, col) order; the
/// top 53 bits map to [0,1) and scale to uniform [-b, b] with
/// b = sqrt(3 / (25 * in_channels)). Biases are zero.
WeightSet generate_random_weights(std::uint64_t seed);

}  // namespace roadseg

#endif  // ROADSEG_KITTI_IO_HPP
