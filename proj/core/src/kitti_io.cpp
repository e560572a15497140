#include "roadseg/kitti_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "roadseg/errors.hpp"

namespace roadseg {

namespace {

constexpr std::size_t kRecordBytes = 16;
constexpr char kWeightMagic[4] = {'L', 'R', 'S', 'W'};
constexpr std::uint32_t kWeightVersion = 1;

float f32_from_le(const unsigned char* b) {
  std::uint32_t u = static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
                    (static_cast<std::uint32_t>(b[2]) << 16) |
                    (static_cast<std::uint32_t>(b[3]) << 24);
  return std::bit_cast<float>(u);
}

void f32_to_le(float f, unsigned char* b) {
  const auto u = std::bit_cast<std::uint32_t>(f);
  b[0] = static_cast<unsigned char>(u & 0xff);
  b[1] = static_cast<unsigned char>((u >> 8) & 0xff);
  b[2] = static_cast<unsigned char>((u >> 16) & 0xff);
  b[3] = static_cast<unsigned char>((u >> 24) & 0xff);
}

std::uint32_t u32_from_le(const unsigned char* b) {
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void u32_to_le(std::uint32_t u, unsigned char* b) {
  b[0] = static_cast<unsigned char>(u & 0xff);
  b[1] = static_cast<unsigned char>((u >> 8) & 0xff);
  b[2] = static_cast<unsigned char>((u >> 16) & 0xff);
  b[3] = static_cast<unsigned char>((u >> 24) & 0xff);
}

std::vector<unsigned char> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open: " + path.string());
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0, std::ios::beg);
  std::vector<unsigned char> bytes(size);
  if (size > 0) {
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size));
    if (in.gcount() != static_cast<std::streamsize>(size))
      throw FormatError("short read: " + path.string());
  }
  return bytes;
}

class ByteWriter {
 public:
  explicit ByteWriter(const std::filesystem::path& path) : out_(path, std::ios::binary) {
    if (!out_) throw FormatError("cannot open for writing: " + path.string());
  }
  void u32(std::uint32_t v) {
    unsigned char b[4];
    u32_to_le(v, b);
    out_.write(reinterpret_cast<const char*>(b), 4);
  }
  void f32(float v) {
    unsigned char b[4];
    f32_to_le(v, b);
    out_.write(reinterpret_cast<const char*>(b), 4);
  }
  void raw(const char* data, std::size_t n) { out_.write(data, static_cast<std::streamsize>(n)); }
  bool ok() const { return static_cast<bool>(out_); }

 private:
  std::ofstream out_;
};

class ByteReader {
 public:
  ByteReader(const std::vector<unsigned char>& bytes, const std::string& what)
      : bytes_(bytes), what_(what) {}
  std::uint32_t u32() {
    need(4);
    const std::uint32_t v = u32_from_le(bytes_.data() + pos_);
    pos_ += 4;
    return v;
  }
  float f32() {
    need(4);
    const float v = f32_from_le(bytes_.data() + pos_);
    pos_ += 4;
    return v;
  }
  void bytes4(char* dst) {
    need(4);
    std::memcpy(dst, bytes_.data() + pos_, 4);
    pos_ += 4;
  }
  bool exhausted() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) {
    if (pos_ + n > bytes_.size()) throw FormatError("truncated payload: " + what_);
  }
  const std::vector<unsigned char>& bytes_;
  std::string what_;
  std::size_t pos_ = 0;
};

}  // namespace

PointCloud load_point_cloud(const std::filesystem::path& path) {
  const auto bytes = read_all(path);
  if (bytes.size() % kRecordBytes != 0) {
    std::ostringstream msg;
    msg << "scan size " << bytes.size() << " is not a multiple of " << kRecordBytes << ": "
        << path.string();
    throw FormatError(msg.str());
  }
  PointCloud cloud;
  cloud.points.reserve(bytes.size() / kRecordBytes);
  for (std::size_t off = 0; off < bytes.size(); off += kRecordBytes) {
    Point p;
    p.x = f32_from_le(bytes.data() + off);
    p.y = f32_from_le(bytes.data() + off + 4);
    p.z = f32_from_le(bytes.data() + off + 8);
    p.intensity = f32_from_le(bytes.data() + off + 12);
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z) ||
        !std::isfinite(p.intensity)) {
      ++cloud.rejected_nonfinite;
      continue;
    }
    p.intensity = std::clamp(p.intensity, 0.0f, 1.0f);
    cloud.points.push_back(p);
  }
  return cloud;
}

CameraCalib load_calib(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open calib: " + path.string());

  std::map<std::string, std::vector<double>> entries;
  std::string line;
  while (std::getline(in, line)) {
    const auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    const std::string key = line.substr(0, colon);
    std::istringstream values(line.substr(colon + 1));
    std::vector<double> v;
    double x;
    while (values >> x) v.push_back(x);
    entries[key] = std::move(v);
  }

  auto take = [&](const std::string& key, std::size_t count, auto& dst) {
    const auto it = entries.find(key);
    if (it == entries.end()) throw FormatError("calib missing key '" + key + "': " + path.string());
    if (it->second.size() != count) {
      std::ostringstream msg;
      msg << "calib key '" << key << "' has " << it->second.size() << " values, expected " << count
          << ": " << path.string();
      throw FormatError(msg.str());
    }
    std::copy(it->second.begin(), it->second.end(), dst.begin());
  };

  CameraCalib calib;
  take("P2", 12, calib.p2);
  take("R0_rect", 9, calib.r0);
  take("Tr_velo_to_cam", 12, calib.tr_velo_to_cam);
  return calib;
}

void WeightSet::validate() const {
  if (layers.size() != kNetworkLayers) {
    std::ostringstream msg;
    msg << "weight set has " << layers.size() << " layers, expected " << kNetworkLayers;
    throw ShapeError(msg.str());
  }
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& lw = layers[i];
    const std::size_t want_in = (i == 0) ? kInputChannels : kHiddenChannels;
    const std::size_t want_out = (i + 1 == kNetworkLayers) ? kOutputChannels : kHiddenChannels;
    if (lw.in_channels != want_in || lw.out_channels != want_out) {
      std::ostringstream msg;
      msg << "layer " << (i + 1) << " is " << lw.in_channels << "->" << lw.out_channels
          << ", expected " << want_in << "->" << want_out;
      throw ShapeError(msg.str());
    }
    if (lw.kernels.size() != lw.in_channels * lw.out_channels * kKernelTaps)
      throw ShapeError("layer kernel buffer has wrong size");
    if (lw.biases.size() != lw.out_channels) throw ShapeError("layer bias buffer has wrong size");
  }
}

void save_weights(const WeightSet& ws, const std::filesystem::path& path) {
  ByteWriter out(path);
  out.raw(kWeightMagic, 4);
  out.u32(kWeightVersion);
  out.u32(static_cast<std::uint32_t>(ws.layers.size()));
  for (const auto& lw : ws.layers) {
    out.u32(static_cast<std::uint32_t>(lw.in_channels));
    out.u32(static_cast<std::uint32_t>(lw.out_channels));
    out.u32(kKernelDim);
    out.u32(kKernelDim);
    for (float w : lw.kernels) out.f32(w);
    for (float b : lw.biases) out.f32(b);
  }
  if (!out.ok()) throw FormatError("short write: " + path.string());
}

WeightSet load_weights(const std::filesystem::path& path) {
  const auto bytes = read_all(path);
  ByteReader in(bytes, path.string());

  char magic[4];
  in.bytes4(magic);
  if (std::memcmp(magic, kWeightMagic, 4) != 0)
    throw FormatError("bad weight file magic: " + path.string());
  const std::uint32_t version = in.u32();
  if (version != kWeightVersion) {
    std::ostringstream msg;
    msg << "unsupported weight file version " << version << ": " << path.string();
    throw FormatError(msg.str());
  }

  WeightSet ws;
  const std::uint32_t layer_count = in.u32();
  ws.layers.resize(layer_count);
  for (auto& lw : ws.layers) {
    lw.in_channels = in.u32();
    lw.out_channels = in.u32();
    const std::uint32_t kh = in.u32();
    const std::uint32_t kw = in.u32();
    if (kh != kKernelDim || kw != kKernelDim)
      throw FormatError("weight file kernel is not 5x5: " + path.string());
    lw.kernels.resize(lw.in_channels * lw.out_channels * kKernelTaps);
    for (float& w : lw.kernels) w = in.f32();
    lw.biases.resize(lw.out_channels);
    for (float& b : lw.biases) b = in.f32();
  }
  if (!in.exhausted()) throw FormatError("trailing bytes after weight payload: " + path.string());
  return ws;
}

namespace {

// SplitMix64: fully specified by its constants, no implementation freedom.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  /// Top 53 bits as a double in [0, 1).
  double next_unit() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

}  // namespace

WeightSet generate_random_weights(std::uint64_t seed) {
  SplitMix64 rng(seed);
  WeightSet ws;
  ws.layers.resize(kNetworkLayers);
  for (std::size_t i = 0; i < kNetworkLayers; ++i) {
    auto& lw = ws.layers[i];
    lw.in_channels = (i == 0) ? kInputChannels : kHiddenChannels;
    lw.out_channels = (i + 1 == kNetworkLayers) ? kOutputChannels : kHiddenChannels;
    lw.kernels.resize(lw.in_channels * lw.out_channels * kKernelTaps);
    lw.biases.assign(lw.out_channels, 0.0f);
    const double bound = std::sqrt(3.0 / (static_cast<double>(kKernelTaps) *
                                          static_cast<double>(lw.in_channels)));
    for (float& w : lw.kernels)
      w = static_cast<float>(-bound + rng.next_unit() * (2.0 * bound));
  }
  return ws;
}

}  // namespace roadseg
