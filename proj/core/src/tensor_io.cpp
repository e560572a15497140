#include "roadseg/tensor_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

#include "roadseg/errors.hpp"

namespace roadseg {

namespace {

constexpr char kTensorMagic[4] = {'L', 'R', 'S', 'T'};
constexpr std::uint32_t kTensorVersion = 1;

void put_u32(std::ofstream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::ifstream& in, const std::string& what) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (in.gcount() != 4) throw FormatError("truncated tensor header: " + what);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void save_blob(const Blob& b, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open for writing: " + path.string());
  out.write(kTensorMagic, 4);
  put_u32(out, kTensorVersion);
  put_u32(out, static_cast<std::uint32_t>(b.rows));
  put_u32(out, static_cast<std::uint32_t>(b.cols));
  put_u32(out, static_cast<std::uint32_t>(b.channels));
  for (float x : b.data) put_u32(out, std::bit_cast<std::uint32_t>(x));
  if (!out) throw FormatError("short write: " + path.string());
}

Blob load_blob(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open tensor: " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, kTensorMagic, 4) != 0)
    throw FormatError("bad tensor magic: " + path.string());
  if (get_u32(in, path.string()) != kTensorVersion)
    throw FormatError("unsupported tensor version: " + path.string());
  Blob b;
  b.rows = get_u32(in, path.string());
  b.cols = get_u32(in, path.string());
  b.channels = get_u32(in, path.string());
  // Validate the header against the real file size before allocating.
  const std::uintmax_t expect = 20 + std::uintmax_t{4} * b.rows * b.cols * b.channels;
  if (std::filesystem::file_size(path) != expect)
    throw FormatError("tensor payload does not match its header: " + path.string());
  b.data.resize(b.rows * b.cols * b.channels);
  for (float& x : b.data) x = std::bit_cast<float>(get_u32(in, path.string()));
  return b;
}

void save_feature_tensor(const FeatureTensor& t, const std::filesystem::path& path) {
  Blob b(t.rows, t.cols, kFeatureChannels);
  b.data = t.data;
  save_blob(b, path);
}

FeatureTensor load_feature_tensor(const std::filesystem::path& path) {
  Blob b = load_blob(path);
  if (b.channels != kFeatureChannels)
    throw FormatError("feature tensor must have 16 channels: " + path.string());
  FeatureTensor t(b.rows, b.cols);
  t.data = std::move(b.data);
  return t;
}

}  // namespace roadseg
