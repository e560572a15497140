#ifndef ROADSEG_REFNET_HPP
#define ROADSEG_REFNET_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

#include "roadseg/kitti_io.hpp"
#include "roadseg/projection.hpp"

namespace roadseg {

/// Dense activation stack: rows x cols spatial grid with C channel planes.
struct Blob {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t channels = 0;
  std::vector<float> data;  // [channel][row][col]

  Blob() = default;
  Blob(std::size_t r, std::size_t c, std::size_t ch)
      : rows(r), cols(c), channels(ch), data(r * c * ch, 0.0f) {}

  float at(std::size_t channel, std::size_t row, std::size_t col) const {
    return data[(channel * rows + row) * cols + col];
  }
  float& at(std::size_t channel, std::size_t row, std::size_t col) {
    return data[(channel * rows + row) * cols + col];
  }
};

/// Two-channel output scores: channel 0 = not-road, channel 1 = road.
using ScoreMap = Blob;

/// Per-cell binary road labels.
struct LabelMap {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> road;

  LabelMap() = default;
  LabelMap(std::size_t r, std::size_t c) : rows(r), cols(c), road(r * c, 0) {}
  bool at(std::size_t row, std::size_t col) const { return road[row * cols + col] != 0; }
  void set(std::size_t row, std::size_t col, bool v) { road[row * cols + col] = v ? 1 : 0; }
};

/// Per-cell road confidence in [0, 1].
struct ProbabilityMap {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> p;

  ProbabilityMap() = default;
  ProbabilityMap(std::size_t r, std::size_t c) : rows(r), cols(c), p(r * c, 0.0f) {}
  float at(std::size_t row, std::size_t col) const { return p[row * cols + col]; }
};

Blob tensor_to_blob(const FeatureTensor& t);

/// 5x5 same-size convolution: stride 1, zero padding 2, cross-correlation
/// indexing, bias added per output channel. Throws ShapeError when the input
/// channel count does not match the filter bank.
Blob conv2d_same(const Blob& in, const LayerWeights& filters);

/// Elementwise max(0, x).
Blob relu(const Blob& b);

/// Full 11-layer forward pass: conv+ReLU ten times, then the score conv with
/// no activation.
ScoreMap forward(const FeatureTensor& t, const WeightSet& ws);

/// Numerically stable two-class softmax of the road channel.
ProbabilityMap road_probability(const ScoreMap& s);

/// road iff score(road) > score(not-road); ties are not-road.
LabelMap argmax_labels(const ScoreMap& s);

/// road iff probability >= threshold. A negative threshold selects argmax
/// labeling instead.
LabelMap threshold_labels(const ScoreMap& s, double threshold);

}  // namespace roadseg

#endif  // ROADSEG_REFNET_HPP
