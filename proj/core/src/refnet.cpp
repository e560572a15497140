#include "roadseg/refnet.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <sstream>

#include "roadseg/errors.hpp"

namespace roadseg {

Blob tensor_to_blob(const FeatureTensor& t) {
  Blob b(t.rows, t.cols, kFeatureChannels);
  b.data = t.data;
  return b;
}

Blob conv2d_same(const Blob& in, const LayerWeights& filters) {
  if (in.channels != filters.in_channels) {
    std::ostringstream msg;
    msg << "conv2d_same: input has " << in.channels << " channels, filters expect "
        << filters.in_channels;
    throw ShapeError(msg.str());
  }
  const std::size_t rows = in.rows, cols = in.cols;
  Blob out(rows, cols, filters.out_channels);
  const int nr = static_cast<int>(rows), nc = static_cast<int>(cols);

  for (std::size_t oc = 0; oc < filters.out_channels; ++oc) {
    for (int i = 0; i < nr; ++i) {
      for (int j = 0; j < nc; ++j) {
        double acc = filters.biases[oc];
        for (std::size_t ic = 0; ic < filters.in_channels; ++ic) {
          const auto k = filters.kernel(oc, ic);
          for (int u = -2; u <= 2; ++u) {
            const int ii = i + u;
            if (ii < 0 || ii >= nr) continue;  // zero padding
            for (int v = -2; v <= 2; ++v) {
              const int jj = j + v;
              if (jj < 0 || jj >= nc) continue;
              acc += static_cast<double>(in.at(ic, static_cast<std::size_t>(ii),
                                                static_cast<std::size_t>(jj))) *
                     static_cast<double>(k[static_cast<std::size_t>((u + 2) * 5 + (v + 2))]);
            }
          }
        }
        out.at(oc, static_cast<std::size_t>(i), static_cast<std::size_t>(j)) =
            static_cast<float>(acc);
      }
    }
  }
  return out;
}

Blob relu(const Blob& b) {
  Blob out = b;
  for (float& x : out.data) x = std::max(0.0f, x);
  return out;
}

ScoreMap forward(const FeatureTensor& t, const WeightSet& ws) {
  ws.validate();
  Blob x = tensor_to_blob(t);
  for (std::size_t layer = 0; layer < ws.layers.size(); ++layer) {
    x = conv2d_same(x, ws.layers[layer]);
    // No pooling anywhere: every blob keeps the input's spatial size, which
    // is what lets the hardware reuse one blob memory.
    assert(x.rows == t.rows && x.cols == t.cols);
    if (layer + 1 < ws.layers.size()) x = relu(x);  // score layer stays linear
  }
  return x;
}

ProbabilityMap road_probability(const ScoreMap& s) {
  if (s.channels != 2) throw ShapeError("road_probability: score map must have 2 channels");
  ProbabilityMap out(s.rows, s.cols);
  for (std::size_t i = 0; i < s.rows; ++i) {
    for (std::size_t j = 0; j < s.cols; ++j) {
      const double s0 = s.at(0, i, j);
      const double s1 = s.at(1, i, j);
      const double m = std::max(s0, s1);
      const double e0 = std::exp(s0 - m);
      const double e1 = std::exp(s1 - m);
      out.p[i * s.cols + j] = static_cast<float>(e1 / (e0 + e1));
    }
  }
  return out;
}

LabelMap argmax_labels(const ScoreMap& s) {
  if (s.channels != 2) throw ShapeError("argmax_labels: score map must have 2 channels");
  LabelMap out(s.rows, s.cols);
  for (std::size_t i = 0; i < s.rows; ++i)
    for (std::size_t j = 0; j < s.cols; ++j)
      out.set(i, j, s.at(1, i, j) > s.at(0, i, j));
  return out;
}

LabelMap threshold_labels(const ScoreMap& s, double threshold) {
  if (threshold < 0.0) return argmax_labels(s);
  const ProbabilityMap prob = road_probability(s);
  LabelMap out(s.rows, s.cols);
  for (std::size_t i = 0; i < s.rows; ++i)
    for (std::size_t j = 0; j < s.cols; ++j)
      out.set(i, j, prob.at(i, j) >= threshold);
  return out;
}

}  // namespace roadseg
