#ifndef ROADSEG_TENSOR_IO_HPP
#define ROADSEG_TENSOR_IO_HPP

#include <filesystem>

#include "roadseg/projection.hpp"
#include "roadseg/refnet.hpp"

namespace roadseg {

/// Tensor container ("LRST"): magic, u32 version=1, u32 rows, u32 cols,
/// u32 channels, then rows*cols*channels float32 in [channel][row][col]
/// order. Little-endian throughout. Used for feature-tensor dumps and score
/// maps alike.
void save_blob(const Blob& b, const std::filesystem::path& path);
Blob load_blob(const std::filesystem::path& path);

void save_feature_tensor(const FeatureTensor& t, const std::filesystem::path& path);
/// Throws FormatError unless the file has exactly 16 channels.
FeatureTensor load_feature_tensor(const std::filesystem::path& path);

}  // namespace roadseg

#endif  // ROADSEG_TENSOR_IO_HPP
