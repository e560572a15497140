#ifndef ROADSEG_FIXEDPOINT_HPP
#define ROADSEG_FIXEDPOINT_HPP

#include <cstdint>
#include <span>

namespace roadseg {

/// Fixed-point storage format: signed two's-complement word with a fixed
/// number of fractional bits. Feature maps and weights use the same 16-bit
/// word but different fractional splits.
struct QFormat {
  int word_bits = 16;
  int frac_bits = 8;

  static constexpr QFormat features() { return {16, 8}; }
  static constexpr QFormat weights() { return {16, 14}; }

  constexpr double lsb() const { return 1.0 / static_cast<double>(std::int64_t{1} << frac_bits); }
  constexpr std::int64_t code_max() const { return (std::int64_t{1} << (word_bits - 1)) - 1; }
  constexpr std::int64_t code_min() const { return -(std::int64_t{1} << (word_bits - 1)); }
};

/// Wide accumulator of the convolution datapath. Holds the exact integer sum
/// of 16x16-bit products; sized so that up to 2^17 summands cannot overflow
/// (|sum| < 2^30 * 2^17 = 2^47).
struct Accum {
  std::int64_t value = 0;
};

/// Round v / 2^shift to the nearest integer, ties to even. Exact for any
/// 64-bit v with shift in [0, 62].
std::int64_t round_half_even_shift(std::int64_t v, int shift);

/// Real -> code: round(x * 2^frac_bits) with ties-to-even, saturated to the
/// word range. Saturation is defined behavior, not an error.
std::int16_t quantize(double x, QFormat q);

/// Code -> real, exact (the grid values are dyadic rationals).
double dequantize(std::int16_t code, QFormat q);

/// Exact sum of signed products. Models the adder tree as one wide integer
/// sum with no intermediate rounding or saturation, so the result does not
/// depend on reduction order.
Accum mac_reduce(std::span<const std::int32_t> products);

/// Single rounding/saturation point of the datapath: rescale the accumulator
/// from the product scale 2^(feat+weight) back to the feature scale with
/// ties-to-even, optionally clamp negatives to zero (ReLU), saturate to the
/// feature word. Bias must already be folded into the accumulator.
std::int16_t writeback(Accum a, QFormat feature_q, QFormat weight_q, bool relu);

}  // namespace roadseg

#endif  // ROADSEG_FIXEDPOINT_HPP
