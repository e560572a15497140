#include "roadseg/fixedpoint.hpp"

#include <cassert>
#include <cmath>

namespace roadseg {

std::int64_t round_half_even_shift(std::int64_t v, int shift) {
  assert(shift >= 0 && shift < 63);
  if (shift == 0) return v;
  // Arithmetic shift is floor division for two's complement; the remainder
  // is the non-negative fractional part in units of 2^-shift.
  const std::int64_t q = v >> shift;
  const std::int64_t r = v & ((std::int64_t{1} << shift) - 1);
  const std::int64_t half = std::int64_t{1} << (shift - 1);
  if (r > half) return q + 1;
  if (r < half) return q;
  return (q & 1) ? q + 1 : q;  // tie: pick the even neighbor
}

namespace {

std::int64_t saturate(std::int64_t v, QFormat q) {
  if (v > q.code_max()) return q.code_max();
  if (v < q.code_min()) return q.code_min();
  return v;
}

// Nearest integer, ties to even, without relying on the FPU rounding mode.
std::int64_t round_half_even(double x) {
  const double f = std::floor(x);
  const double r = x - f;
  auto fi = static_cast<std::int64_t>(f);
  if (r > 0.5) return fi + 1;
  if (r < 0.5) return fi;
  return (fi % 2 == 0) ? fi : fi + 1;
}

}  // namespace

std::int16_t quantize(double x, QFormat q) {
  if (std::isnan(x)) return 0;
  const double scaled = x * static_cast<double>(std::int64_t{1} << q.frac_bits);
  // Clamp before the float->int conversion so huge inputs stay defined.
  if (scaled >= static_cast<double>(q.code_max())) return static_cast<std::int16_t>(q.code_max());
  if (scaled <= static_cast<double>(q.code_min())) return static_cast<std::int16_t>(q.code_min());
  return static_cast<std::int16_t>(saturate(round_half_even(scaled), q));
}

double dequantize(std::int16_t code, QFormat q) {
  return static_cast<double>(code) / static_cast<double>(std::int64_t{1} << q.frac_bits);
}

Accum mac_reduce(std::span<const std::int32_t> products) {
  std::int64_t sum = 0;
  for (std::int32_t p : products) sum += p;
  return Accum{sum};
}

std::int16_t writeback(Accum a, QFormat feature_q, QFormat weight_q, bool relu) {
  std::int64_t v = round_half_even_shift(a.value, weight_q.frac_bits);
  if (relu && v < 0) v = 0;
  return static_cast<std::int16_t>(saturate(v, feature_q));
}

}  // namespace roadseg
