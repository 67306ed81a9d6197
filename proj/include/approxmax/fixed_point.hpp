#pragma once

// Runtime-parameterized two's-complement fixed-point arithmetic.
//
// A format q<t>.<f> has t total bits (sign included) and f fractional bits,
// with 2 <= t <= 32 and 0 <= f <= t-1. Raw values live in
// [-2^(t-1), 2^(t-1)-1] and represent raw * 2^-f.
//
// Every rounding site (quantization, multiplication, right shift, division)
// rounds half away from zero. Every overflow site saturates; nothing wraps.

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <string>

#include "approxmax/errors.hpp"

namespace approxmax {

// v / 2^shift, rounding half away from zero. Caller keeps |v| < 2^62 so the
// half-step offset cannot overflow.
constexpr std::int64_t round_shift_right(std::int64_t v, int shift) {
  if (shift <= 0) return v;
  const std::int64_t half = std::int64_t{1} << (shift - 1);
  return v >= 0 ? (v + half) >> shift : -((-v + half) >> shift);
}

constexpr __int128 round_shift_right(__int128 v, int shift) {
  if (shift <= 0) return v;
  const __int128 half = __int128{1} << (shift - 1);
  return v >= 0 ? (v + half) >> shift : -((-v + half) >> shift);
}

// num / den for den > 0, rounding half away from zero.
constexpr std::int64_t round_div(std::int64_t num, std::int64_t den) {
  const std::int64_t q = num / den;
  const std::int64_t r = num % den;
  if (r >= 0) {
    return 2 * r >= den ? q + 1 : q;
  }
  return -2 * r >= den ? q - 1 : q;
}

struct FixedFormat {
  int total_bits = 16;
  int frac_bits = 15;

  FixedFormat() = default;

  FixedFormat(int total, int frac) : total_bits(total), frac_bits(frac) {
    if (total < 2 || total > 32) {
      throw config_error("fixed-point total bits must be in [2, 32], got " +
                         std::to_string(total));
    }
    if (frac < 0 || frac > total - 1) {
      throw config_error("fixed-point fractional bits must be in [0, " +
                         std::to_string(total - 1) + "], got " +
                         std::to_string(frac));
    }
  }

  int integer_bits() const { return total_bits - frac_bits; }

  std::int64_t max_raw() const {
    return (std::int64_t{1} << (total_bits - 1)) - 1;
  }
  std::int64_t min_raw() const {
    return -(std::int64_t{1} << (total_bits - 1));
  }

  // Smallest representable increment.
  double step() const { return std::ldexp(1.0, -frac_bits); }
  double max_real() const { return std::ldexp(double(max_raw()), -frac_bits); }
  double min_real() const { return std::ldexp(double(min_raw()), -frac_bits); }

  bool operator==(const FixedFormat& o) const {
    return total_bits == o.total_bits && frac_bits == o.frac_bits;
  }
  bool operator!=(const FixedFormat& o) const { return !(*this == o); }

  std::string to_string() const {
    return "q" + std::to_string(total_bits) + "." + std::to_string(frac_bits);
  }

  // Accepts exactly "q<total>.<frac>", e.g. "q16.15".
  static FixedFormat parse(const std::string& text) {
    const auto fail = [&text]() -> FixedFormat {
      throw config_error("bad fixed-point format '" + text +
                         "', expected q<total>.<frac> such as q16.15");
    };
    if (text.size() < 4 || text[0] != 'q') return fail();
    const auto dot = text.find('.');
    if (dot == std::string::npos || dot == 1 || dot + 1 >= text.size()) {
      return fail();
    }
    for (std::size_t i = 1; i < text.size(); ++i) {
      if (i != dot && (text[i] < '0' || text[i] > '9')) return fail();
    }
    if (dot - 1 > 2 || text.size() - dot - 1 > 2) return fail();
    const int total = std::atoi(text.substr(1, dot - 1).c_str());
    const int frac = std::atoi(text.substr(dot + 1).c_str());
    return FixedFormat(total, frac);
  }
};

struct FixedValue {
  std::int64_t raw = 0;
  FixedFormat format;

  double to_real() const { return std::ldexp(double(raw), -format.frac_bits); }

  bool operator==(const FixedValue& o) const {
    return raw == o.raw && format == o.format;
  }
};

inline std::int64_t saturate_raw(std::int64_t raw, const FixedFormat& fmt) {
  if (raw > fmt.max_raw()) return fmt.max_raw();
  if (raw < fmt.min_raw()) return fmt.min_raw();
  return raw;
}

// Nearest representable value, ties away from zero, saturating at the rails.
// Rejects non-finite input.
inline FixedValue quantize(double x, const FixedFormat& fmt) {
  if (!std::isfinite(x)) {
    throw config_error("cannot quantize non-finite value");
  }
  const double scaled = std::ldexp(x, fmt.frac_bits);
  if (scaled >= double(fmt.max_raw())) return {fmt.max_raw(), fmt};
  if (scaled <= double(fmt.min_raw())) return {fmt.min_raw(), fmt};
  return {std::llround(scaled), fmt};
}

inline double dequantize(const FixedValue& v) { return v.to_real(); }

// Saturating addition of same-format operands.
inline FixedValue fx_add(const FixedValue& a, const FixedValue& b) {
  if (a.format != b.format) {
    throw config_error("fx_add operands must share a format");
  }
  return {saturate_raw(a.raw + b.raw, a.format), a.format};
}

inline FixedValue fx_sub(const FixedValue& a, const FixedValue& b) {
  if (a.format != b.format) {
    throw config_error("fx_sub operands must share a format");
  }
  return {saturate_raw(a.raw - b.raw, a.format), a.format};
}

// Full-width product rescaled back into the shared format: one rounding, one
// saturation. (a*b)*2^-f = (a_raw*b_raw)*2^-2f, so drop f bits.
inline FixedValue fx_mul(const FixedValue& a, const FixedValue& b) {
  if (a.format != b.format) {
    throw config_error("fx_mul operands must share a format");
  }
  const std::int64_t wide = a.raw * b.raw;
  return {saturate_raw(round_shift_right(wide, a.format.frac_bits), a.format),
          a.format};
}

// Arithmetic right shift with half-away rounding; the prescaling primitive.
inline FixedValue fx_shift_right(const FixedValue& a, int shift) {
  if (shift < 0) {
    throw config_error("fx_shift_right requires a non-negative shift");
  }
  return {round_shift_right(a.raw, shift), a.format};
}

}  // namespace approxmax
