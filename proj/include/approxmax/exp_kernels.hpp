#pragma once

// Approximate exp(x) kernels: truncated Taylor polynomials and piecewise
// polynomial lookup tables, each usable in two regimes.
//
//   fixed path  : every operand, coefficient, and intermediate is a
//                 fixed-point value; this is the bit-accurate model of the
//                 hardware datapath.
//   real path   : the same structural approximation evaluated in double
//                 precision, isolating method error from quantization error.
//
// LUT segment selection is shift-based. For a table of P segments (P a power
// of two) over [lo, hi) whose raw span is also a power of two,
//   index = (x_raw + bias) >> shift
// with bias = -lo_raw and shift = log2(span_raw / P). Inputs outside the
// domain clamp to its nearest edge and are counted.

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "approxmax/errors.hpp"
#include "approxmax/fixed_point.hpp"

namespace approxmax {

enum class ExpMethod { exact, taylor, lut };
enum class LutDegree { linear = 1, quadratic = 2 };

struct ExpKernelSpec {
  ExpMethod method = ExpMethod::exact;
  int order = 3;                         // Taylor truncation order, 1..3
  LutDegree degree = LutDegree::linear;  // LUT interpolation degree
  int segments = 64;                     // LUT segment count, power of two
  FixedFormat format;                    // working format of the fixed path

  void validate() const {
    if (method == ExpMethod::taylor && (order < 1 || order > 3)) {
      throw config_error("taylor order must be 1, 2 or 3, got " +
                         std::to_string(order));
    }
    if (method == ExpMethod::lut) {
      if (segments < 2 || (segments & (segments - 1)) != 0) {
        throw config_error("lut segment count must be a power of two >= 2, "
                           "got " + std::to_string(segments));
      }
    }
  }

  std::string name() const {
    switch (method) {
      case ExpMethod::exact:
        return "exact";
      case ExpMethod::taylor:
        return "taylor-" + std::to_string(order);
      case ExpMethod::lut:
        return std::string("lut-") +
               (degree == LutDegree::linear ? "linear" : "quadratic") + "-" +
               std::to_string(segments);
    }
    return "?";
  }

  // Accepts "exact", "taylor-<1|2|3>", "lut-<linear|quadratic>-<P>".
  static ExpKernelSpec parse(const std::string& name, FixedFormat fmt) {
    ExpKernelSpec spec;
    spec.format = fmt;
    if (name == "exact") {
      spec.method = ExpMethod::exact;
      return spec;
    }
    if (name.rfind("taylor-", 0) == 0) {
      const std::string rest = name.substr(7);
      if (rest.size() == 1 && rest[0] >= '1' && rest[0] <= '9') {
        spec.method = ExpMethod::taylor;
        spec.order = rest[0] - '0';
        spec.validate();
        return spec;
      }
    }
    if (name.rfind("lut-", 0) == 0) {
      std::string rest = name.substr(4);
      if (rest.rfind("linear-", 0) == 0) {
        spec.degree = LutDegree::linear;
        rest = rest.substr(7);
      } else if (rest.rfind("quadratic-", 0) == 0) {
        spec.degree = LutDegree::quadratic;
        rest = rest.substr(10);
      } else {
        throw config_error("unknown kernel name '" + name + "'");
      }
      if (!rest.empty() && rest.size() <= 5) {
        bool digits = true;
        for (char c : rest) digits = digits && c >= '0' && c <= '9';
        if (digits) {
          spec.method = ExpMethod::lut;
          spec.segments = std::atoi(rest.c_str());
          spec.validate();
          return spec;
        }
      }
    }
    throw config_error("unknown kernel name '" + name + "'");
  }
};

struct SegmentIndexMap {
  std::int64_t bias = 0;  // -lo_raw
  int shift = 0;          // log2(span_raw / segments)
  int segments = 1;

  std::int64_t domain_lo_raw() const { return -bias; }
  std::int64_t domain_hi_raw() const {  // exclusive
    return -bias + (std::int64_t{segments} << shift);
  }

  bool in_domain(std::int64_t raw) const {
    return raw >= domain_lo_raw() && raw < domain_hi_raw();
  }

  // Caller clamps out-of-domain raws first; this asserts nothing.
  int index_of(std::int64_t raw) const {
    return int((raw + bias) >> shift);
  }
};

struct LutSegment {
  double lo = 0.0;
  double hi = 0.0;
  // Monomial coefficients, highest degree first; linear tables use the last
  // two slots, quadratic tables all three.
  std::array<double, 3> coeff_real{};
  std::array<std::int64_t, 3> coeff_raw{};
};

struct LutTable {
  LutDegree degree = LutDegree::linear;
  int segments = 0;
  double domain_lo = 0.0;
  double domain_hi = 0.0;
  FixedFormat value_format;
  FixedFormat coeff_format;
  SegmentIndexMap index_map;
  std::vector<LutSegment> table;

  int coeff_count() const { return int(degree) + 1; }
  // Index of the first populated slot in the coeff arrays.
  int coeff_base() const { return 3 - coeff_count(); }
};

namespace detail {

// Exact-endpoint polynomial fit to exp over [x0, x1], returned highest
// degree first. Linear: secant through the endpoints. Quadratic: Lagrange
// interpolant through the endpoints and midpoint, expanded to monomials.
inline std::array<double, 3> fit_exp_segment(double x0, double x1,
                                             LutDegree degree) {
  const double y0 = std::exp(x0);
  const double y1 = std::exp(x1);
  if (degree == LutDegree::linear) {
    const double m = (y1 - y0) / (x1 - x0);
    const double b = y1 - m * x1;
    return {0.0, m, b};
  }
  const double xm = 0.5 * (x0 + x1);
  const double ym = std::exp(xm);
  const double d0 = (x0 - xm) * (x0 - x1);
  const double dm = (xm - x0) * (xm - x1);
  const double d1 = (x1 - x0) * (x1 - xm);
  const double a = y0 / d0 + ym / dm + y1 / d1;
  const double b = -(y0 * (xm + x1) / d0 + ym * (x0 + x1) / dm +
                     y1 * (x0 + xm) / d1);
  const double c = y0 * xm * x1 / d0 + ym * x0 * x1 / dm + y1 * x0 * xm / d1;
  return {a, b, c};
}

// Saturated fixed-path evaluation of one linear segment; mirrors
// eval_lut_fixed for the boundary-repair pass below.
inline std::int64_t eval_linear_segment(const LutTable& t, int p,
                                        std::int64_t x_raw) {
  const int fv = t.value_format.frac_bits;
  __int128 acc = round_shift_right(__int128(t.table[p].coeff_raw[1]) * x_raw, fv) +
                 t.table[p].coeff_raw[2];
  acc <<= (fv - t.coeff_format.frac_bits);
  if (acc > t.value_format.max_raw()) return t.value_format.max_raw();
  if (acc < t.value_format.min_raw()) return t.value_format.min_raw();
  return std::int64_t(acc);
}

// Coefficient rounding can leave the quantized polynomial of a segment
// starting a few raw units below where its predecessor ended, breaking the
// monotonicity the real interpolant guarantees. Walk the boundaries and lift
// offending intercepts by the smallest coefficient step that restores
// non-decreasing output. Slopes of e^x secants are positive, so segments stay
// monotone inside and the repaired table is non-decreasing over the whole
// domain.
inline void repair_linear_boundaries(LutTable& t) {
  const std::int64_t seg_width = std::int64_t{1} << t.index_map.shift;
  const std::int64_t grain =
      std::int64_t{1} << (t.value_format.frac_bits - t.coeff_format.frac_bits);
  for (int p = 1; p < t.segments; ++p) {
    const std::int64_t xb = t.index_map.domain_lo_raw() + p * seg_width;
    const std::int64_t prev_end = eval_linear_segment(t, p - 1, xb - 1);
    const std::int64_t cur_start = eval_linear_segment(t, p, xb);
    if (cur_start < prev_end) {
      const std::int64_t need = prev_end - cur_start;
      t.table[p].coeff_raw[2] += (need + grain - 1) / grain;
    }
  }
}

// Raw grid coordinate of a domain endpoint; must land exactly on the grid.
inline std::int64_t endpoint_raw(double x, const FixedFormat& fmt,
                                 const char* which) {
  const double scaled = std::ldexp(x, fmt.frac_bits);
  if (scaled != std::floor(scaled) || std::abs(scaled) > double(fmt.max_raw()) + 1) {
    throw config_error(std::string("lut domain ") + which + " " +
                       std::to_string(x) + " is not representable in " +
                       fmt.to_string());
  }
  return std::int64_t(scaled);
}

}  // namespace detail

// Builds a P-segment table fitting exp over [lo, hi). The raw span must be a
// power of two and at least P so that segment selection reduces to a shift.
// Coefficients are stored in the widest-fraction format of the same total
// width that still represents every coefficient without saturating; this
// matches the working format whenever the coefficients fit in it.
inline LutTable build_lut(const ExpKernelSpec& spec, double lo, double hi) {
  spec.validate();
  if (spec.method != ExpMethod::lut) {
    throw config_error("build_lut requires a lut kernel spec");
  }
  if (!(lo < hi)) throw config_error("lut domain requires lo < hi");

  const FixedFormat fmt = spec.format;
  const std::int64_t lo_raw = detail::endpoint_raw(lo, fmt, "lo");
  const std::int64_t hi_raw = detail::endpoint_raw(hi, fmt, "hi");
  if (lo_raw < fmt.min_raw() || hi_raw > fmt.max_raw() + 1) {
    throw config_error("lut domain exceeds the working format range");
  }
  const std::int64_t span = hi_raw - lo_raw;
  if ((span & (span - 1)) != 0) {
    throw config_error("lut domain raw span must be a power of two, got " +
                       std::to_string(span));
  }
  if (span < spec.segments) {
    throw config_error("lut domain holds fewer raw steps than segments");
  }

  LutTable t;
  t.degree = spec.degree;
  t.segments = spec.segments;
  t.domain_lo = lo;
  t.domain_hi = hi;
  t.value_format = fmt;
  t.index_map.bias = -lo_raw;
  t.index_map.segments = spec.segments;
  int shift = 0;
  for (std::int64_t s = span / spec.segments; s > 1; s >>= 1) ++shift;
  t.index_map.shift = shift;

  const double h = (hi - lo) / spec.segments;
  double max_abs_coeff = 0.0;
  t.table.resize(spec.segments);
  for (int p = 0; p < spec.segments; ++p) {
    LutSegment& seg = t.table[p];
    seg.lo = lo + p * h;
    seg.hi = lo + (p + 1) * h;
    seg.coeff_real = detail::fit_exp_segment(seg.lo, seg.hi, spec.degree);
    for (int j = t.coeff_base(); j < 3; ++j) {
      max_abs_coeff = std::max(max_abs_coeff, std::abs(seg.coeff_real[j]));
    }
  }

  // Widen the integer part until max_abs_coeff fits; fail when even an
  // all-integer format cannot hold it.
  int frac = fmt.frac_bits;
  while (frac > 0 &&
         std::ldexp(max_abs_coeff, frac) >= double(fmt.max_raw()) + 0.5) {
    --frac;
  }
  if (std::ldexp(max_abs_coeff, frac) >= double(fmt.max_raw()) + 0.5) {
    throw config_error("lut coefficients overflow " + fmt.to_string() +
                       " even with zero fractional bits; largest is " +
                       std::to_string(max_abs_coeff));
  }
  t.coeff_format = FixedFormat(fmt.total_bits, frac);

  for (LutSegment& seg : t.table) {
    for (int j = t.coeff_base(); j < 3; ++j) {
      seg.coeff_raw[j] = quantize(seg.coeff_real[j], t.coeff_format).raw;
    }
  }
  if (spec.degree == LutDegree::linear) detail::repair_linear_boundaries(t);
  return t;
}

// Fixed-path table evaluation. Horner over a wide accumulator: each multiply
// by x drops the value-format scale back out with one half-away rounding,
// and the final result saturates once into the working format.
inline std::int64_t eval_lut_fixed(const LutTable& t, std::int64_t x_raw,
                                   std::uint64_t* clamp_count = nullptr) {
  const std::int64_t lo_raw = t.index_map.domain_lo_raw();
  const std::int64_t hi_raw = t.index_map.domain_hi_raw();
  if (x_raw < lo_raw) {
    x_raw = lo_raw;
    if (clamp_count) ++*clamp_count;
  } else if (x_raw >= hi_raw) {
    x_raw = hi_raw - 1;
    if (clamp_count) ++*clamp_count;
  }
  const LutSegment& seg = t.table[t.index_map.index_of(x_raw)];

  const int fv = t.value_format.frac_bits;
  __int128 acc = seg.coeff_raw[t.coeff_base()];
  for (int j = t.coeff_base() + 1; j < 3; ++j) {
    acc = round_shift_right(acc * x_raw, fv) + seg.coeff_raw[j];
  }
  // acc carries the coefficient scale; left shift is exact.
  acc <<= (fv - t.coeff_format.frac_bits);
  if (acc > t.value_format.max_raw()) return t.value_format.max_raw();
  if (acc < t.value_format.min_raw()) return t.value_format.min_raw();
  return std::int64_t(acc);
}

// Real-path table evaluation: real coefficients, real Horner, same clamping
// behaviour at the domain edges.
inline double eval_lut_real(const LutTable& t, double x,
                            std::uint64_t* clamp_count = nullptr) {
  if (x < t.domain_lo) {
    x = t.domain_lo;
    if (clamp_count) ++*clamp_count;
  } else if (x >= t.domain_hi) {
    x = t.domain_hi;
    if (clamp_count) ++*clamp_count;
  }
  const double h = (t.domain_hi - t.domain_lo) / t.segments;
  int idx = int(std::floor((x - t.domain_lo) / h));
  if (idx < 0) idx = 0;
  if (idx >= t.segments) idx = t.segments - 1;
  const LutSegment& seg = t.table[idx];
  double acc = seg.coeff_real[t.coeff_base()];
  for (int j = t.coeff_base() + 1; j < 3; ++j) acc = acc * x + seg.coeff_real[j];
  return acc;
}

// Fixed-path Taylor evaluation in power-sum form:
//   1 + x + c2*(x*x) + c3*((x*x)*x)
// rather than nested Horner. Each power is formed by saturating fixed-point
// multiplies, so successive raw inputs move each term by at most one raw step
// and the kernel stays monotone in x; Horner's nested rescaling does not
// guarantee that.
inline std::int64_t eval_taylor_fixed(const ExpKernelSpec& spec,
                                      std::int64_t x_raw) {
  const FixedFormat fmt = spec.format;
  const FixedValue x{x_raw, fmt};
  FixedValue acc = fx_add(quantize(1.0, fmt), x);
  if (spec.order >= 2) {
    const FixedValue x2 = fx_mul(x, x);
    acc = fx_add(acc, fx_mul(x2, quantize(0.5, fmt)));
    if (spec.order >= 3) {
      const FixedValue x3 = fx_mul(x2, x);
      acc = fx_add(acc, fx_mul(x3, quantize(1.0 / 6.0, fmt)));
    }
  }
  return acc.raw;
}

inline double eval_taylor_real(int order, double x) {
  double acc = 1.0 + x;
  if (order >= 2) acc += 0.5 * x * x;
  if (order >= 3) acc += x * x * x / 6.0;
  return acc;
}

// A configured kernel with any table it needs built once up front.
class ExpKernel {
 public:
  static ExpKernel make(const ExpKernelSpec& spec, double domain_lo = -1.0,
                        double domain_hi = 1.0) {
    spec.validate();
    ExpKernel k;
    k.spec_ = spec;
    if (spec.method == ExpMethod::lut) {
      k.table_ = build_lut(spec, domain_lo, domain_hi);
    }
    return k;
  }

  const ExpKernelSpec& spec() const { return spec_; }
  const LutTable* table() const {
    return spec_.method == ExpMethod::lut ? &table_ : nullptr;
  }

  // Bit-accurate datapath: raw in, raw out, both in the working format.
  std::int64_t eval_raw(std::int64_t x_raw,
                        std::uint64_t* clamp_count = nullptr) const {
    switch (spec_.method) {
      case ExpMethod::exact:
        return quantize(std::exp(FixedValue{x_raw, spec_.format}.to_real()),
                        spec_.format)
            .raw;
      case ExpMethod::taylor:
        return eval_taylor_fixed(spec_, x_raw);
      case ExpMethod::lut:
        return eval_lut_fixed(table_, x_raw, clamp_count);
    }
    return 0;
  }

  // Method-error path: the structural approximation in double precision.
  double eval_real(double x, std::uint64_t* clamp_count = nullptr) const {
    switch (spec_.method) {
      case ExpMethod::exact:
        return std::exp(x);
      case ExpMethod::taylor:
        return eval_taylor_real(spec_.order, x);
      case ExpMethod::lut:
        return eval_lut_real(table_, x, clamp_count);
    }
    return 0.0;
  }

 private:
  ExpKernelSpec spec_;
  LutTable table_;
};

}  // namespace approxmax
