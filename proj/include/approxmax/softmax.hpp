#pragma once

// End-to-end softmax pipelines mirroring the accelerator dataflow:
// prescale -> exp kernel -> accumulate -> normalize.
//
// Two measurement regimes share the structure. Quantized mode is the
// bit-accurate model: kernel raws accumulate in a double-width integer and
// each probability is one rounded integer division. Method-error mode runs
// the same kernels with real coefficients and real normalization, isolating
// the polynomial approximation error from quantization; several reference
// error figures sit far below the 16-bit quantization step and are only
// observable in this regime.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "approxmax/errors.hpp"
#include "approxmax/exp_kernels.hpp"
#include "approxmax/fixed_point.hpp"

namespace approxmax {

enum class MeasurementMode { quantized, method_error };

inline std::string mode_name(MeasurementMode m) {
  return m == MeasurementMode::quantized ? "quantized" : "method-error";
}

inline MeasurementMode mode_from_name(const std::string& s) {
  if (s == "quantized") return MeasurementMode::quantized;
  if (s == "method-error") return MeasurementMode::method_error;
  throw config_error("unknown measurement mode '" + s +
                     "' (want quantized or method-error)");
}

struct LogitsVector {
  FixedFormat format;
  std::vector<std::int64_t> raws;

  std::size_t size() const { return raws.size(); }

  double real_at(std::size_t i) const {
    return std::ldexp(double(raws[i]), -format.frac_bits);
  }

  std::vector<double> reals() const {
    std::vector<double> out(raws.size());
    for (std::size_t i = 0; i < raws.size(); ++i) out[i] = real_at(i);
    return out;
  }

  static LogitsVector from_reals(const std::vector<double>& xs,
                                 const FixedFormat& fmt) {
    LogitsVector v;
    v.format = fmt;
    v.raws.reserve(xs.size());
    for (double x : xs) v.raws.push_back(quantize(x, fmt).raw);
    return v;
  }
};

struct StabilizerConfig {
  int shift_bits = 0;
};

// The 1/n operand prescale realized as a right shift; |x|/2^s <= |x| keeps
// in-domain inputs in-domain.
inline LogitsVector prescale(const LogitsVector& v,
                             const StabilizerConfig& cfg) {
  if (cfg.shift_bits < 0 || cfg.shift_bits >= v.format.total_bits) {
    throw config_error("prescale shift must be in [0, total_bits)");
  }
  LogitsVector out;
  out.format = v.format;
  out.raws.reserve(v.size());
  for (std::int64_t raw : v.raws) {
    out.raws.push_back(round_shift_right(raw, cfg.shift_bits));
  }
  return out;
}

// Golden reference: real exponentials, ordered summation, real division.
inline std::vector<double> softmax_exact(const std::vector<double>& v) {
  if (v.empty()) throw config_error("softmax requires at least one element");
  std::vector<double> out(v.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw config_error("softmax_exact requires finite inputs");
    }
    out[i] = std::exp(v[i]);
    sum += out[i];
  }
  for (double& p : out) p /= sum;
  return out;
}

// First greatest element; ties resolve to the lowest index.
template <typename T>
std::size_t argmax_lowest(const std::vector<T>& xs) {
  return std::size_t(std::max_element(xs.begin(), xs.end()) - xs.begin());
}

struct SoftmaxResult {
  MeasurementMode mode = MeasurementMode::quantized;
  FixedFormat out_format;
  std::vector<std::int64_t> prob_raw;  // quantized mode only
  std::vector<double> probs;           // dequantized raws, or real-mode probs
  std::int64_t sum_raw = 0;
  double sum_real = 0.0;
  std::size_t argmax = 0;
  std::uint64_t clamp_count = 0;
};

// Default output format: probabilities need no integer range, so spend all
// but the sign bit on fraction.
inline FixedFormat default_output_format(const FixedFormat& working) {
  return FixedFormat(working.total_bits, working.total_bits - 1);
}

inline SoftmaxResult softmax_approx(const LogitsVector& v,
                                    const ExpKernel& kernel,
                                    const FixedFormat& out_fmt,
                                    MeasurementMode mode) {
  if (v.size() == 0) {
    throw config_error("softmax requires at least one element");
  }
  SoftmaxResult r;
  r.mode = mode;
  r.out_format = out_fmt;

  if (mode == MeasurementMode::quantized) {
    std::vector<std::int64_t> exps(v.size());
    std::int64_t sum = 0;  // double-width vs the <=32-bit working format
    for (std::size_t i = 0; i < v.size(); ++i) {
      exps[i] = kernel.eval_raw(v.raws[i], &r.clamp_count);
      sum += exps[i];
    }
    r.sum_raw = sum;
    if (sum == 0) {
      throw degenerate_error("softmax denominator quantized to zero (kernel " +
                             kernel.spec().name() + ", format " +
                             v.format.to_string() + ")");
    }
    r.prob_raw.resize(v.size());
    r.probs.resize(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      std::int64_t num = exps[i] << out_fmt.frac_bits;
      std::int64_t den = sum;
      if (den < 0) {
        num = -num;
        den = -den;
      }
      std::int64_t p = round_div(num, den);
      if (p < 0) p = 0;
      if (p > out_fmt.max_raw()) p = out_fmt.max_raw();
      r.prob_raw[i] = p;
      r.probs[i] = std::ldexp(double(p), -out_fmt.frac_bits);
    }
    r.argmax = argmax_lowest(r.prob_raw);
    return r;
  }

  std::vector<double> exps(v.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    exps[i] = kernel.eval_real(v.real_at(i), &r.clamp_count);
    sum += exps[i];
  }
  r.sum_real = sum;
  if (sum == 0.0) {
    throw degenerate_error("softmax denominator is zero (kernel " +
                           kernel.spec().name() + ", format " +
                           v.format.to_string() + ")");
  }
  r.probs.resize(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) r.probs[i] = exps[i] / sum;
  r.argmax = argmax_lowest(r.probs);
  return r;
}

// Stabilized fully-connected layer in real arithmetic: y_i = w_i*(x/n) + b_i/n.
// Used to validate output-range containment and to generate realistic logits.
inline std::vector<double> fc_layer_reference(
    const std::vector<std::vector<double>>& W, const std::vector<double>& x,
    const std::vector<double>& b, double n) {
  if (W.size() != b.size()) {
    throw config_error("fc layer weight rows must match bias length");
  }
  if (n < 1.0) throw config_error("fc layer scale n must be >= 1");
  std::vector<double> scaled(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) scaled[j] = x[j] / n;
  std::vector<double> y(W.size());
  for (std::size_t i = 0; i < W.size(); ++i) {
    if (W[i].size() != x.size()) {
      throw config_error("fc layer weight row length must match input length");
    }
    double acc = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) acc += W[i][j] * scaled[j];
    y[i] = acc + b[i] / n;
  }
  return y;
}

}  // namespace approxmax
