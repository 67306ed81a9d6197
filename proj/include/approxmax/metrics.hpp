#pragma once

// Error metrics against the exact oracle. Variance and stddev are population
// moments of the signed per-element error; rmse folds the mean back in
// (rmse^2 = variance + mean^2). One pass, Welford update for the second
// moment, ordered accumulation for determinism.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "approxmax/errors.hpp"
#include "approxmax/softmax.hpp"
#include "approxmax/textio.hpp"

namespace approxmax {

struct ErrorReport {
  double rmse = 0.0;
  double variance = 0.0;
  double stddev = 0.0;
  double max_abs_err = 0.0;
  double argmax_agreement = 0.0;
  std::size_t n = 0;
  MeasurementMode mode = MeasurementMode::quantized;
};

inline double rmse(const std::vector<double>& exact,
                   const std::vector<double>& approx) {
  if (exact.size() != approx.size()) {
    throw config_error("rmse requires equal-length vectors");
  }
  if (exact.empty()) throw config_error("rmse requires n >= 1");
  double sq = 0.0;
  for (std::size_t i = 0; i < exact.size(); ++i) {
    const double e = exact[i] - approx[i];
    sq += e * e;
  }
  return std::sqrt(sq / double(exact.size()));
}

inline ErrorReport error_moments(const std::vector<double>& exact,
                                 const std::vector<double>& approx) {
  if (exact.size() != approx.size()) {
    throw config_error("error_moments requires equal-length vectors");
  }
  if (exact.size() < 2) {
    throw config_error("error_moments requires n >= 2 for variance");
  }
  double mean = 0.0;
  double m2 = 0.0;
  double sq = 0.0;
  double max_abs = 0.0;
  for (std::size_t i = 0; i < exact.size(); ++i) {
    const double e = exact[i] - approx[i];
    const double delta = e - mean;
    mean += delta / double(i + 1);
    m2 += delta * (e - mean);
    sq += e * e;
    max_abs = std::max(max_abs, std::abs(e));
  }
  ErrorReport r;
  r.n = exact.size();
  r.variance = m2 / double(exact.size());
  r.stddev = std::sqrt(r.variance);
  r.rmse = std::sqrt(sq / double(exact.size()));
  r.max_abs_err = max_abs;
  return r;
}

inline double argmax_agreement(const std::vector<std::size_t>& exact,
                               const std::vector<std::size_t>& approx) {
  if (exact.size() != approx.size()) {
    throw config_error("argmax_agreement requires equal-size batches");
  }
  if (exact.empty()) throw config_error("argmax_agreement requires n >= 1");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < exact.size(); ++i) {
    hits += (exact[i] == approx[i]);
  }
  return double(hits) / double(exact.size());
}

inline std::string error_report_csv_header() {
  return "method,config,mode,n,seed,rmse,variance,stddev,max_abs_err,"
         "argmax_agreement";
}

inline std::string error_report_csv_row(const std::string& method,
                                        const std::string& config,
                                        std::uint64_t seed,
                                        const ErrorReport& r) {
  return method + "," + config + "," + mode_name(r.mode) + "," +
         std::to_string(r.n) + "," + std::to_string(seed) + "," +
         fmt_double(r.rmse) + "," + fmt_double(r.variance) + "," +
         fmt_double(r.stddev) + "," + fmt_double(r.max_abs_err) + "," +
         fmt_double(r.argmax_agreement);
}

}  // namespace approxmax
