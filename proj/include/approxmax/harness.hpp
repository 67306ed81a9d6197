#pragma once

// Experiment harness: seeded sweeps over (kernel, format) pairs. Each trial
// draws one logits vector from a splittable per-trial RNG stream, runs the
// exact oracle and every configured pipeline on it, and reduces the error
// metrics. Trials may run on a thread pool; results land in trial-indexed
// slots so reports are byte-identical regardless of scheduling.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <chrono>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "approxmax/errors.hpp"
#include "approxmax/exp_kernels.hpp"
#include "approxmax/metrics.hpp"
#include "approxmax/rng.hpp"
#include "approxmax/softmax.hpp"
#include "approxmax/textio.hpp"

namespace approxmax {

enum class SourceKind { uniform, file, fc_layer };

inline std::string source_kind_name(SourceKind k) {
  switch (k) {
    case SourceKind::uniform:
      return "uniform";
    case SourceKind::file:
      return "file";
    case SourceKind::fc_layer:
      return "fc-layer";
  }
  return "";
}

inline SourceKind source_kind_from_name(const std::string& s) {
  if (s == "uniform") return SourceKind::uniform;
  if (s == "file") return SourceKind::file;
  if (s == "fc-layer") return SourceKind::fc_layer;
  throw config_error("unknown input source '" + s +
                     "' (want uniform, file, or fc-layer)");
}

struct InputSource {
  SourceKind kind = SourceKind::uniform;
  // Uniform draws come from the open interval ]lo, hi[.
  double lo = -1.0;
  double hi = 1.0;
  std::string path;  // file source only

  void validate() const {
    if (kind == SourceKind::uniform && !(lo < hi)) {
      throw config_error("uniform source requires lo < hi");
    }
    if (kind == SourceKind::file && path.empty()) {
      throw config_error("file source requires a path");
    }
  }
};

struct ExperimentConfig {
  std::vector<std::string> kernels = {"taylor-1", "taylor-2", "taylor-3",
                                      "lut-linear-64", "lut-quadratic-64"};
  std::vector<FixedFormat> formats = {FixedFormat(16, 15)};
  std::size_t k = 1000;
  std::size_t trials = 1;
  std::uint64_t seed = 42;
  MeasurementMode mode = MeasurementMode::method_error;
  InputSource source;

  void validate() const {
    if (k < 1) throw config_error("k must be >= 1");
    if (trials < 1) throw config_error("trials must be >= 1");
    if (kernels.empty()) throw config_error("at least one kernel required");
    if (formats.empty()) throw config_error("at least one format required");
    for (std::size_t i = 0; i < kernels.size(); ++i) {
      for (std::size_t j = i + 1; j < kernels.size(); ++j) {
        if (kernels[i] == kernels[j]) {
          throw config_error("duplicate kernel '" + kernels[i] + "'");
        }
      }
    }
    for (std::size_t i = 0; i < formats.size(); ++i) {
      for (std::size_t j = i + 1; j < formats.size(); ++j) {
        if (formats[i].total_bits == formats[j].total_bits &&
            formats[i].frac_bits == formats[j].frac_bits) {
          throw config_error("duplicate format " + formats[i].to_string());
        }
      }
    }
    source.validate();
    // Every pair must be constructible (coefficients representable, valid
    // segment geometry). Throws with the offending pair named.
    for (const std::string& name : kernels) {
      for (const FixedFormat& fmt : formats) {
        try {
          ExpKernel::make(ExpKernelSpec::parse(name, fmt));
        } catch (const config_error& e) {
          throw config_error("kernel '" + name + "' with format " +
                             fmt.to_string() + ": " + e.what());
        }
      }
    }
  }
};

// Plain-text vector file: one value per line, blank lines and '#' comments
// skipped. Parse errors carry the 1-based line number.
inline std::vector<double> parse_vector_file(const std::string& path) {
  const std::string text = read_file(path);
  std::vector<double> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string line = text.substr(
        pos, nl == std::string::npos ? std::string::npos : nl - pos);
    ++line_no;
    pos = (nl == std::string::npos) ? text.size() + 1 : nl + 1;
    std::string trimmed = line;
    while (!trimmed.empty() &&
           (trimmed.back() == '\r' || trimmed.back() == ' ' ||
            trimmed.back() == '\t')) {
      trimmed.pop_back();
    }
    std::size_t start = 0;
    while (start < trimmed.size() &&
           (trimmed[start] == ' ' || trimmed[start] == '\t')) {
      ++start;
    }
    trimmed = trimmed.substr(start);
    if (trimmed.empty() || trimmed[0] == '#') continue;
    try {
      out.push_back(parse_double(trimmed));
    } catch (const io_error& e) {
      throw io_error(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (out.empty()) throw io_error(path + ": no values found");
  return out;
}

// Draw the real-valued logits for one trial. Draw order is part of the
// determinism contract: uniform draws k values in index order; fc-layer
// draws W row-major, then x, then b.
inline std::vector<double> generate_logits_reals(const InputSource& src,
                                                 Xoshiro256pp& g,
                                                 std::size_t k) {
  src.validate();
  if (k < 1) throw config_error("k must be >= 1");
  switch (src.kind) {
    case SourceKind::uniform: {
      std::vector<double> xs(k);
      for (double& x : xs) x = g.uniform_open(src.lo, src.hi);
      return xs;
    }
    case SourceKind::fc_layer: {
      std::uint64_t n = 1;
      while (n < k + 1) n <<= 1;
      std::vector<std::vector<double>> W(k, std::vector<double>(k));
      std::vector<double> x(k), b(k);
      for (auto& row : W) {
        for (double& w : row) w = g.uniform_open(-1.0, 1.0);
      }
      for (double& v : x) v = g.uniform_open(-1.0, 1.0);
      for (double& v : b) v = g.uniform_open(-1.0, 1.0);
      return fc_layer_reference(W, x, b, double(n));
    }
    case SourceKind::file: {
      std::vector<double> xs = parse_vector_file(src.path);
      if (xs.size() != k) {
        throw config_error("file source has " + std::to_string(xs.size()) +
                           " values but the config expects k=" +
                           std::to_string(k));
      }
      return xs;
    }
  }
  throw config_error("unreachable source kind");
}

inline LogitsVector generate_logits(const InputSource& src, std::uint64_t seed,
                                    std::size_t k, const FixedFormat& fmt) {
  Xoshiro256pp g(seed, 0);
  return LogitsVector::from_reals(generate_logits_reals(src, g, k), fmt);
}

// APPROXMAX_THREADS caps sweep parallelism; unset means hardware threads.
inline unsigned harness_thread_cap() {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  const char* env = std::getenv("APPROXMAX_THREADS");
  if (env == nullptr || *env == '\0') return hw;
  char* end = nullptr;
  const long long v = std::strtoll(env, &end, 10);
  if (end == env || *end != '\0' || v < 1) {
    throw config_error("APPROXMAX_THREADS must be a positive integer, got '" +
                       std::string(env) + "'");
  }
  return unsigned(std::min<long long>(v, hw));
}

struct RunRow {
  std::string kernel;
  FixedFormat format;
  ErrorReport aggregate;               // metric fields averaged over trials
  std::vector<ErrorReport> per_trial;  // trial-index order
  std::uint64_t clamp_count = 0;       // summed over trials
};

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct RunRecord {
  ExperimentConfig config;
  std::string command = "sweep";
  std::vector<RunRow> rows;  // exactly one per configured (kernel, format)
  // Wall times are console-only context; report writers exclude them so
  // identical (seed, config) runs produce byte-identical artifacts.
  std::vector<StageTiming> timings;
  std::vector<std::string> artifact_paths;
};

namespace detail {

struct BuiltPair {
  std::string kernel;
  std::size_t format_index = 0;
  ExpKernel kern;
  FixedFormat out;
};

inline std::vector<BuiltPair> build_pairs(const ExperimentConfig& cfg) {
  std::vector<BuiltPair> pairs;
  pairs.reserve(cfg.kernels.size() * cfg.formats.size());
  for (const std::string& name : cfg.kernels) {
    for (std::size_t fi = 0; fi < cfg.formats.size(); ++fi) {
      const FixedFormat& fmt = cfg.formats[fi];
      try {
        BuiltPair p;
        p.kernel = name;
        p.format_index = fi;
        p.kern = ExpKernel::make(ExpKernelSpec::parse(name, fmt));
        p.out = default_output_format(fmt);
        pairs.push_back(std::move(p));
      } catch (const config_error& e) {
        throw config_error("kernel '" + name + "' with format " +
                           fmt.to_string() + ": " + e.what());
      }
    }
  }
  return pairs;
}

// k=1 has no variance; report the single signed error directly.
inline ErrorReport single_vector_report(const std::vector<double>& exact,
                                        const std::vector<double>& approx,
                                        std::size_t exact_arg,
                                        std::size_t approx_arg,
                                        MeasurementMode mode) {
  ErrorReport r;
  if (exact.size() >= 2) {
    r = error_moments(exact, approx);
  } else {
    r.n = 1;
    const double e = std::abs(exact[0] - approx[0]);
    r.rmse = e;
    r.max_abs_err = e;
  }
  r.mode = mode;
  r.argmax_agreement = (exact_arg == approx_arg) ? 1.0 : 0.0;
  return r;
}

struct TrialCell {
  ErrorReport report;
  std::uint64_t clamp_count = 0;
};

inline RunRecord run_core(const ExperimentConfig& cfg,
                          const std::string& command) {
  using clock = std::chrono::steady_clock;
  const auto t_start = clock::now();

  const std::vector<BuiltPair> pairs = build_pairs(cfg);
  const auto t_built = clock::now();

  std::vector<std::vector<TrialCell>> slots(
      cfg.trials, std::vector<TrialCell>(pairs.size()));

  auto run_trial = [&](std::size_t t) {
    Xoshiro256pp g = make_trial_rng(cfg.seed, t);
    const std::vector<double> reals =
        generate_logits_reals(cfg.source, g, cfg.k);
    const std::size_t nf = cfg.formats.size();
    std::vector<LogitsVector> vecs(nf);
    std::vector<std::vector<double>> exact_probs(nf);
    std::vector<std::size_t> exact_arg(nf);
    for (std::size_t fi = 0; fi < nf; ++fi) {
      vecs[fi] = LogitsVector::from_reals(reals, cfg.formats[fi]);
      exact_probs[fi] = softmax_exact(vecs[fi].reals());
      exact_arg[fi] = argmax_lowest(exact_probs[fi]);
    }
    for (std::size_t pi = 0; pi < pairs.size(); ++pi) {
      const BuiltPair& p = pairs[pi];
      const SoftmaxResult r =
          softmax_approx(vecs[p.format_index], p.kern, p.out, cfg.mode);
      slots[t][pi].report =
          single_vector_report(exact_probs[p.format_index], r.probs,
                               exact_arg[p.format_index], r.argmax, cfg.mode);
      slots[t][pi].clamp_count = r.clamp_count;
    }
  };

  const unsigned threads =
      unsigned(std::min<std::size_t>(harness_thread_cap(), cfg.trials));
  if (threads <= 1) {
    for (std::size_t t = 0; t < cfg.trials; ++t) run_trial(t);
  } else {
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto body = [&] {
      for (;;) {
        const std::size_t t = next.fetch_add(1);
        if (t >= cfg.trials || failed.load()) return;
        try {
          run_trial(t);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          failed.store(true);
          return;
        }
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(body);
    for (std::thread& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
  }
  const auto t_trials = clock::now();

  RunRecord rec;
  rec.config = cfg;
  rec.command = command;
  rec.rows.reserve(pairs.size());
  for (std::size_t pi = 0; pi < pairs.size(); ++pi) {
    RunRow row;
    row.kernel = pairs[pi].kernel;
    row.format = cfg.formats[pairs[pi].format_index];
    row.per_trial.reserve(cfg.trials);
    ErrorReport agg;
    agg.mode = cfg.mode;
    agg.n = cfg.k * cfg.trials;
    for (std::size_t t = 0; t < cfg.trials; ++t) {
      const TrialCell& cell = slots[t][pi];
      row.per_trial.push_back(cell.report);
      row.clamp_count += cell.clamp_count;
      agg.rmse += cell.report.rmse;
      agg.variance += cell.report.variance;
      agg.stddev += cell.report.stddev;
      agg.max_abs_err += cell.report.max_abs_err;
      agg.argmax_agreement += cell.report.argmax_agreement;
    }
    const double nt = double(cfg.trials);
    agg.rmse /= nt;
    agg.variance /= nt;
    agg.stddev /= nt;
    agg.max_abs_err /= nt;
    agg.argmax_agreement /= nt;
    row.aggregate = agg;
    rec.rows.push_back(std::move(row));
  }
  const auto t_done = clock::now();

  auto secs = [](auto a, auto b) {
    return std::chrono::duration<double>(b - a).count();
  };
  rec.timings = {{"build-kernels", secs(t_start, t_built)},
                 {"trials", secs(t_built, t_trials)},
                 {"aggregate", secs(t_trials, t_done)}};
  return rec;
}

}  // namespace detail

inline RunRecord run_table_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  return detail::run_core(cfg, "sweep");
}

inline RunRecord run_topk_proxy(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.source.kind == SourceKind::file) {
    throw config_error("topk requires a generated input source");
  }
  if (cfg.k != 10 && cfg.k != 1000) {
    throw config_error("topk models the published scenarios: k must be 10 or "
                       "1000, got " +
                       std::to_string(cfg.k));
  }
  return detail::run_core(cfg, "topk");
}

// Published reference metrics for the 16-bit, k=1000 uniform-logit study in
// method-error mode; LUT rows use P=64. Attached to reports on request so
// runs can be read side by side with the published tables.
struct ReferenceMetrics {
  double rmse = 0.0;
  double variance = 0.0;
  double stddev = 0.0;
};

inline const std::vector<std::pair<std::string, ReferenceMetrics>>&
published_error_reference() {
  static const std::vector<std::pair<std::string, ReferenceMetrics>> rows = {
      {"taylor-1", {3.13e-3, 2.48e-6, 1.57e-3}},
      {"taylor-2", {2.97e-3, 2.45e-6, 1.56e-3}},
      {"taylor-3", {4.18e-5, 6.84e-10, 2.62e-5}},
      {"lut-linear-64", {3.22e-6, 4.28e-12, 2.07e-6}},
      {"lut-quadratic-64", {2.31e-7, 2.60e-14, 1.61e-7}},
  };
  return rows;
}

inline const ReferenceMetrics* find_error_reference(const std::string& kernel) {
  for (const auto& [name, ref] : published_error_reference()) {
    if (name == kernel) return &ref;
  }
  return nullptr;
}

// Published Top-1 accuracies from the deployment study, keyed by vector
// length: k=10 is the 12-bit digit-classifier scenario, k=1000 the 20-bit
// image-classifier scenario. Context columns only; the proxy reports argmax
// agreement, not Top-1 accuracy.
inline const std::vector<std::pair<std::string, double>>&
published_top1_reference(std::size_t k) {
  static const std::vector<std::pair<std::string, double>> k10 = {
      {"exact", 0.9768},         {"lut-linear-32", 0.9763},
      {"lut-linear-16", 0.9763}, {"lut-linear-8", 0.9765},
      {"taylor-3", 0.9763},      {"taylor-2", 0.9752},
      {"taylor-1", 0.9751},
  };
  static const std::vector<std::pair<std::string, double>> k1000 = {
      {"exact", 0.748},         {"lut-linear-64", 0.74},
      {"lut-linear-32", 0.688}, {"lut-linear-16", 0.556},
      {"taylor-3", 0.872},      {"taylor-2", 0.872},
      {"taylor-1", 0.0},
  };
  static const std::vector<std::pair<std::string, double>> none = {};
  if (k == 10) return k10;
  if (k == 1000) return k1000;
  return none;
}

inline const double* find_top1_reference(std::size_t k,
                                         const std::string& kernel) {
  for (const auto& [name, top1] : published_top1_reference(k)) {
    if (name == kernel) return &top1;
  }
  return nullptr;
}

namespace detail {

inline nlohmann::ordered_json source_to_json(const InputSource& src) {
  nlohmann::ordered_json j;
  j["kind"] = source_kind_name(src.kind);
  if (src.kind == SourceKind::uniform) {
    j["lo"] = src.lo;
    j["hi"] = src.hi;
  } else if (src.kind == SourceKind::file) {
    j["path"] = src.path;
  }
  return j;
}

inline nlohmann::ordered_json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["kernels"] = cfg.kernels;
  std::vector<std::string> fmts;
  fmts.reserve(cfg.formats.size());
  for (const FixedFormat& f : cfg.formats) fmts.push_back(f.to_string());
  j["formats"] = fmts;
  j["k"] = cfg.k;
  j["trials"] = cfg.trials;
  j["seed"] = cfg.seed;
  j["mode"] = mode_name(cfg.mode);
  j["source"] = source_to_json(cfg.source);
  return j;
}

inline std::uint64_t json_uint(const nlohmann::ordered_json& v,
                               const std::string& key) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() &&
                                   v.get<std::int64_t>() >= 0)) {
    throw config_error("config key '" + key +
                       "' must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

inline InputSource source_from_json(const nlohmann::ordered_json& v) {
  InputSource src;
  if (v.is_string()) {
    src.kind = source_kind_from_name(v.get<std::string>());
    return src;
  }
  if (!v.is_object()) {
    throw config_error("config key 'source' must be a string or object");
  }
  bool have_kind = false;
  for (const auto& [key, val] : v.items()) {
    if (key == "kind") {
      if (!val.is_string()) throw config_error("source kind must be a string");
      src.kind = source_kind_from_name(val.get<std::string>());
      have_kind = true;
    } else if (key == "lo" || key == "hi") {
      if (!val.is_number()) {
        throw config_error("source bound '" + key + "' must be a number");
      }
      (key == "lo" ? src.lo : src.hi) = val.get<double>();
    } else if (key == "path") {
      if (!val.is_string()) throw config_error("source path must be a string");
      src.path = val.get<std::string>();
    } else {
      throw config_error("unknown source key '" + key + "'");
    }
  }
  if (!have_kind) throw config_error("source object needs a 'kind'");
  return src;
}

}  // namespace detail

inline std::string experiment_config_to_json(const ExperimentConfig& cfg) {
  return detail::config_to_json(cfg).dump(2) + "\n";
}

inline ExperimentConfig experiment_config_from_json(const std::string& text) {
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw config_error("config root must be a JSON object");
  ExperimentConfig cfg;
  for (const auto& [key, val] : j.items()) {
    if (key == "kernels") {
      if (!val.is_array() || val.empty()) {
        throw config_error("config key 'kernels' must be a non-empty array");
      }
      cfg.kernels.clear();
      for (const auto& name : val) {
        if (!name.is_string()) {
          throw config_error("kernel entries must be strings");
        }
        cfg.kernels.push_back(name.get<std::string>());
      }
    } else if (key == "formats") {
      if (!val.is_array() || val.empty()) {
        throw config_error("config key 'formats' must be a non-empty array");
      }
      cfg.formats.clear();
      for (const auto& name : val) {
        if (!name.is_string()) {
          throw config_error("format entries must be strings");
        }
        cfg.formats.push_back(FixedFormat::parse(name.get<std::string>()));
      }
    } else if (key == "k") {
      cfg.k = std::size_t(detail::json_uint(val, key));
    } else if (key == "trials") {
      cfg.trials = std::size_t(detail::json_uint(val, key));
    } else if (key == "seed") {
      cfg.seed = detail::json_uint(val, key);
    } else if (key == "mode") {
      if (!val.is_string()) throw config_error("config mode must be a string");
      cfg.mode = mode_from_name(val.get<std::string>());
    } else if (key == "source") {
      cfg.source = detail::source_from_json(val);
    } else {
      throw config_error("unknown config key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

// CSV report: exactly one aggregate row per configured (kernel, format).
// Per-trial rows live in the JSON summary. With compare_reference the
// published metrics append as extra columns (blank when no row applies).
inline std::string run_record_csv(const RunRecord& rec,
                                  bool compare_reference = false) {
  std::string out = error_report_csv_header();
  if (compare_reference) out += ",ref_rmse,ref_variance,ref_stddev";
  out += "\n";
  for (const RunRow& row : rec.rows) {
    out += error_report_csv_row(row.kernel, row.format.to_string(),
                                rec.config.seed, row.aggregate);
    if (compare_reference) {
      if (const ReferenceMetrics* ref = find_error_reference(row.kernel)) {
        out += "," + fmt_double(ref->rmse) + "," + fmt_double(ref->variance) +
               "," + fmt_double(ref->stddev);
      } else {
        out += ",,,";
      }
    }
    out += "\n";
  }
  return out;
}

inline std::string run_record_json(const RunRecord& rec,
                                   bool compare_reference = false) {
  nlohmann::ordered_json j;
  j["format"] = "approxmax-run";
  j["version"] = 1;
  j["command"] = rec.command;
  j["config"] = detail::config_to_json(rec.config);
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const RunRow& row : rec.rows) {
    nlohmann::ordered_json r;
    r["kernel"] = row.kernel;
    r["fixed_format"] = row.format.to_string();
    r["clamp_count"] = row.clamp_count;
    nlohmann::ordered_json m;
    m["rmse"] = row.aggregate.rmse;
    m["variance"] = row.aggregate.variance;
    m["stddev"] = row.aggregate.stddev;
    m["max_abs_err"] = row.aggregate.max_abs_err;
    m["argmax_agreement"] = row.aggregate.argmax_agreement;
    m["n"] = row.aggregate.n;
    r["metrics"] = m;
    if (compare_reference) {
      if (const ReferenceMetrics* ref = find_error_reference(row.kernel)) {
        nlohmann::ordered_json rj;
        rj["rmse"] = ref->rmse;
        rj["variance"] = ref->variance;
        rj["stddev"] = ref->stddev;
        r["reference"] = rj;
      }
    }
    if (rec.command == "topk") {
      if (const double* top1 =
              find_top1_reference(rec.config.k, row.kernel)) {
        r["reference_top1"] = *top1;
      }
    }
    nlohmann::ordered_json trials = nlohmann::ordered_json::array();
    for (std::size_t t = 0; t < row.per_trial.size(); ++t) {
      const ErrorReport& tr = row.per_trial[t];
      nlohmann::ordered_json tj;
      tj["trial"] = t;
      tj["rmse"] = tr.rmse;
      tj["variance"] = tr.variance;
      tj["stddev"] = tr.stddev;
      tj["max_abs_err"] = tr.max_abs_err;
      tj["argmax_agreement"] = tr.argmax_agreement;
      trials.push_back(std::move(tj));
    }
    r["per_trial"] = std::move(trials);
    rows.push_back(std::move(r));
  }
  j["rows"] = std::move(rows);
  return j.dump(2) + "\n";
}

}  // namespace approxmax
