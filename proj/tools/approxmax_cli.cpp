// approxmax: fixed-point approximate-softmax model.
//
// Subcommands: gen-lut (build/export exponential tables), softmax (run one
// vector through the pipeline), sweep (error-metric experiments), topk
// (argmax-agreement proxy study), plot (piecewise-fit and error charts).
//
// Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 numeric
// degeneracy (softmax denominator collapsed to zero).

#include <cmath>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "approxmax/exp_kernels.hpp"
#include "approxmax/harness.hpp"
#include "approxmax/lut_io.hpp"
#include "approxmax/metrics.hpp"
#include "approxmax/softmax.hpp"
#include "approxmax/svg.hpp"
#include "approxmax/textio.hpp"

namespace {

using namespace approxmax;

std::pair<double, double> parse_domain(const std::string& text) {
  const std::vector<std::string> parts = split(text, ',');
  if (parts.size() != 2) {
    throw config_error("domain must be '<lo>,<hi>', got '" + text + "'");
  }
  double lo, hi;
  try {
    lo = parse_double(parts[0]);
    hi = parse_double(parts[1]);
  } catch (const io_error& e) {
    throw config_error(std::string("bad domain bound: ") + e.what());
  }
  if (!(lo < hi)) throw config_error("domain requires lo < hi");
  return {lo, hi};
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// Densely scan the structural (real-arithmetic) error of a kernel over the
// half-open domain.
double max_method_error(const ExpKernel& kern, double lo, double hi,
                        std::size_t samples) {
  double worst = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const double x = lo + (hi - lo) * double(i) / double(samples);
    worst = std::max(worst, std::abs(kern.eval_real(x) - std::exp(x)));
  }
  return worst;
}

struct GenLutOpts {
  int samples = 8;
  std::string degree = "linear";
  std::string format = "q16.15";
  std::string domain = "-1,1";
  std::string lut_out;
};

int run_gen_lut(const GenLutOpts& o) {
  if (o.degree != "linear" && o.degree != "quadratic") {
    throw config_error("degree must be linear or quadratic, got '" + o.degree +
                       "'");
  }
  const FixedFormat fmt = FixedFormat::parse(o.format);
  const auto [lo, hi] = parse_domain(o.domain);
  const std::string spec_name =
      "lut-" + o.degree + "-" + std::to_string(o.samples);
  const ExpKernel kern =
      ExpKernel::make(ExpKernelSpec::parse(spec_name, fmt), lo, hi);
  const LutTable& table = *kern.table();

  const std::string summary =
      spec_name + " " + fmt.to_string() + " domain [" + fmt_double(lo) + "," +
      fmt_double(hi) + ") segments=" + std::to_string(table.segments) +
      " shift=" + std::to_string(table.index_map.shift) +
      " coeff_format=" + table.coeff_format.to_string() +
      " max_method_error=" + fmt_double(max_method_error(kern, lo, hi, 200000));

  if (o.lut_out.empty()) {
    std::cout << export_lut_csv(table);
    std::cerr << summary << "\n";
  } else {
    write_file(o.lut_out, ends_with(o.lut_out, ".json")
                              ? export_lut_json(table)
                              : export_lut_csv(table));
    std::cout << summary << "\n";
    std::cout << "wrote " << o.lut_out << "\n";
  }
  return 0;
}

struct SoftmaxOpts {
  std::string input;
  std::string format = "q16.15";
  std::string kernel = "exact";
  std::string mode = "quantized";
  std::string out_format;
  int shift = 0;
  std::string output;
};

int run_softmax(const SoftmaxOpts& o) {
  const FixedFormat fmt = FixedFormat::parse(o.format);
  const FixedFormat out_fmt = o.out_format.empty()
                                  ? default_output_format(fmt)
                                  : FixedFormat::parse(o.out_format);
  const MeasurementMode mode = mode_from_name(o.mode);
  const ExpKernel kern = ExpKernel::make(ExpKernelSpec::parse(o.kernel, fmt));

  const std::vector<double> reals = parse_vector_file(o.input);
  LogitsVector v = LogitsVector::from_reals(reals, fmt);
  if (o.shift != 0) v = prescale(v, StabilizerConfig{o.shift});

  const SoftmaxResult r = softmax_approx(v, kern, out_fmt, mode);

  std::string csv = "index,prob_raw,prob_real\n";
  for (std::size_t i = 0; i < r.probs.size(); ++i) {
    csv += std::to_string(i) + ",";
    if (mode == MeasurementMode::quantized) {
      csv += std::to_string(r.prob_raw[i]);
    }
    csv += "," + fmt_double(r.probs[i]) + "\n";
  }

  std::string summary = "argmax=" + std::to_string(r.argmax);
  if (mode == MeasurementMode::quantized) {
    summary += " sum_raw=" + std::to_string(r.sum_raw);
  } else {
    summary += " sum_real=" + fmt_double(r.sum_real);
  }
  summary += " clamp_count=" + std::to_string(r.clamp_count) +
             " out_format=" + out_fmt.to_string();

  if (o.output.empty()) {
    std::cout << csv;
    std::cerr << summary << "\n";
  } else {
    write_file(o.output, csv);
    std::cout << summary << "\n";
    std::cout << "wrote " << o.output << "\n";
  }
  return 0;
}

struct RunOpts {
  std::string config_path;
  std::vector<std::string> kernels;
  std::vector<std::string> formats;
  std::uint64_t k = 0;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  std::string mode;
  std::string source;
  std::string source_path;
  double lo = 0.0, hi = 0.0;
  std::string csv_out;
  std::string json_out;
  bool compare_paper = false;
};

// Flags override config-file values field by field.
ExperimentConfig resolve_config(const RunOpts& o, const CLI::App* cmd,
                                ExperimentConfig cfg) {
  if (!o.config_path.empty()) {
    cfg = experiment_config_from_json(read_file(o.config_path));
  }
  if (cmd->count("--kernel")) cfg.kernels = o.kernels;
  if (cmd->count("--format")) {
    cfg.formats.clear();
    for (const std::string& f : o.formats) {
      cfg.formats.push_back(FixedFormat::parse(f));
    }
  }
  if (cmd->count("--k")) cfg.k = std::size_t(o.k);
  if (cmd->count("--trials")) cfg.trials = std::size_t(o.trials);
  if (cmd->count("--seed")) cfg.seed = o.seed;
  if (cmd->count("--mode")) cfg.mode = mode_from_name(o.mode);
  if (cmd->count("--source")) cfg.source.kind = source_kind_from_name(o.source);
  if (cmd->count("--source-path")) cfg.source.path = o.source_path;
  if (cmd->count("--lo")) cfg.source.lo = o.lo;
  if (cmd->count("--hi")) cfg.source.hi = o.hi;
  cfg.validate();
  return cfg;
}

void print_run_console(const RunRecord& rec) {
  std::cout << "command=" << rec.command << " k=" << rec.config.k
            << " trials=" << rec.config.trials << " seed=" << rec.config.seed
            << " mode=" << mode_name(rec.config.mode) << "\n";
  for (const RunRow& row : rec.rows) {
    std::cout << "  " << row.kernel << " " << row.format.to_string()
              << " rmse=" << fmt_double(row.aggregate.rmse)
              << " stddev=" << fmt_double(row.aggregate.stddev)
              << " max_abs_err=" << fmt_double(row.aggregate.max_abs_err)
              << " agreement=" << fmt_double(row.aggregate.argmax_agreement)
              << " clamps=" << row.clamp_count << "\n";
  }
  for (const StageTiming& t : rec.timings) {
    std::cout << "  [time] " << t.stage << " " << fmt_double(t.seconds)
              << "s\n";
  }
}

int run_sweep_like(const RunOpts& o, const CLI::App* cmd, bool topk) {
  ExperimentConfig defaults;
  if (topk) {
    defaults.kernels = {"exact",         "taylor-1",      "taylor-2",
                        "taylor-3",      "lut-linear-8",  "lut-linear-16",
                        "lut-linear-32"};
    defaults.formats = {FixedFormat(12, 6)};
    defaults.k = 10;
    defaults.trials = 100;
    defaults.mode = MeasurementMode::quantized;
  }
  const ExperimentConfig cfg = resolve_config(o, cmd, defaults);
  const RunRecord rec =
      topk ? run_topk_proxy(cfg) : run_table_experiment(cfg);
  write_file(o.csv_out, run_record_csv(rec, o.compare_paper));
  write_file(o.json_out, run_record_json(rec, o.compare_paper));
  print_run_console(rec);
  std::cout << "wrote " << o.csv_out << "\n";
  std::cout << "wrote " << o.json_out << "\n";
  return 0;
}

struct PlotOpts {
  std::string kind;
  std::string kernel = "lut-linear-8";
  std::string format = "q16.15";
  std::string domain = "-1,1";
  std::uint64_t points = 512;
  std::string out;
  std::string data_out;
};

int run_plot(const PlotOpts& o) {
  if (o.kind != "fit" && o.kind != "error") {
    throw config_error("plot kind must be fit or error, got '" + o.kind + "'");
  }
  if (o.points < 2) throw config_error("plot needs at least 2 points");
  const FixedFormat fmt = FixedFormat::parse(o.format);
  const auto [lo, hi] = parse_domain(o.domain);
  const ExpKernel kern =
      ExpKernel::make(ExpKernelSpec::parse(o.kernel, fmt), lo, hi);

  // Half-open sampling keeps every x inside the table domain.
  std::vector<double> xs(o.points);
  for (std::size_t i = 0; i < o.points; ++i) {
    xs[i] = lo + (hi - lo) * double(i) / double(o.points);
  }

  PlotSpec spec;
  spec.x_label = "x";
  PlotSeries exact_s, approx_s, err_s;
  std::string data_csv = "x,exact,approx,error\n";
  for (double x : xs) {
    const double ex = std::exp(x);
    const double ax = kern.eval_real(x);
    exact_s.points.push_back({x, ex});
    approx_s.points.push_back({x, ax});
    err_s.points.push_back({x, ax - ex});
    data_csv += fmt_double(x) + "," + fmt_double(ex) + "," + fmt_double(ax) +
                "," + fmt_double(ax - ex) + "\n";
  }

  if (o.kind == "fit") {
    spec.title = "e^x vs " + o.kernel + " (" + fmt.to_string() + ")";
    spec.y_label = "value";
    exact_s.label = "e^x";
    approx_s.label = o.kernel;
    spec.series.push_back(std::move(exact_s));
    spec.series.push_back(std::move(approx_s));
    if (const LutTable* table = kern.table()) {
      PlotSeries nodes;
      nodes.label = "sample nodes";
      nodes.line = false;
      nodes.markers = true;
      const double h = (table->domain_hi - table->domain_lo) /
                       double(table->segments);
      for (std::size_t p = 0; p <= std::size_t(table->segments); ++p) {
        const double x = table->domain_lo + h * double(p);
        nodes.points.push_back({x, std::exp(x)});
      }
      spec.series.push_back(std::move(nodes));
    }
  } else {
    spec.title = "signed error: " + o.kernel + " - e^x (" + fmt.to_string() +
                 ")";
    spec.y_label = "approx - exact";
    err_s.label = o.kernel;
    spec.series.push_back(std::move(err_s));
  }

  write_file(o.out, render_svg_chart(spec));
  std::cout << "wrote " << o.out << "\n";
  if (!o.data_out.empty()) {
    write_file(o.data_out, data_csv);
    std::cout << "wrote " << o.data_out << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"approxmax: bit-accurate model of fixed-point approximate "
               "softmax accelerators"};
  app.require_subcommand(1);

  GenLutOpts gl;
  CLI::App* gen_lut = app.add_subcommand(
      "gen-lut", "Build an exponential LUT and export it (CSV, or JSON by "
                 "file extension)");
  gen_lut->add_option("--samples", gl.samples,
                      "Segment count P (power of two)")->capture_default_str();
  gen_lut->add_option("--degree", gl.degree, "linear|quadratic")->capture_default_str();
  gen_lut->add_option("--format", gl.format, "Working fixed-point format")->capture_default_str();
  gen_lut->add_option("--domain", gl.domain, "Approximation domain '<lo>,<hi>'")->capture_default_str();
  gen_lut->add_option("--lut-out", gl.lut_out,
                      "Output path (stdout CSV when omitted)");

  SoftmaxOpts sm;
  CLI::App* softmax_cmd = app.add_subcommand(
      "softmax", "Run one logits vector (one value per line) through the "
                 "pipeline");
  softmax_cmd->add_option("--input", sm.input, "Logits file")->required();
  softmax_cmd->add_option("--format", sm.format, "Working fixed-point format")->capture_default_str();
  softmax_cmd->add_option("--kernel", sm.kernel,
                          "exact | taylor-N | lut-<degree>-<P>")->capture_default_str();
  softmax_cmd->add_option("--mode", sm.mode, "quantized|method-error")->capture_default_str();
  softmax_cmd->add_option("--out-format", sm.out_format,
                          "Probability format (default: all-fraction)");
  softmax_cmd->add_option("--shift", sm.shift,
                          "Prescale right-shift applied to the logits")->capture_default_str();
  softmax_cmd->add_option("--output", sm.output,
                          "CSV path (stdout when omitted)");

  RunOpts sw;
  sw.csv_out = "approxmax_sweep.csv";
  sw.json_out = "approxmax_sweep.json";
  CLI::App* sweep = app.add_subcommand(
      "sweep", "Run the seeded error-metric experiment over kernels and "
               "formats");
  RunOpts tk;
  tk.csv_out = "approxmax_topk.csv";
  tk.json_out = "approxmax_topk.json";
  CLI::App* topk = app.add_subcommand(
      "topk", "Argmax-agreement proxy study against the exact oracle");
  for (auto [cmd, opts] : {std::pair<CLI::App*, RunOpts*>{sweep, &sw},
                           std::pair<CLI::App*, RunOpts*>{topk, &tk}}) {
    cmd->add_option("--config", opts->config_path, "JSON experiment config");
    cmd->add_option("--kernel", opts->kernels,
                    "Kernel spec (repeatable, overrides config)");
    cmd->add_option("--format", opts->formats,
                    "Fixed-point format (repeatable, overrides config)");
    cmd->add_option("--k", opts->k, "Vector length");
    cmd->add_option("--trials", opts->trials, "Trial count");
    cmd->add_option("--seed", opts->seed, "Master seed");
    cmd->add_option("--mode", opts->mode, "quantized|method-error");
    cmd->add_option("--source", opts->source, "uniform|fc-layer|file");
    cmd->add_option("--source-path", opts->source_path,
                    "Logits file for the file source");
    cmd->add_option("--lo", opts->lo, "Uniform draw lower bound");
    cmd->add_option("--hi", opts->hi, "Uniform draw upper bound");
    cmd->add_option("--csv-out", opts->csv_out, "Metrics CSV path")->capture_default_str();
    cmd->add_option("--json-out", opts->json_out, "JSON summary path")->capture_default_str();
  }
  sweep->add_flag("--compare-paper", sw.compare_paper,
                  "Append published reference metrics side by side");

  PlotOpts pl;
  CLI::App* plot = app.add_subcommand(
      "plot", "Render a piecewise-fit or signed-error chart as SVG");
  plot->add_option("--kind", pl.kind, "fit|error")->required();
  plot->add_option("--kernel", pl.kernel, "Kernel spec")->capture_default_str();
  plot->add_option("--format", pl.format, "Working fixed-point format")->capture_default_str();
  plot->add_option("--domain", pl.domain, "Domain '<lo>,<hi>'")->capture_default_str();
  plot->add_option("--points", pl.points, "Sample count")->capture_default_str();
  plot->add_option("--out", pl.out, "SVG output path")->required();
  plot->add_option("--data-out", pl.data_out, "Optional raw-curve CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (gen_lut->parsed()) return run_gen_lut(gl);
    if (softmax_cmd->parsed()) return run_softmax(sm);
    if (sweep->parsed()) return run_sweep_like(sw, sweep, false);
    if (topk->parsed()) return run_sweep_like(tk, topk, true);
    if (plot->parsed()) return run_plot(pl);
  } catch (const degenerate_error& e) {
    std::cerr << "approxmax: numeric error: " << e.what() << "\n";
    return 4;
  } catch (const io_error& e) {
    std::cerr << "approxmax: io error: " << e.what() << "\n";
    return 3;
  } catch (const config_error& e) {
    std::cerr << "approxmax: config error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
