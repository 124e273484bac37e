// SPDX-License-Identifier: Apache-2.0
#include "commands.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "campaign.hpp"
#include "pckrig/errors.hpp"
#include "pckrig/rng.hpp"

namespace pckrig::cli {

namespace {

struct FitArgs {
  std::string method = "opc";
  std::string function;
  std::size_t n = 0;
  std::uint64_t seed = 1;
  std::string design;
  std::string input;
  std::string config;
  std::string out;
  std::string report;
};

struct PredictArgs {
  std::string model;
  std::string points;
  std::string out;
};

struct BenchArgs {
  std::string config;
  std::string output_dir;
  std::size_t replications = 0;
  unsigned threads = 0;
  bool no_timing = false;
  bool quiet = false;
};

struct SummarizeArgs {
  std::string results;
  std::string out;
  std::string tsv;
};

InputModel load_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open input model file " + path);
  Json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("input model file " + path + " is not valid JSON: " + e.what());
  }
  try {
    return input_from_json(j);
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
}

void write_report(std::ostream& os, const FittedSurrogate& fit, const ExperimentalDesign& design,
                  double seconds) {
  const auto& m = fit.model;
  os << "model: " << m.type << "\n";
  os << "design: N=" << design.size() << " M=" << design.dim() << "\n";
  os << "seed: " << m.seed << "\n";
  os << "config_hash: " << m.config_hash << "\n";
  os << "fit_time_s: " << format_double(seconds) << "\n";
  const auto print_indices = [&](const IndexSet& set) {
    os << "selected_basis:";
    for (const auto& a : set) {
      os << " (";
      for (std::size_t i = 0; i < a.size(); ++i) os << (i ? "," : "") << a[i];
      os << ")";
    }
    os << "\n";
  };
  if (m.pce) {
    os << "basis_size: " << m.pce->basis.size() << "\n";
    os << "loo_error: " << format_double(m.pce->loo_error) << "\n";
    os << "relative_loo: " << format_double(m.pce->relative_loo()) << "\n";
    os << "emp_error: " << format_double(m.pce->emp_error) << "\n";
    print_indices(m.pce->basis.index_set());
    return;
  }
  const KrigingModel& k = m.pck ? m.pck->inner : *m.kriging;
  const auto loo = k.loo();
  const Vector fitted = k.predict_mean(design.points);
  os << "kernel: " << to_string(k.kernel().kind) << "\n";
  os << "lengthscales:";
  for (Eigen::Index i = 0; i < k.kernel().lengthscales.size(); ++i) {
    os << " " << format_double(k.kernel().lengthscales(i));
  }
  os << "\n";
  os << "sigma2: " << format_double(k.sigma2()) << "\n";
  os << "nugget: " << format_double(k.nugget()) << "\n";
  os << "loo_error: " << format_double(loo.error) << "\n";
  const double var = (design.y().array() - design.y().mean()).square().mean();
  os << "relative_loo: " << format_double(var > 0 ? loo.error / var : loo.error) << "\n";
  os << "emp_error: "
     << format_double(var > 0 ? (fitted - design.y()).squaredNorm() /
                                    (var * static_cast<double>(design.size()))
                              : 0.0)
     << "\n";
  if (m.pck) {
    os << "P*: " << m.pck->selected_size << "\n";
    os << "candidate_degree: " << m.pck->degree << "\n";
    if (!m.pck->loo_curve.empty()) {
      os << "loo_curve:";
      for (double v : m.pck->loo_curve) os << " " << format_double(v);
      os << "\n";
    }
    print_indices(m.pck->inner.trend().basis()->index_set());
  }
}

int cmd_fit(const FitArgs& a, std::ostream& out) {
  const CampaignConfig config = a.config.empty() ? CampaignConfig{} : CampaignConfig::load(a.config);
  const Method method = method_from_string(a.method);
  std::optional<BenchmarkFunction> fn;
  if (!a.function.empty()) fn = make_benchmark(benchmark_from_string(a.function), config.ohagan_file);
  std::optional<InputModel> input;
  if (!a.input.empty()) {
    input = load_input(a.input);
  } else if (fn) {
    input = fn->input;
  } else {
    throw ConfigError("fit needs --input or --function to define the input distribution");
  }
  ExperimentalDesign design;
  if (!a.design.empty()) {
    design = read_design_csv(std::filesystem::path(a.design));
  } else {
    if (!fn || a.n == 0) throw ConfigError("fit needs --design, or --function together with --n");
    design = lhs_sample(*input, a.n, a.seed);
  }
  if (static_cast<std::size_t>(design.dim()) != input->dim()) {
    throw DataError("design has " + std::to_string(design.dim()) +
                    " columns but the input model has dimension " + std::to_string(input->dim()));
  }
  if (!design.evaluated()) {
    if (!fn) throw DataError("design has no responses and no --function was given to evaluate it");
    if (fn->input.dim() != input->dim()) {
      throw DataError("function " + fn->name() + " has dimension " + std::to_string(fn->input.dim()));
    }
    design = fn->evaluate(std::move(design));
  }
  design.validate(*input);

  const auto t0 = std::chrono::steady_clock::now();
  const auto fit = fit_method(method, design, *input, config,
                              derive_seed(a.seed, "fit/" + to_string(method)));
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  save_model(a.out, fit.model);
  if (a.report.empty()) {
    write_report(out, fit, design, seconds);
  } else {
    std::ofstream rep(a.report);
    if (!rep) throw DataError("cannot write report " + a.report);
    write_report(rep, fit, design, seconds);
  }
  return kOk;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> f;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) f.push_back(cell);
  if (!line.empty() && line.back() == ',') f.emplace_back();
  return f;
}

int cmd_predict(const PredictArgs& a, std::ostream& out) {
  const SavedModel model = load_model(a.model);
  std::ifstream in(a.points);
  if (!in) throw DataError("cannot open points file " + a.points);
  std::ofstream file;
  if (!a.out.empty()) {
    file.open(a.out);
    if (!file) throw DataError("cannot write " + a.out);
  }
  std::ostream& os = a.out.empty() ? out : file;
  os << "mean,variance\n";

  std::string line;
  if (!std::getline(in, line)) return kOk;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv(line);
  const std::size_t m = model.dim();
  std::size_t cols = header.size();
  if (cols == m + 1 && header.back() == "y") {
    // Trailing responses are ignored.
  } else if (cols != m) {
    throw DataError("points file has " + std::to_string(cols) + " columns, model expects " +
                    std::to_string(m));
  }
  for (std::size_t j = 0; j < m; ++j) {
    if (header[j] != "x" + std::to_string(j + 1)) {
      throw DataError("unexpected points header field '" + header[j] + "'");
    }
  }
  constexpr Eigen::Index kChunk = 4096;
  Matrix chunk(kChunk, static_cast<Eigen::Index>(m));
  Eigen::Index rows = 0;
  std::size_t lineno = 1;
  const auto flush = [&] {
    if (rows == 0) return;
    const Matrix pts = chunk.topRows(rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < pts.cols(); ++j) {
        if (!model.input()[static_cast<std::size_t>(j)].in_support(pts(i, j))) {
          throw DataError("point outside the input support at value " + format_double(pts(i, j)));
        }
      }
    }
    const auto pred = model.predict(pts);
    for (Eigen::Index i = 0; i < rows; ++i) {
      os << format_double(pred.mean(i)) << ',' << format_double(pred.variance(i)) << '\n';
    }
    rows = 0;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != cols) {
      throw DataError("points line " + std::to_string(lineno) + " has " + std::to_string(f.size()) +
                      " fields, expected " + std::to_string(cols));
    }
    for (std::size_t j = 0; j < m; ++j) chunk(rows, static_cast<Eigen::Index>(j)) = parse_double(f[j]);
    if (++rows == kChunk) flush();
  }
  flush();
  return kOk;
}

int cmd_bench(const BenchArgs& a, std::ostream& out) {
  CampaignConfig config = a.config.empty() ? CampaignConfig{} : CampaignConfig::load(a.config);
  if (!a.output_dir.empty()) config.output_dir = a.output_dir;
  if (a.replications > 0) config.replications = a.replications;
  BenchRunOptions opts;
  opts.record_timing = !a.no_timing;
  opts.threads = a.threads;
  opts.quiet = a.quiet;
  const auto stats = run_campaign(config, opts);
  out << "computed " << stats.computed << " cells, skipped " << stats.skipped << ", failed "
      << stats.failed << "\n";
  for (const auto& f : stats.disabled_functions) out << "disabled function: " << f << "\n";
  out << "results: " << (config.output_dir / "results.csv").string() << "\n";
  return kOk;
}

int cmd_summarize(const SummarizeArgs& a, std::ostream& out) {
  std::ifstream in(a.results);
  if (!in) throw DataError("cannot open results file " + a.results);
  const auto cells = summarize_results(read_results_csv(in));
  if (!a.out.empty()) {
    std::ofstream js(a.out);
    if (!js) throw DataError("cannot write " + a.out);
    js << summaries_to_json(cells).dump(2) << '\n';
  }
  if (!a.tsv.empty()) {
    std::ofstream ts(a.tsv);
    if (!ts) throw DataError("cannot write " + a.tsv);
    write_boxplot_tsv(ts, cells);
  }
  write_boxplot_tsv(out, cells);
  return kOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sparse PCE, Kriging and PC-Kriging surrogates with benchmark campaigns", "pckrig"};
  app.require_subcommand(1);

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit one surrogate and write it as JSON");
  fit_cmd->add_option("--method", fit.method, "ok, pce, spc or opc")->capture_default_str();
  fit_cmd->add_option("--function", fit.function, "Benchmark function (input model and responses)");
  fit_cmd->add_option("--n", fit.n, "Latin-hypercube size when no design file is given");
  fit_cmd->add_option("--seed", fit.seed, "Design and optimizer seed")->capture_default_str();
  fit_cmd->add_option("--design", fit.design, "Design CSV (x1..xM[,y])");
  fit_cmd->add_option("--input", fit.input, "Input model JSON (array of marginals)");
  fit_cmd->add_option("--config", fit.config, "Campaign config JSON for method settings");
  fit_cmd->add_option("--out", fit.out, "Model JSON output")->required();
  fit_cmd->add_option("--report", fit.report, "Report output (default stdout)");

  PredictArgs pred;
  auto* pred_cmd = app.add_subcommand("predict", "Predict mean and variance at points");
  pred_cmd->add_option("--model", pred.model, "Model JSON")->required();
  pred_cmd->add_option("--points", pred.points, "Points CSV (x1..xM)")->required();
  pred_cmd->add_option("--out", pred.out, "Predictions CSV (default stdout)");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Run or resume a benchmark campaign");
  bench_cmd->add_option("--config", bench.config, "Campaign config JSON");
  bench_cmd->add_option("--output-dir", bench.output_dir, "Override output directory");
  bench_cmd->add_option("--replications", bench.replications, "Override replication count");
  bench_cmd->add_option("--threads", bench.threads, "Worker threads (default PCKRIG_THREADS)");
  bench_cmd->add_flag("--no-timing", bench.no_timing, "Write 0 for wall_ms");
  bench_cmd->add_flag("--quiet", bench.quiet, "Suppress progress logging");

  SummarizeArgs summ;
  auto* summ_cmd = app.add_subcommand("summarize", "Box-plot statistics per cell");
  summ_cmd->add_option("--results", summ.results, "Results CSV")->required();
  summ_cmd->add_option("--out", summ.out, "Summary JSON output");
  summ_cmd->add_option("--tsv", summ.tsv, "Plot-data TSV output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kConfig;
  }

  try {
    if (*fit_cmd) return cmd_fit(fit, out);
    if (*pred_cmd) return cmd_predict(pred, out);
    if (*bench_cmd) return cmd_bench(bench, out);
    if (*summ_cmd) return cmd_summarize(summ, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const ConditioningError& e) {
    err << "numerical error: " << e.what() << " [condition estimate "
        << format_double(e.condition_estimate()) << "]\n";
    return kNumerical;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kNumerical;
  } catch (const Error& e) {
    err << "data error: " << e.what() << "\n";
    return kData;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "data error: " << e.what() << "\n";
    return kData;
  }
  return kFailure;
}

}  // namespace pckrig::cli
