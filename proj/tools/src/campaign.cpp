// SPDX-License-Identifier: Apache-2.0
#include "campaign.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include <spdlog/spdlog.h>

#include "pckrig/errors.hpp"
#include "pckrig/rng.hpp"

namespace pckrig::cli {

namespace {

template <class T>
void read_field(const Json& j, const char* key, T& target) {
  if (!j.contains(key)) return;
  try {
    target = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config field '") + key + "': " + e.what());
  }
}

void reject_unknown(const Json& j, std::initializer_list<const char*> known, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; })) {
      throw ConfigError("unknown config field '" + where + key + "'");
    }
  }
}

}  // namespace

Json CampaignConfig::to_json() const {
  Json methods_j = Json::array();
  for (auto m : methods) methods_j.push_back(to_string(m));
  return {
      {"functions", functions},
      {"methods", methods_j},
      {"design_sizes", design_sizes},
      {"replications", replications},
      {"validation_n", validation_n},
      {"base_seed", base_seed},
      {"pce",
       {{"q", pce.q},
        {"p_min", pce.p_min},
        {"p_max", pce.p_max},
        {"patience", pce.patience},
        {"max_candidates", pce.max_candidates}}},
      {"kriging",
       {{"kernel", to_string(kernel)},
        {"nu", nu},
        {"objective", to_string(objective)},
        {"n_starts", n_starts},
        {"lower_factor", lower_factor},
        {"upper_factor", upper_factor},
        {"isotropic", isotropic},
        {"nugget_ladder", nugget_ladder}}},
      {"opc", {{"cap", opc_cap}, {"warm_start", opc_warm_start}, {"extra_starts", opc_extra_starts}}},
      {"spc", {{"full_ranking", spc_full_ranking}}},
      {"ohagan_file", ohagan_file ? Json(ohagan_file->string()) : Json(nullptr)},
      {"output_dir", output_dir.string()},
  };
}

CampaignConfig CampaignConfig::from_json(const Json& j) {
  reject_unknown(j,
                 {"functions", "methods", "design_sizes", "replications", "validation_n",
                  "base_seed", "pce", "kriging", "opc", "spc", "ohagan_file", "output_dir"},
                 "");
  CampaignConfig c;
  read_field(j, "functions", c.functions);
  if (j.contains("methods")) {
    std::vector<std::string> names;
    read_field(j, "methods", names);
    c.methods.clear();
    for (const auto& n : names) c.methods.push_back(method_from_string(n));
  }
  read_field(j, "design_sizes", c.design_sizes);
  read_field(j, "replications", c.replications);
  read_field(j, "validation_n", c.validation_n);
  read_field(j, "base_seed", c.base_seed);
  if (j.contains("pce")) {
    const auto& p = j.at("pce");
    reject_unknown(p, {"q", "p_min", "p_max", "patience", "max_candidates"}, "pce.");
    read_field(p, "q", c.pce.q);
    read_field(p, "p_min", c.pce.p_min);
    read_field(p, "p_max", c.pce.p_max);
    read_field(p, "patience", c.pce.patience);
    read_field(p, "max_candidates", c.pce.max_candidates);
  }
  if (j.contains("kriging")) {
    const auto& k = j.at("kriging");
    reject_unknown(k,
                   {"kernel", "nu", "objective", "n_starts", "lower_factor", "upper_factor",
                    "isotropic", "nugget_ladder"},
                   "kriging.");
    std::string kernel = to_string(c.kernel), objective = to_string(c.objective);
    read_field(k, "kernel", kernel);
    read_field(k, "objective", objective);
    c.kernel = kernel_kind_from_string(kernel);
    c.objective = objective_from_string(objective);
    read_field(k, "nu", c.nu);
    read_field(k, "n_starts", c.n_starts);
    read_field(k, "lower_factor", c.lower_factor);
    read_field(k, "upper_factor", c.upper_factor);
    read_field(k, "isotropic", c.isotropic);
    read_field(k, "nugget_ladder", c.nugget_ladder);
  }
  if (j.contains("opc")) {
    const auto& o = j.at("opc");
    reject_unknown(o, {"cap", "warm_start", "extra_starts"}, "opc.");
    read_field(o, "cap", c.opc_cap);
    read_field(o, "warm_start", c.opc_warm_start);
    read_field(o, "extra_starts", c.opc_extra_starts);
  }
  if (j.contains("spc")) {
    const auto& s = j.at("spc");
    reject_unknown(s, {"full_ranking"}, "spc.");
    read_field(s, "full_ranking", c.spc_full_ranking);
  }
  if (j.contains("ohagan_file") && !j.at("ohagan_file").is_null()) {
    std::string f;
    read_field(j, "ohagan_file", f);
    c.ohagan_file = f;
  }
  if (j.contains("output_dir")) {
    std::string d;
    read_field(j, "output_dir", d);
    c.output_dir = d;
  }
  c.validate();
  return c;
}

CampaignConfig CampaignConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  Json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  return from_json(j);
}

void CampaignConfig::validate() const {
  if (functions.empty()) throw ConfigError("config: no functions");
  for (const auto& f : functions) benchmark_from_string(f);
  if (methods.empty()) throw ConfigError("config: no methods");
  if (design_sizes.empty()) throw ConfigError("config: no design sizes");
  for (auto n : design_sizes) {
    if (n < 3) throw ConfigError("config: design sizes must be >= 3");
  }
  if (replications < 1) throw ConfigError("config: replications must be >= 1");
  if (validation_n < 2) throw ConfigError("config: validation_n must be >= 2");
  if (!(pce.q > 0.0 && pce.q <= 1.0)) throw ConfigError("config: pce.q must lie in (0,1]");
  if (pce.p_min < 0 || pce.p_max < pce.p_min) throw ConfigError("config: invalid pce degree range");
  if (pce.patience < 1) throw ConfigError("config: pce.patience must be >= 1");
  if (n_starts < 1) throw ConfigError("config: kriging.n_starts must be >= 1");
  if (!(lower_factor > 0.0 && upper_factor > lower_factor)) {
    throw ConfigError("config: kriging bounds must satisfy 0 < lower_factor < upper_factor");
  }
  if (nugget_ladder.empty()) throw ConfigError("config: empty nugget ladder");
  if (kernel == KernelKind::MaternNu && !(nu >= 0.5)) throw ConfigError("config: nu must be >= 1/2");
  if (opc_cap < 1) throw ConfigError("config: opc.cap must be >= 1");
  if (opc_extra_starts < 0) throw ConfigError("config: opc.extra_starts must be >= 0");
}

CalibrationOptions CampaignConfig::calibration(std::uint64_t seed) const {
  CalibrationOptions c;
  c.objective = objective;
  c.n_starts = n_starts;
  c.lower_factor = lower_factor;
  c.upper_factor = upper_factor;
  c.isotropic = isotropic;
  c.seed = seed;
  c.fit.nugget_ladder = nugget_ladder;
  return c;
}

PckOptions CampaignConfig::pck(std::uint64_t seed) const {
  PckOptions o;
  o.pce = pce;
  o.kernel = kernel;
  o.nu = nu;
  o.calibration = calibration(seed);
  o.spc_full_ranking = spc_full_ranking;
  o.opc_cap = opc_cap;
  o.warm_start = opc_warm_start;
  o.warm_extra_starts = opc_extra_starts;
  return o;
}

std::uint64_t design_seed(std::uint64_t base, const std::string& function, std::size_t n,
                          std::size_t replication) {
  return derive_seed(base, "design/" + function + "/" + std::to_string(n) + "/" +
                               std::to_string(replication));
}

std::uint64_t method_seed(std::uint64_t base, const std::string& function, Method method,
                          std::size_t n, std::size_t replication) {
  return derive_seed(base, "fit/" + function + "/" + to_string(method) + "/" +
                               std::to_string(n) + "/" + std::to_string(replication));
}

std::uint64_t validation_seed(std::uint64_t base, const std::string& function) {
  return derive_seed(base, "validation/" + function);
}

FittedSurrogate fit_method(Method method, const ExperimentalDesign& design,
                           const InputModel& input, const CampaignConfig& config,
                           std::uint64_t seed) {
  if (static_cast<std::size_t>(design.dim()) != input.dim()) {
    throw DataError("design has " + std::to_string(design.dim()) +
                    " columns but the input model has dimension " + std::to_string(input.dim()));
  }
  FittedSurrogate out;
  out.model.type = to_string(method);
  out.model.seed = seed;
  out.model.config_hash = config_hash(config.to_json());
  out.model.input_model = input;
  switch (method) {
    case Method::OK: {
      out.model.type = "kriging";
      out.model.kriging = calibrate(TrendBasis::constant(), config.kernel, config.nu, design,
                                    config.calibration(seed));
      out.p_star = 1;
      break;
    }
    case Method::PCE: {
      auto r = fit_pce_adaptive(design, input, config.pce);
      out.p_star = r.model.basis.size();
      out.model.pce = std::move(r.model);
      break;
    }
    case Method::SPC: {
      auto m = fit_spc(design, input, config.pck(seed));
      out.p_star = m.selected_size;
      out.model.pck = std::move(m);
      break;
    }
    case Method::OPC: {
      auto m = fit_opc(design, input, config.pck(seed));
      out.p_star = m.selected_size;
      out.model.pck = std::move(m);
      break;
    }
  }
  return out;
}

unsigned default_thread_count() {
  if (const char* env = std::getenv("PCKRIG_THREADS"); env && *env) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

struct Cell {
  std::size_t function;  // index into the loaded benchmark list
  Method method;
  std::size_t n;
  std::size_t replication;
};

std::map<std::string, BenchResult> load_existing(const std::filesystem::path& path) {
  std::map<std::string, BenchResult> out;
  std::ifstream in(path);
  if (!in) return out;
  for (auto& r : read_results_csv(in)) out[r.key()] = r;
  return out;
}

void write_sorted(const std::filesystem::path& path, std::vector<BenchResult> rows) {
  sort_results(rows);
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw DataError("cannot write " + tmp);
    out << results_csv_header() << '\n';
    for (const auto& r : rows) write_result_row(out, r);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

BenchRunStats run_campaign(const CampaignConfig& config, const BenchRunOptions& options) {
  config.validate();
  std::filesystem::create_directories(config.output_dir);
  {
    std::ofstream cfg(config.output_dir / "config.json");
    cfg << config.to_json().dump(2) << '\n';
  }
  const auto results_path = config.output_dir / "results.csv";
  auto existing = load_existing(results_path);

  BenchRunStats stats;
  std::vector<BenchmarkFunction> functions;
  std::vector<ExperimentalDesign> validation;
  for (const auto& name : config.functions) {
    try {
      functions.push_back(make_benchmark(benchmark_from_string(name), config.ohagan_file));
    } catch (const ConfigError& e) {
      if (!options.quiet) spdlog::warn("function '{}' disabled: {}", name, e.what());
      stats.disabled_functions.push_back(name);
      continue;
    }
    const auto& f = functions.back();
    validation.push_back(
        f.evaluate(mc_sample(f.input, config.validation_n, validation_seed(config.base_seed, name))));
  }

  std::vector<Cell> todo;
  for (std::size_t fi = 0; fi < functions.size(); ++fi) {
    for (auto n : config.design_sizes) {
      for (std::size_t rep = 0; rep < config.replications; ++rep) {
        for (auto m : config.methods) {
          BenchResult probe;
          probe.function = functions[fi].name();
          probe.method = m;
          probe.n_design = n;
          probe.replication = rep;
          const auto it = existing.find(probe.key());
          if (it != existing.end() && !it->second.failed()) {
            ++stats.skipped;
            continue;
          }
          todo.push_back({fi, m, n, rep});
        }
      }
    }
  }

  std::mutex mu;
  std::ofstream appender;
  if (!std::filesystem::exists(results_path)) {
    appender.open(results_path);
    appender << results_csv_header() << '\n';
  } else {
    appender.open(results_path, std::ios::app);
  }
  if (!appender) throw DataError("cannot write " + results_path.string());

  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < todo.size(); i = next++) {
      const Cell& c = todo[i];
      const auto& f = functions[c.function];
      BenchResult r;
      r.function = f.name();
      r.method = c.method;
      r.n_design = c.n;
      r.replication = c.replication;
      r.seed = design_seed(config.base_seed, r.function, c.n, c.replication);
      const auto t0 = std::chrono::steady_clock::now();
      try {
        const auto design = f.evaluate(lhs_sample(f.input, c.n, r.seed));
        const auto fit = fit_method(c.method, design, f.input, config,
                                    method_seed(config.base_seed, r.function, c.method, c.n,
                                                c.replication));
        const Vector pred = fit.model.pce ? fit.model.pce->predict(validation[c.function].points)
                            : fit.model.pck
                                ? fit.model.pck->predict_mean(validation[c.function].points)
                                : fit.model.kriging->predict_mean(validation[c.function].points);
        r.eps_gen = relative_generalization_error(pred, validation[c.function].y());
        r.p_star = fit.p_star;
      } catch (const Error& e) {
        r.eps_gen = std::numeric_limits<double>::quiet_NaN();
        if (!options.quiet) spdlog::error("cell {} failed: {}", r.key(), e.what());
      }
      const auto t1 = std::chrono::steady_clock::now();
      r.wall_ms = options.record_timing
                      ? std::chrono::duration<double, std::milli>(t1 - t0).count()
                      : 0.0;
      std::lock_guard lock(mu);
      write_result_row(appender, r);
      appender.flush();
      existing[r.key()] = r;
      ++stats.computed;
      if (r.failed()) ++stats.failed;
      if (!options.quiet) {
        spdlog::info("[{}/{}] {} eps_gen={:.3e} P={}", stats.computed, todo.size(), r.key(),
                     r.eps_gen, r.p_star);
      }
    }
  };
  const unsigned threads =
      std::max(1u, std::min<unsigned>(options.threads ? options.threads : default_thread_count(),
                                      static_cast<unsigned>(std::max<std::size_t>(todo.size(), 1))));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  appender.close();

  std::vector<BenchResult> rows;
  rows.reserve(existing.size());
  for (auto& [key, r] : existing) rows.push_back(r);
  write_sorted(results_path, rows);

  const auto cells = summarize_results(rows);
  {
    std::ofstream out(config.output_dir / "summary.json");
    out << summaries_to_json(cells).dump(2) << '\n';
  }
  {
    std::ofstream out(config.output_dir / "boxplot.tsv");
    write_boxplot_tsv(out, cells);
  }
  return stats;
}

std::vector<CellSummary> summarize_results(const std::vector<BenchResult>& results) {
  std::map<std::tuple<std::string, Method, std::size_t>, std::pair<std::vector<double>, std::size_t>> groups;
  for (const auto& r : results) {
    auto& g = groups[{r.function, r.method, r.n_design}];
    if (r.failed()) {
      ++g.second;
    } else {
      g.first.push_back(r.eps_gen);
    }
  }
  std::vector<CellSummary> out;
  for (auto& [key, g] : groups) {
    CellSummary s{std::get<0>(key), std::get<1>(key), std::get<2>(key), g.second, std::nullopt};
    if (!g.first.empty()) s.box = summarize(g.first);
    out.push_back(std::move(s));
  }
  return out;
}

Json summaries_to_json(const std::vector<CellSummary>& cells) {
  Json a = Json::array();
  for (const auto& c : cells) {
    Json j = {{"function", c.function},
              {"method", to_string(c.method)},
              {"n_design", c.n_design},
              {"failures", c.failures}};
    if (c.box) {
      const auto& b = *c.box;
      Json outl = Json::array();
      for (double v : b.outliers) outl.push_back(pckrig::to_json(v));
      j["count"] = b.count;
      j["median"] = pckrig::to_json(b.median);
      j["q25"] = pckrig::to_json(b.q25);
      j["q75"] = pckrig::to_json(b.q75);
      j["whisker_low"] = pckrig::to_json(b.whisker_low);
      j["whisker_high"] = pckrig::to_json(b.whisker_high);
      j["outliers"] = outl;
    } else {
      j["count"] = 0;
    }
    a.push_back(std::move(j));
  }
  return a;
}

void write_boxplot_tsv(std::ostream& out, const std::vector<CellSummary>& cells) {
  out << "function\tmethod\tn_design\tcount\tfailures\tmedian\tq25\tq75\twhisker_low\twhisker_high\t"
         "outliers\n";
  for (const auto& c : cells) {
    out << c.function << '\t' << to_string(c.method) << '\t' << c.n_design << '\t'
        << (c.box ? c.box->count : 0) << '\t' << c.failures;
    if (c.box) {
      const auto& b = *c.box;
      out << '\t' << format_double(b.median) << '\t' << format_double(b.q25) << '\t'
          << format_double(b.q75) << '\t' << format_double(b.whisker_low) << '\t'
          << format_double(b.whisker_high) << '\t';
      for (std::size_t i = 0; i < b.outliers.size(); ++i) {
        out << (i ? "," : "") << format_double(b.outliers[i]);
      }
    } else {
      out << "\tnan\tnan\tnan\tnan\tnan\t";
    }
    out << '\n';
  }
}

}  // namespace pckrig::cli
