// SPDX-License-Identifier: Apache-2.0
#include "pckrig/stats.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <tuple>

#include "pckrig/doe.hpp"
#include "pckrig/errors.hpp"

namespace pckrig {

std::string to_string(Method method) {
  switch (method) {
    case Method::OK: return "ok";
    case Method::PCE: return "pce";
    case Method::SPC: return "spc";
    case Method::OPC: return "opc";
  }
  return "unknown";
}

Method method_from_string(const std::string& name) {
  for (auto m : {Method::OK, Method::PCE, Method::SPC, Method::OPC}) {
    if (to_string(m) == name) return m;
  }
  throw ConfigError("unknown method '" + name + "'");
}

std::string BenchResult::key() const {
  return function + "/" + to_string(method) + "/" + std::to_string(n_design) + "/" +
         std::to_string(replication);
}

bool BenchResult::failed() const { return !std::isfinite(eps_gen); }

double quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw DomainError("quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

BoxplotSummary summarize(std::vector<double> values) {
  if (values.empty()) throw DomainError("summarize needs at least one value");
  std::sort(values.begin(), values.end());
  BoxplotSummary s;
  s.count = values.size();
  s.median = quantile_sorted(values, 0.5);
  s.q25 = quantile_sorted(values, 0.25);
  s.q75 = quantile_sorted(values, 0.75);
  const double iqr = s.q75 - s.q25;
  const double lo = s.q25 - 1.5 * iqr;
  const double hi = s.q75 + 1.5 * iqr;
  s.whisker_low = s.q25;
  s.whisker_high = s.q75;
  bool seen = false;
  for (double v : values) {
    if (v < lo || v > hi) {
      s.outliers.push_back(v);
      continue;
    }
    if (!seen) {
      s.whisker_low = v;
      seen = true;
    }
    s.whisker_high = v;
  }
  return s;
}

std::string results_csv_header() {
  return "function,method,n_design,replication,seed,eps_gen,wall_ms,p_star";
}

void write_result_row(std::ostream& out, const BenchResult& r) {
  out << r.function << ',' << to_string(r.method) << ',' << r.n_design << ',' << r.replication
      << ',' << r.seed << ',' << format_double(r.eps_gen) << ',' << format_double(r.wall_ms)
      << ',' << r.p_star << '\n';
}

std::vector<BenchResult> read_results_csv(std::istream& in) {
  std::vector<BenchResult> out;
  std::string line;
  if (!std::getline(in, line)) return out;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != results_csv_header()) throw DataError("unexpected results header: " + line);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 8) {
      throw DataError("results line " + std::to_string(lineno) + " has " +
                      std::to_string(f.size()) + " fields");
    }
    try {
      BenchResult r;
      r.function = f[0];
      r.method = method_from_string(f[1]);
      r.n_design = std::stoul(f[2]);
      r.replication = std::stoul(f[3]);
      r.seed = std::stoull(f[4]);
      r.eps_gen = parse_double(f[5]);
      r.wall_ms = parse_double(f[6]);
      r.p_star = std::stoul(f[7]);
      out.push_back(std::move(r));
    } catch (const Error&) {
      throw;
    } catch (const std::exception&) {
      throw DataError("malformed results line " + std::to_string(lineno));
    }
  }
  return out;
}

void sort_results(std::vector<BenchResult>& results) {
  std::stable_sort(results.begin(), results.end(), [](const BenchResult& a, const BenchResult& b) {
    return std::tie(a.function, a.method, a.n_design, a.replication) <
           std::tie(b.function, b.method, b.n_design, b.replication);
  });
}

}  // namespace pckrig
