// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace pckrig {

enum class Method { OK, PCE, SPC, OPC };

std::string to_string(Method method);
Method method_from_string(const std::string& name);

/// One replication of one (function, method, N) cell.
struct BenchResult {
  std::string function;
  Method method = Method::PCE;
  std::size_t n_design = 0;
  std::size_t replication = 0;
  std::uint64_t seed = 0;
  /// NaN marks a failed cell.
  double eps_gen = 0.0;
  double wall_ms = 0.0;
  /// Selected trend / basis size (1 for ordinary Kriging).
  std::size_t p_star = 0;

  std::string key() const;
  bool failed() const;
};

struct BoxplotSummary {
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  double whisker_low = 0.0;
  double whisker_high = 0.0;
  std::vector<double> outliers;
  std::size_t count = 0;
};

/// Type-7 (linear interpolation) quantile of sorted data.
double quantile_sorted(const std::vector<double>& sorted, double p);

/// Quartiles, 1.5 IQR fences, whiskers at the furthest datum inside the fences.
BoxplotSummary summarize(std::vector<double> values);

std::string results_csv_header();
void write_result_row(std::ostream& out, const BenchResult& r);
std::vector<BenchResult> read_results_csv(std::istream& in);
/// Sorted by (function, method, n_design, replication).
void sort_results(std::vector<BenchResult>& results);

}  // namespace pckrig
