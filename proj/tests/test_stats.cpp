// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "pckrig/errors.hpp"
#include "pckrig/rng.hpp"
#include "pckrig/stats.hpp"

using namespace pckrig;

namespace {

TEST(Summary, FiveEvenlySpacedValues) {
  const auto s = summarize({5, 3, 1, 4, 2});
  EXPECT_EQ(s.median, 3.0);
  EXPECT_EQ(s.q25, 2.0);
  EXPECT_EQ(s.q75, 4.0);
  EXPECT_TRUE(s.outliers.empty());
  EXPECT_EQ(s.whisker_low, 1.0);
  EXPECT_EQ(s.whisker_high, 5.0);
  EXPECT_EQ(s.count, 5u);
}

TEST(Summary, ZeroIqrFlagsTheOutlier) {
  const auto s = summarize({1, 1, 1, 1, 100});
  EXPECT_EQ(s.median, 1.0);
  EXPECT_EQ(s.q25, 1.0);
  EXPECT_EQ(s.q75, 1.0);
  ASSERT_EQ(s.outliers.size(), 1u);
  EXPECT_EQ(s.outliers[0], 100.0);
  EXPECT_EQ(s.whisker_high, 1.0);
}

TEST(Summary, SingleDatum) {
  const auto s = summarize({0.25});
  for (double v : {s.median, s.q25, s.q75, s.whisker_low, s.whisker_high}) EXPECT_EQ(v, 0.25);
  EXPECT_TRUE(s.outliers.empty());
  EXPECT_THROW(summarize({}), DomainError);
}

TEST(Summary, TypeSevenInterpolation) {
  // R: quantile(c(1, 2, 4, 8), c(.25, .5, .75), type = 7) -> 1.75 3.00 5.00
  const auto s = summarize({8, 1, 4, 2});
  EXPECT_DOUBLE_EQ(s.q25, 1.75);
  EXPECT_DOUBLE_EQ(s.median, 3.0);
  EXPECT_DOUBLE_EQ(s.q75, 5.0);
  EXPECT_DOUBLE_EQ(quantile_sorted({1, 2, 4, 8}, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(quantile_sorted({1, 2, 4, 8}, 1.0), 8.0);
}

TEST(Summary, InvariantsPermutationAndScaling) {
  Xoshiro256 rng(3);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> v(1 + rng.below(40));
    for (auto& x : v) x = std::exp(4.0 * (rng.uniform() - 0.5));
    const auto s = summarize(v);
    EXPECT_LE(s.q25, s.median);
    EXPECT_LE(s.median, s.q75);
    const double iqr = s.q75 - s.q25;
    for (double o : s.outliers) EXPECT_TRUE(o < s.q25 - 1.5 * iqr || o > s.q75 + 1.5 * iqr);
    EXPECT_LE(s.whisker_low, s.q25 + 1e-15);
    EXPECT_GE(s.whisker_high, s.q75 - 1e-15);
    std::vector<double> p = v;
    std::shuffle(p.begin(), p.end(), rng);
    const auto sp = summarize(p);
    EXPECT_EQ(sp.median, s.median);
    EXPECT_EQ(sp.outliers, s.outliers);
    std::vector<double> c = v;
    for (auto& x : c) x *= 8.0;
    const auto sc = summarize(c);
    EXPECT_DOUBLE_EQ(sc.median, 8.0 * s.median);
    EXPECT_DOUBLE_EQ(sc.q25, 8.0 * s.q25);
    EXPECT_DOUBLE_EQ(sc.q75, 8.0 * s.q75);
    EXPECT_DOUBLE_EQ(sc.whisker_high, 8.0 * s.whisker_high);
    EXPECT_EQ(sc.outliers.size(), s.outliers.size());
  }
}

TEST(ResultsCsv, RoundTripIncludingFailures) {
  std::vector<BenchResult> rows{
      {"ishigami", Method::OPC, 64, 3, 1234567890123ULL, 1.25e-9, 5012.5, 41},
      {"sobol", Method::PCE, 32, 0, 7, std::numeric_limits<double>::quiet_NaN(), 1.0, 0},
      {"rosenbrock", Method::OK, 20, 9, 0, 0.1 + 0.2, 0.0, 1},
  };
  std::stringstream ss;
  ss << results_csv_header() << '\n';
  for (const auto& r : rows) write_result_row(ss, r);
  const auto back = read_results_csv(ss);
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(back[i].key(), rows[i].key());
    EXPECT_EQ(back[i].seed, rows[i].seed);
    EXPECT_EQ(back[i].p_star, rows[i].p_star);
    EXPECT_EQ(back[i].wall_ms, rows[i].wall_ms);
    if (rows[i].failed()) {
      EXPECT_TRUE(back[i].failed());
    } else {
      EXPECT_EQ(back[i].eps_gen, rows[i].eps_gen);
    }
  }
}

TEST(ResultsCsv, RejectsMalformedInput) {
  std::stringstream bad_header("a,b,c\n");
  EXPECT_THROW(read_results_csv(bad_header), DataError);
  std::stringstream short_row(results_csv_header() + "\nishigami,pce,32\n");
  EXPECT_THROW(read_results_csv(short_row), DataError);
  std::stringstream bad_number(results_csv_header() + "\nishigami,pce,x,0,1,0.5,1,3\n");
  EXPECT_THROW(read_results_csv(bad_number), DataError);
  std::stringstream bad_method(results_csv_header() + "\nishigami,gp,32,0,1,0.5,1,3\n");
  EXPECT_THROW(read_results_csv(bad_method), ConfigError);
  std::stringstream empty("");
  EXPECT_TRUE(read_results_csv(empty).empty());
}

TEST(ResultsCsv, SortOrder) {
  std::vector<BenchResult> rows{
      {"sobol", Method::PCE, 32, 1, 0, 0.1, 0, 1},
      {"ishigami", Method::OPC, 32, 0, 0, 0.1, 0, 1},
      {"ishigami", Method::PCE, 64, 0, 0, 0.1, 0, 1},
      {"ishigami", Method::PCE, 32, 2, 0, 0.1, 0, 1},
      {"ishigami", Method::PCE, 32, 1, 0, 0.1, 0, 1},
  };
  sort_results(rows);
  std::vector<std::string> keys;
  for (const auto& r : rows) keys.push_back(r.key());
  EXPECT_EQ(keys, (std::vector<std::string>{"ishigami/pce/32/1", "ishigami/pce/32/2", "ishigami/pce/64/0",
                                            "ishigami/opc/32/0", "sobol/pce/32/1"}));
}

TEST(Methods, NamesRoundTrip) {
  for (auto m : {Method::OK, Method::PCE, Method::SPC, Method::OPC}) EXPECT_EQ(method_from_string(to_string(m)), m);
  EXPECT_THROW(method_from_string("lasso"), ConfigError);
}

}  // namespace
