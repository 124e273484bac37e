// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "pckrig/errors.hpp"
#include "pckrig/pck.hpp"
#include "pckrig/rng.hpp"
#include "pckrig/testfunctions.hpp"

using namespace pckrig;

namespace {

double variance(const Vector& y) { return (y.array() - y.mean()).square().mean(); }

ExperimentalDesign ishigami_design(std::size_t n, std::uint64_t seed) {
  const auto f = make_benchmark(BenchmarkId::Ishigami);
  return f.evaluate(lhs_sample(f.input, n, seed));
}

PckOptions small_options() {
  PckOptions o;
  o.calibration.n_starts = 4;
  o.opc_cap = 24;
  return o;
}

TEST(Spc, PolynomialTargetLeavesNothingForTheProcess) {
  const auto in = InputModel::iid(2, MarginalDistribution::uniform(-1.0, 1.0));
  const PolyBasis basis(in, build_index_set(2, 2, 1.0));
  Vector a(static_cast<Eigen::Index>(basis.size()));
  a << 1.0, 0.5, -2.0, 0.0, 0.7, 0.0;
  auto d = lhs_sample(in, 40, 3);
  d.responses = basis.eval(d.points) * a;
  const auto m = fit_spc(d, in, small_options());
  EXPECT_LE(m.inner.sigma2(), 1e-8 * variance(d.y()));
}

TEST(Spc, TrendIsTheSparsePceBasis) {
  const auto f = make_benchmark(BenchmarkId::Ishigami);
  const auto d = ishigami_design(40, 5);
  const auto opt = small_options();
  const auto pce = fit_pce_adaptive(d, f.input, opt.pce);
  const auto m = fit_spc(d, f.input, opt);
  ASSERT_TRUE(m.inner.trend().basis().has_value());
  EXPECT_EQ(m.inner.trend().basis()->index_set().indices(), pce.model.basis.index_set().indices());
  EXPECT_EQ(m.selected_size, pce.model.basis.size());
  EXPECT_EQ(m.degree, pce.degree);
}

TEST(Spc, FullRankingSwitchUsesTheRankedPrefix) {
  const auto f = make_benchmark(BenchmarkId::Ishigami);
  const auto d = ishigami_design(30, 6);
  auto opt = small_options();
  opt.spc_full_ranking = true;
  const auto m = fit_spc(d, f.input, opt);
  const std::size_t expect = std::min<std::size_t>(m.lar_path.ranked_indices.size(), 28);
  ASSERT_EQ(m.selected_size, expect);
  const auto& idx = m.inner.trend().basis()->index_set();
  for (std::size_t i = 0; i < expect; ++i) EXPECT_TRUE(idx.contains(m.lar_path.ranked_indices[i]));
}

TEST(Opc, SelectedPrefixMinimizesTheLooCurve) {
  const auto f = make_benchmark(BenchmarkId::Ishigami);
  const auto d = ishigami_design(32, 7);
  std::vector<std::size_t> seen;
  auto opt = small_options();
  opt.on_prefix = [&](std::size_t q, const KrigingModel& k) {
    seen.push_back(q);
    EXPECT_EQ(k.trend().size(), q);
  };
  const auto m = fit_opc(d, f.input, opt);
  const std::size_t q_max = std::min<std::size_t>({m.lar_path.ranked_indices.size(), 30, 24});
  ASSERT_EQ(m.loo_curve.size(), q_max);
  double mn = std::numeric_limits<double>::infinity();
  std::size_t finite = 0;
  for (double v : m.loo_curve) {
    if (std::isfinite(v)) {
      mn = std::min(mn, v);
      ++finite;
    }
  }
  EXPECT_EQ(seen.size(), finite);
  EXPECT_TRUE(std::is_sorted(seen.begin(), seen.end()));
  ASSERT_GE(m.selected_size, 1u);
  EXPECT_EQ(m.loo_curve[m.selected_size - 1], mn);
  EXPECT_NEAR(m.relative_loo(), mn, 1e-12 * mn);
  const auto& idx = m.inner.trend().basis()->index_set();
  ASSERT_EQ(idx.size(), m.selected_size);
  for (std::size_t i = 0; i < m.selected_size; ++i) EXPECT_TRUE(idx.contains(m.lar_path.ranked_indices[i]));
  EXPECT_EQ(m.lar_path.ranked_indices.front(), MultiIndex(3, 0));
}

TEST(Opc, SingleCandidateMatchesUniversalKriging) {
  const auto f = make_benchmark(BenchmarkId::Ishigami);
  const auto d = ishigami_design(20, 8);
  auto opt = small_options();
  opt.pce.p_min = 0;
  opt.pce.p_max = 0;
  opt.calibration.seed = 17;
  const auto opc = fit_opc(d, f.input, opt);
  const auto spc = fit_spc(d, f.input, opt);
  ASSERT_EQ(opc.selected_size, 1u);
  ASSERT_EQ(spc.selected_size, 1u);
  const auto trend = TrendBasis::polynomials(PolyBasis(f.input, build_index_set(3, 0, 1.0)));
  CalibrationOptions c_spc = opt.calibration;
  const auto uk_spc = calibrate(trend, opt.kernel, opt.nu, d, c_spc);
  CalibrationOptions c_opc = opt.calibration;
  c_opc.seed = derive_seed(17, "opc/1");
  const auto uk_opc = calibrate(trend, opt.kernel, opt.nu, d, c_opc);
  EXPECT_TRUE(spc.inner.kernel().lengthscales == uk_spc.kernel().lengthscales);
  EXPECT_TRUE(opc.inner.kernel().lengthscales == uk_opc.kernel().lengthscales);
  const auto pts = mc_sample(f.input, 200, 2).points;
  const auto a = opc.predict_mean(pts), b = spc.predict_mean(pts);
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-3 * std::sqrt(variance(d.y())));
}

TEST(Pck, InterpolatesAndBehavesFarAway) {
  const auto f = make_benchmark(BenchmarkId::Ishigami);
  const auto d = ishigami_design(30, 9);
  const double sd = std::sqrt(variance(d.y()));
  for (auto variant : {PckVariant::SPC, PckVariant::OPC}) {
    const auto m = variant == PckVariant::SPC ? fit_spc(d, f.input, small_options()) : fit_opc(d, f.input, small_options());
    const auto p = predict_pck(m, d.points);
    EXPECT_LT((p.mean - d.y()).cwiseAbs().maxCoeff(), 1e-6 * sd) << to_string(variant);
    EXPECT_LT(p.variance.maxCoeff(), 1e-6 * m.inner.sigma2()) << to_string(variant);
  }
}

TEST(Pck, FarFieldVarianceExceedsCentroidVariance) {
  const auto f = make_benchmark(BenchmarkId::Rastrigin2);
  const auto d = f.evaluate(lhs_sample(f.input, 30, 13));
  for (auto variant : {PckVariant::SPC, PckVariant::OPC}) {
    const auto m = variant == PckVariant::SPC ? fit_spc(d, f.input, small_options()) : fit_opc(d, f.input, small_options());
    Matrix probe(2, 2);
    probe.row(0) = d.points.colwise().mean();
    probe.row(1) << 40.0, -40.0;
    const auto v = m.predict(probe).variance;
    EXPECT_GE(v(1), v(0)) << to_string(variant);
  }
}

TEST(Pck, TrendOnlyEqualsPolynomialEvaluation) {
  const auto f = make_benchmark(BenchmarkId::Ishigami);
  const auto d = ishigami_design(30, 10);
  const auto m = fit_spc(d, f.input, small_options());
  const auto pts = mc_sample(f.input, 100, 4).points;
  const Vector ref = m.inner.trend().basis()->eval(pts) * m.inner.beta();
  EXPECT_LT((m.inner.predict_trend(pts) - ref).cwiseAbs().maxCoeff(), 1e-12 * std::max(1.0, ref.norm()));
}

TEST(Pck, DeterministicForFixedSeed) {
  const auto f = make_benchmark(BenchmarkId::Ishigami);
  const auto d = ishigami_design(28, 11);
  auto opt = small_options();
  opt.calibration.seed = 5;
  const auto s1 = fit_spc(d, f.input, opt), s2 = fit_spc(d, f.input, opt);
  EXPECT_EQ(s1.selected_size, s2.selected_size);
  EXPECT_TRUE(s1.inner.beta() == s2.inner.beta());
  EXPECT_TRUE(s1.inner.kernel().lengthscales == s2.inner.kernel().lengthscales);
  const auto o1 = fit_opc(d, f.input, opt), o2 = fit_opc(d, f.input, opt);
  EXPECT_EQ(o1.selected_size, o2.selected_size);
  EXPECT_LT((o1.inner.beta() - o2.inner.beta()).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LT((o1.inner.kernel().lengthscales - o2.inner.kernel().lengthscales).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Pck, StrictModeWithoutWarmStart) {
  const auto f = make_benchmark(BenchmarkId::Ishigami);
  const auto d = ishigami_design(24, 12);
  auto opt = small_options();
  opt.warm_start = false;
  opt.opc_cap = 8;
  const auto m = fit_opc(d, f.input, opt);
  EXPECT_LE(m.loo_curve.size(), 8u);
  EXPECT_GE(m.selected_size, 1u);
}

TEST(Pck, RosenbrockIsRecoveredFromTwentyPoints) {
  const auto f = make_benchmark(BenchmarkId::Rosenbrock);
  const auto d = f.evaluate(lhs_sample(f.input, 20, 1));
  const auto val = f.evaluate(mc_sample(f.input, 2000, 2));
  for (auto variant : {PckVariant::SPC, PckVariant::OPC}) {
    const auto m = variant == PckVariant::SPC ? fit_spc(d, f.input) : fit_opc(d, f.input);
    EXPECT_LT(relative_generalization_error(m.predict_mean(val.points), val.y()), 1e-8) << to_string(variant);
  }
}

TEST(Pck, RejectsBadInputs) {
  const auto f = make_benchmark(BenchmarkId::Ishigami);
  const auto tiny = ishigami_design(2, 1);
  EXPECT_THROW(fit_spc(tiny, f.input), DomainError);
  EXPECT_THROW(fit_opc(tiny, f.input), DomainError);
  auto unevaluated = lhs_sample(f.input, 10, 1);
  EXPECT_THROW(fit_spc(unevaluated, f.input), DataError);
  const auto other = make_benchmark(BenchmarkId::Rosenbrock);
  EXPECT_THROW(fit_opc(ishigami_design(10, 1), other.input), DataError);
}

}  // namespace
