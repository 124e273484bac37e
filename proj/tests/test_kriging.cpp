// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <gtest/gtest.h>

#include "pckrig/errors.hpp"
#include "pckrig/kriging.hpp"
#include "pckrig/pce.hpp"
#include "pckrig/rng.hpp"
#include "pckrig/testfunctions.hpp"

using namespace pckrig;

namespace {

constexpr KernelKind kAllKinds[] = {KernelKind::Matern32, KernelKind::Matern52, KernelKind::MaternNu,
                                    KernelKind::Gaussian, KernelKind::Exponential};

ExperimentalDesign random_design(std::size_t n, std::size_t m, std::uint64_t seed) {
  const auto in = InputModel::iid(m, MarginalDistribution::uniform(-1.0, 1.0));
  auto d = lhs_sample(in, n, seed);
  Xoshiro256 rng(seed + 1);
  Vector y(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    y(i) = std::sin(2.0 * d.points.row(i).sum()) + 0.3 * rng.uniform();
  }
  d.responses = y;
  return d;
}

TrendBasis poly_trend(std::size_t m, int p) {
  return TrendBasis::polynomials(
      PolyBasis(InputModel::iid(m, MarginalDistribution::uniform(-1.0, 1.0)), build_index_set(m, p, 1.0)));
}

Matrix dense_r(const KrigingModel& k) {
  Matrix r = correlation_matrix(k.kernel(), k.design().points);
  r.diagonal().array() += k.nugget();
  return r;
}

TEST(Kernel, UnitAtZeroDistance) {
  Vector x(3);
  x << 0.3, -1.2, 4.0;
  for (auto kind : kAllKinds) {
    const Kernel k(kind, Vector::Constant(3, 0.7), 1.7);
    EXPECT_DOUBLE_EQ(kernel_eval(k, x, x), 1.0) << to_string(kind);
  }
}

TEST(Kernel, Matern52ClosedForm) {
  const Kernel k(KernelKind::Matern52, Vector::Ones(1));
  Vector a(1), b(1);
  a << 0.0;
  b << 1.0;
  const double s5 = std::sqrt(5.0);
  EXPECT_NEAR(kernel_eval(k, a, b), (1.0 + s5 + 5.0 / 3.0) * std::exp(-s5), 1e-15);
  EXPECT_NEAR(kernel_eval(k, a, b), 0.52399, 5e-6);
}

TEST(Kernel, ProductForm) {
  Vector ell(2), a(2), b(2);
  ell << 0.5, 2.0;
  a << 0.1, 0.2;
  b << -0.6, 1.9;
  for (auto kind : kAllKinds) {
    const Kernel k(kind, ell, 1.3);
    const double prod = k.eval_1d(a(0) - b(0), ell(0)) * k.eval_1d(a(1) - b(1), ell(1));
    EXPECT_NEAR(kernel_eval(k, a, b), prod, 1e-14) << to_string(kind);
  }
}

TEST(Kernel, BesselFormMatchesClosedForms) {
  for (double h : {0.01, 0.3, 1.0, 2.5, 7.0}) {
    const Kernel n15(KernelKind::MaternNu, Vector::Ones(1), 1.5);
    const Kernel n25(KernelKind::MaternNu, Vector::Ones(1), 2.5);
    const Kernel n05(KernelKind::MaternNu, Vector::Ones(1), 0.5);
    EXPECT_NEAR(n15.eval_1d(h, 1.0), Kernel(KernelKind::Matern32, Vector::Ones(1)).eval_1d(h, 1.0), 1e-12);
    EXPECT_NEAR(n25.eval_1d(h, 1.0), Kernel(KernelKind::Matern52, Vector::Ones(1)).eval_1d(h, 1.0), 1e-12);
    EXPECT_NEAR(n05.eval_1d(h, 1.0), std::exp(-h), 1e-12);
  }
}

TEST(Kernel, RejectsInvalid) {
  EXPECT_THROW(Kernel(KernelKind::Matern52, Vector::Zero(2)), DomainError);
  EXPECT_THROW(Kernel(KernelKind::MaternNu, Vector::Ones(2), 0.2), DomainError);
  EXPECT_THROW(kernel_kind_from_string("rbf"), ConfigError);
}

TEST(Kernel, CorrelationMatrixProperties) {
  const auto d = random_design(30, 3, 5);
  for (auto kind : kAllKinds) {
    const Kernel k(kind, Vector::Constant(3, 0.4), 2.0);
    const Matrix r = correlation_matrix(k, d.points);
    EXPECT_TRUE(r.isApprox(r.transpose(), 0.0) || (r - r.transpose()).cwiseAbs().maxCoeff() == 0.0);
    EXPECT_TRUE((r.diagonal().array() == 1.0).all());
    EXPECT_TRUE((r.array() > 0.0).all() && (r.array() <= 1.0).all());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(r);
    EXPECT_GT(eig.eigenvalues().minCoeff() + 1e-12, 0.0) << to_string(kind);
  }
}

TEST(Blue, DiracKernelGivesOls) {
  const auto d = random_design(25, 2, 3);
  const auto trend = poly_trend(2, 3);
  const auto k = KrigingModel::fit(trend, Kernel(KernelKind::Dirac, Vector::Ones(2)), d);
  const auto ols = fit_ols(*trend.basis(), d);
  EXPECT_LT((k.beta() - ols.coeffs).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Blue, ConstantResponses) {
  auto d = random_design(10, 1, 2);
  d.responses = Vector::Constant(10, 3.25);
  const auto k = KrigingModel::fit(TrendBasis::constant(), Kernel(KernelKind::Matern52, Vector::Constant(1, 0.3)), d);
  EXPECT_NEAR(k.beta()(0), 3.25, 1e-12);
  EXPECT_LE(k.sigma2(), 1e-20);
  EXPECT_GT(k.sigma2(), 0.0);
}

TEST(Blue, DenseOracle) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto d = random_design(8, 1, 40 + s);
    const auto trend = poly_trend(1, 2);
    const auto k = KrigingModel::fit(trend, Kernel(KernelKind::Matern52, Vector::Constant(1, 0.6)), d);
    const Matrix rinv = dense_r(k).fullPivLu().inverse();
    const Matrix f = trend.eval(d.points);
    const Vector beta = (f.transpose() * rinv * f).fullPivLu().solve(f.transpose() * rinv * d.y());
    EXPECT_LT((beta - k.beta()).cwiseAbs().maxCoeff(), 1e-10 * std::max(1.0, beta.norm()));
    const Vector res = d.y() - f * beta;
    EXPECT_NEAR(k.sigma2(), res.dot(rinv * res) / 8.0, 1e-10 * k.sigma2());
  }
}

TEST(Blue, ErrorsOnDegenerateSystems) {
  auto d = random_design(6, 1, 9);
  d.points.row(3) = d.points.row(1);
  const FitOptions no_nugget{{0.0}};
  try {
    KrigingModel::fit(TrendBasis::constant(), Kernel(KernelKind::Gaussian, Vector::Ones(1)), d, no_nugget);
    FAIL() << "expected ConditioningError";
  } catch (const ConditioningError& e) {
    EXPECT_GT(e.condition_estimate(), 1e10);
  }
  const auto small = random_design(4, 1, 3);
  EXPECT_THROW(KrigingModel::fit(poly_trend(1, 4), Kernel(KernelKind::Matern52, Vector::Ones(1)), small),
               SingularSystemError);
  auto flat = random_design(10, 2, 3);
  flat.points.col(1).setConstant(0.5);
  EXPECT_THROW(KrigingModel::fit(poly_trend(2, 1), Kernel(KernelKind::Matern52, Vector::Ones(2)), flat),
               SingularSystemError);
}

TEST(NegLogMl, DiracIsLogResidualVariance) {
  const auto d = random_design(20, 2, 6);
  const auto trend = poly_trend(2, 2);
  const double v = neg_log_ml(Vector::Zero(2), KernelKind::Dirac, 2.5, trend, d);
  const auto ols = fit_ols(*trend.basis(), d);
  const Vector r = d.y() - ols.predict(d.points);
  EXPECT_NEAR(v, std::log(r.squaredNorm() / 20.0), 1e-12);
}

TEST(NegLogMl, DirectEvaluationOracle) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto d = random_design(6, 2, 70 + s);
    const auto trend = poly_trend(2, 1);
    Vector log_ell(2);
    log_ell << std::log(0.5 + 0.1 * s), std::log(1.0);
    const FitOptions opt{{0.0}};
    const double v = neg_log_ml(log_ell, KernelKind::Matern32, 2.5, trend, d, opt);
    const auto k = KrigingModel::fit(trend, Kernel(KernelKind::Matern32, log_ell.array().exp().matrix()), d, opt);
    const Matrix r = dense_r(k);
    const Matrix rinv = r.fullPivLu().inverse();
    const Vector res = d.y() - trend.eval(d.points) * k.beta();
    const double bracket = res.dot(rinv * res) / 6.0 * std::pow(r.determinant(), 1.0 / 6.0);
    EXPECT_NEAR(std::exp(v), bracket, 1e-10 * bracket);
  }
}

TEST(NegLogMl, ShortLengthScaleLimit) {
  auto d = random_design(15, 1, 8);
  const double var = (d.y().array() - d.y().mean()).square().mean();
  double prev = std::numeric_limits<double>::infinity();
  for (double ell : {0.05, 0.02, 0.01, 0.005}) {
    const auto k = KrigingModel::fit(TrendBasis::constant(), Kernel(KernelKind::Matern52, Vector::Constant(1, ell)), d);
    const double gap = std::abs(k.sigma2() - var);
    EXPECT_LE(gap, prev + 1e-15) << "ell " << ell;
    prev = gap;
  }
  EXPECT_LT(prev, 1e-6 * var);
}

TEST(Cv, TwoPointClosedForm) {
  ExperimentalDesign d;
  d.points.resize(2, 1);
  d.points << -0.3, 0.4;
  d.responses = Vector(2);
  *d.responses << 1.5, -0.7;
  Vector log_ell(1);
  log_ell << std::log(0.8);
  const double r = Kernel(KernelKind::Matern52, Vector::Constant(1, 0.8)).eval_1d(0.7, 0.8);
  const double y1 = 1.5, y2 = -0.7;
  const double expected = (y1 - r * y2) * (y1 - r * y2) + (y2 - r * y1) * (y2 - r * y1);
  EXPECT_NEAR(cv_objective(log_ell, KernelKind::Matern52, 2.5, d, FitOptions{{0.0}}), expected, 1e-12);
}

TEST(Cv, DiracAndPermutation) {
  const auto d = random_design(12, 2, 14);
  EXPECT_NEAR(cv_objective(Vector::Zero(2), KernelKind::Dirac, 2.5, d), d.y().squaredNorm(), 1e-12);
  ExperimentalDesign p = d;
  p.points = d.points.colwise().reverse();
  p.responses = d.y().reverse();
  Vector log_ell(2);
  log_ell << -0.5, 0.2;
  EXPECT_NEAR(cv_objective(log_ell, KernelKind::Matern52, 2.5, d), cv_objective(log_ell, KernelKind::Matern52, 2.5, p),
              1e-10 * cv_objective(log_ell, KernelKind::Matern52, 2.5, d));
}

TEST(Predict, InterpolatesDesign) {
  const auto d = random_design(20, 2, 30);
  const auto k = calibrate(TrendBasis::constant(), KernelKind::Matern52, 2.5, d);
  const auto p = k.predict(d.points);
  const double sd = std::sqrt((d.y().array() - d.y().mean()).square().mean());
  EXPECT_LT((p.mean - d.y()).cwiseAbs().maxCoeff(), 1e-6 * sd);
  EXPECT_LT(p.variance.maxCoeff(), 1e-8 * k.sigma2());
  EXPECT_GE(p.variance.minCoeff(), 0.0);
  EXPECT_LT((k.predict_mean(d.points) - p.mean).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Predict, FarFieldVariance) {
  const auto d = random_design(15, 1, 31);
  const auto k = KrigingModel::fit(TrendBasis::constant(), Kernel(KernelKind::Matern52, Vector::Constant(1, 0.2)), d);
  Matrix far(1, 1);
  far << 50.0;
  const auto p = k.predict(far);
  EXPECT_GE(p.variance(0), k.sigma2());
  EXPECT_NEAR(p.mean(0), k.beta()(0), 1e-12);
}

TEST(Predict, DiracMeanIsOlsPrediction) {
  const auto d = random_design(30, 2, 32);
  const auto trend = poly_trend(2, 3);
  const auto k = KrigingModel::fit(trend, Kernel(KernelKind::Dirac, Vector::Ones(2)), d);
  const auto ols = fit_ols(*trend.basis(), d);
  const auto pts = mc_sample(InputModel::iid(2, MarginalDistribution::uniform(-1.0, 1.0)), 50, 3).points;
  EXPECT_LT((k.predict_mean(pts) - ols.predict(pts)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Predict, AffineResponseTransform) {
  const auto d = random_design(18, 2, 33);
  const Kernel kern(KernelKind::Matern52, Vector::Constant(2, 0.5));
  const auto k1 = KrigingModel::fit(TrendBasis::constant(), kern, d);
  ExperimentalDesign d2 = d;
  d2.responses = (3.0 * d.y().array() - 2.0).matrix();
  const auto k2 = KrigingModel::fit(TrendBasis::constant(), kern, d2);
  const auto pts = mc_sample(InputModel::iid(2, MarginalDistribution::uniform(-1.0, 1.0)), 40, 4).points;
  const auto p1 = k1.predict(pts), p2 = k2.predict(pts);
  EXPECT_LT((p2.mean - (3.0 * p1.mean.array() - 2.0).matrix()).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((p2.variance / k2.sigma2() - p1.variance / k1.sigma2()).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_NEAR(k2.sigma2(), 9.0 * k1.sigma2(), 1e-10 * k2.sigma2());
}

TEST(Loo, MatchesBruteForceRefits) {
  Xoshiro256 rng(8);
  for (int t = 0; t < 25; ++t) {
    const std::size_t n = 6 + rng.below(10);
    const std::size_t m = 1 + rng.below(2);
    const auto d = random_design(n, m, 500 + t);
    const TrendBasis trend = t % 2 ? TrendBasis::constant() : poly_trend(m, 1);
    const Kernel kern(t % 3 ? KernelKind::Matern52 : KernelKind::Matern32, Vector::Constant(static_cast<Eigen::Index>(m), 0.3 + 0.05 * t));
    const auto k = KrigingModel::fit(trend, kern, d);
    const auto loo = k.loo();
    const FitOptions same{{k.nugget()}};
    double err = 0.0;
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      ExperimentalDesign di;
      di.points.resize(d.size() - 1, d.dim());
      Vector yi(d.size() - 1);
      for (Eigen::Index r = 0, c = 0; r < d.size(); ++r) {
        if (r == i) continue;
        di.points.row(c) = d.points.row(r);
        yi(c++) = d.y()(r);
      }
      di.responses = yi;
      const auto ki = KrigingModel::fit(trend, kern, di, same);
      const auto pi = ki.predict(d.points.row(i));
      EXPECT_NEAR(loo.mean(i), pi.mean(0), 1e-8 * std::max(1.0, std::abs(pi.mean(0)))) << "instance " << t;
      const double e = d.y()(i) - pi.mean(0);
      err += e * e;
    }
    err /= static_cast<double>(d.size());
    EXPECT_NEAR(loo.error, err, 1e-8 * std::max(1.0, err)) << "instance " << t;
  }
}

TEST(Loo, DiracEqualsPceLoo) {
  const auto d = random_design(25, 2, 40);
  const auto trend = poly_trend(2, 2);
  const auto k = KrigingModel::fit(trend, Kernel(KernelKind::Dirac, Vector::Ones(2)), d);
  const auto ols = fit_ols(*trend.basis(), d);
  EXPECT_NEAR(k.loo().error, ols.loo_error, 1e-10 * std::max(1.0, ols.loo_error));
}

TEST(Loo, ConstantResponsesGiveZero) {
  auto d = random_design(10, 2, 41);
  d.responses = Vector::Constant(10, -1.0);
  const auto k = KrigingModel::fit(TrendBasis::constant(), Kernel(KernelKind::Matern52, Vector::Constant(2, 0.5)), d);
  EXPECT_LE(k.loo().error, 1e-24);
}

TEST(Calibrate, RecoversLengthScaleOfSampledProcess) {
  const double ell_true = 0.5;
  int inside = 0;
  for (std::uint64_t s = 0; s < 3; ++s) {
    const auto in = InputModel::iid(1, MarginalDistribution::uniform(0.0, 10.0));
    auto d = lhs_sample(in, 60, 900 + s);
    const Kernel kern(KernelKind::Matern52, Vector::Constant(1, ell_true));
    Matrix r = correlation_matrix(kern, d.points);
    r.diagonal().array() += 1e-10;
    const Matrix l = r.llt().matrixL();
    Xoshiro256 rng(s);
    const auto g = MarginalDistribution::gaussian(0.0, 1.0);
    Vector z(60);
    for (Eigen::Index i = 0; i < 60; ++i) z(i) = g.inverse_cdf(rng.uniform_open());
    d.responses = l * z;
    const auto k = calibrate(TrendBasis::constant(), KernelKind::Matern52, 2.5, d);
    const double ell = k.kernel().lengthscales(0);
    if (ell >= 0.25 && ell <= 1.0) ++inside;
  }
  EXPECT_EQ(inside, 3);
}

TEST(Calibrate, BestValueBeatsEveryStart) {
  const auto d = random_design(25, 2, 50);
  CalibrationOptions opt;
  opt.seed = 3;
  const auto k = calibrate(poly_trend(2, 1), KernelKind::Matern52, 2.5, d, opt);
  ASSERT_TRUE(k.calibration().has_value());
  const auto& rep = *k.calibration();
  EXPECT_EQ(rep.start_points.size(), 8u);
  for (double v : rep.start_values) EXPECT_LE(rep.objective_value, v);
  for (double v : rep.final_values) EXPECT_LE(rep.objective_value, v);
  EXPECT_NEAR(k.neg_log_ml(), rep.objective_value, 1e-12 * std::abs(rep.objective_value) + 1e-14);
  EXPECT_GT(rep.iterations, 0);
}

TEST(Calibrate, CvObjectiveAndIsotropicMode) {
  const auto d = random_design(20, 3, 51);
  CalibrationOptions opt;
  opt.objective = CalibrationObjective::CV;
  opt.isotropic = true;
  opt.n_starts = 4;
  const auto k = calibrate(TrendBasis::constant(), KernelKind::Matern32, 2.5, d, opt);
  const auto& ell = k.kernel().lengthscales;
  EXPECT_EQ(ell(0), ell(1));
  EXPECT_EQ(ell(1), ell(2));
  for (double v : k.calibration()->start_values) EXPECT_LE(k.calibration()->objective_value, v);
}

TEST(Calibrate, DeterministicForSeed) {
  const auto d = random_design(20, 2, 52);
  CalibrationOptions opt;
  opt.seed = 11;
  const auto a = calibrate(TrendBasis::constant(), KernelKind::Matern52, 2.5, d, opt);
  const auto b = calibrate(TrendBasis::constant(), KernelKind::Matern52, 2.5, d, opt);
  EXPECT_TRUE(a.kernel().lengthscales == b.kernel().lengthscales);
  EXPECT_TRUE(a.beta() == b.beta());
}

TEST(Calibrate, IshigamiOrdinaryKrigingSmallDesign) {
  const auto f = make_benchmark(BenchmarkId::Ishigami);
  const auto d = f.evaluate(lhs_sample(f.input, 20, 4));
  const auto k = calibrate(TrendBasis::constant(), KernelKind::Matern52, 2.5, d);
  const auto val = f.evaluate(mc_sample(f.input, 10000, 5));
  const double e = relative_generalization_error(k.predict_mean(val.points), val.y());
  EXPECT_TRUE(std::isfinite(e));
  EXPECT_LT(e, 1.0);
}

TEST(Calibrate, NeedsEnoughPoints) {
  const auto d = random_design(4, 1, 2);
  EXPECT_THROW(calibrate(poly_trend(1, 2), KernelKind::Matern52, 2.5, d), SingularSystemError);
}

TEST(Nugget, LongerLadderNeverFailsMore) {
  const auto in = InputModel::iid(1, MarginalDistribution::uniform(0.0, 1.0));
  auto d = lhs_sample(in, 40, 3);
  d.responses = d.points.col(0).array().sin().matrix();
  const auto ladder = default_nugget_ladder();
  for (double ell : {0.05, 0.5, 5.0}) {
    bool ok_before = false;
    for (std::size_t k = 1; k <= ladder.size(); ++k) {
      const FitOptions opt{std::vector<double>(ladder.begin(), ladder.begin() + static_cast<std::ptrdiff_t>(k))};
      bool ok = true;
      try {
        KrigingModel::fit(TrendBasis::constant(), Kernel(KernelKind::Gaussian, Vector::Constant(1, ell)), d, opt);
      } catch (const ConditioningError&) {
        ok = false;
      }
      EXPECT_TRUE(ok || !ok_before) << "ell " << ell << " ladder " << k;
      ok_before = ok_before || ok;
    }
  }
}

}  // namespace
