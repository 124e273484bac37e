// SPDX-License-Identifier: Apache-2.0
#include "pckrig/kriging.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "pckrig/errors.hpp"

namespace pckrig {

namespace {

constexpr double kSqrt3 = 1.7320508075688772;
constexpr double kSqrt5 = 2.23606797749979;
constexpr Eigen::Index kBatch = 2048;

double matern_nu_1d(double d, double nu) {
  if (d == 0.0) return 1.0;
  const double z = std::sqrt(2.0 * nu) * d;
  if (z > 700.0) return 0.0;
  const double v = std::pow(2.0, 1.0 - nu) / std::tgamma(nu) * std::pow(z, nu) *
                   std::cyl_bessel_k(nu, z);
  return std::isfinite(v) ? std::min(v, 1.0) : 0.0;
}

}  // namespace

std::string to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::Matern32: return "matern32";
    case KernelKind::Matern52: return "matern52";
    case KernelKind::MaternNu: return "matern";
    case KernelKind::Gaussian: return "gaussian";
    case KernelKind::Exponential: return "exponential";
    case KernelKind::Dirac: return "dirac";
  }
  return "unknown";
}

KernelKind kernel_kind_from_string(const std::string& name) {
  for (auto k : {KernelKind::Matern32, KernelKind::Matern52, KernelKind::MaternNu,
                 KernelKind::Gaussian, KernelKind::Exponential, KernelKind::Dirac}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown kernel '" + name + "'");
}

std::string to_string(CalibrationObjective objective) {
  return objective == CalibrationObjective::ML ? "ml" : "cv";
}

CalibrationObjective objective_from_string(const std::string& name) {
  if (name == "ml") return CalibrationObjective::ML;
  if (name == "cv") return CalibrationObjective::CV;
  throw ConfigError("unknown calibration objective '" + name + "'");
}

Kernel::Kernel(KernelKind k, Vector ell, double shape)
    : kind(k), lengthscales(std::move(ell)), nu(shape) {
  if (lengthscales.size() < 1) throw DomainError("kernel needs at least one length scale");
  if ((lengthscales.array() <= 0.0).any() || !lengthscales.allFinite()) {
    throw DomainError("kernel length scales must be positive and finite");
  }
  if (kind == KernelKind::MaternNu && !(nu >= 0.5)) {
    throw DomainError("Matern shape parameter must be >= 1/2");
  }
}

double Kernel::eval_1d(double h, double ell) const {
  const double d = std::abs(h) / ell;
  switch (kind) {
    case KernelKind::Matern32: return (1.0 + kSqrt3 * d) * std::exp(-kSqrt3 * d);
    case KernelKind::Matern52:
      return (1.0 + kSqrt5 * d + 5.0 * d * d / 3.0) * std::exp(-kSqrt5 * d);
    case KernelKind::MaternNu: return matern_nu_1d(d, nu);
    case KernelKind::Gaussian: return std::exp(-0.5 * d * d);
    case KernelKind::Exponential: return std::exp(-d);
    case KernelKind::Dirac: return h == 0.0 ? 1.0 : 0.0;
  }
  return 0.0;
}

double Kernel::eval(const double* x, const double* xp) const {
  const auto m = lengthscales.size();
  // Exponential factors of the closed forms are merged into a single exp.
  switch (kind) {
    case KernelKind::Matern32: {
      double poly = 1.0, expo = 0.0;
      for (Eigen::Index i = 0; i < m; ++i) {
        const double d = std::abs(x[i] - xp[i]) / lengthscales(i);
        poly *= 1.0 + kSqrt3 * d;
        expo += d;
      }
      return poly * std::exp(-kSqrt3 * expo);
    }
    case KernelKind::Matern52: {
      double poly = 1.0, expo = 0.0;
      for (Eigen::Index i = 0; i < m; ++i) {
        const double d = std::abs(x[i] - xp[i]) / lengthscales(i);
        poly *= 1.0 + kSqrt5 * d + 5.0 * d * d / 3.0;
        expo += d;
      }
      return poly * std::exp(-kSqrt5 * expo);
    }
    case KernelKind::Gaussian: {
      double expo = 0.0;
      for (Eigen::Index i = 0; i < m; ++i) {
        const double d = (x[i] - xp[i]) / lengthscales(i);
        expo += d * d;
      }
      return std::exp(-0.5 * expo);
    }
    case KernelKind::Exponential: {
      double expo = 0.0;
      for (Eigen::Index i = 0; i < m; ++i) expo += std::abs(x[i] - xp[i]) / lengthscales(i);
      return std::exp(-expo);
    }
    case KernelKind::MaternNu: {
      double v = 1.0;
      for (Eigen::Index i = 0; i < m && v != 0.0; ++i) v *= eval_1d(x[i] - xp[i], lengthscales(i));
      return v;
    }
    case KernelKind::Dirac: {
      for (Eigen::Index i = 0; i < m; ++i) {
        if (x[i] != xp[i]) return 0.0;
      }
      return 1.0;
    }
  }
  return 0.0;
}

double kernel_eval(const Kernel& kernel, const Vector& x, const Vector& xp) {
  if (x.size() != xp.size() || static_cast<std::size_t>(x.size()) != kernel.dim()) {
    throw DataError("kernel_eval: dimension mismatch");
  }
  return kernel.eval(x.data(), xp.data());
}

Matrix correlation_matrix(const Kernel& kernel, const Matrix& points) {
  if (static_cast<std::size_t>(points.cols()) != kernel.dim()) {
    throw DataError("correlation matrix: dimension mismatch");
  }
  const auto n = points.rows();
  // Row-major copy so each point is contiguous.
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> p = points;
  Matrix r(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    r(j, j) = 1.0;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double v = kernel.eval(p.row(i).data(), p.row(j).data());
      r(i, j) = v;
      r(j, i) = v;
    }
  }
  return r;
}

Matrix cross_correlation(const Kernel& kernel, const Matrix& points, const Matrix& design) {
  if (points.cols() != design.cols() || static_cast<std::size_t>(points.cols()) != kernel.dim()) {
    throw DataError("cross correlation: dimension mismatch");
  }
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> p = points;
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> d = design;
  Matrix r(points.rows(), design.rows());
  for (Eigen::Index j = 0; j < design.rows(); ++j) {
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
      r(i, j) = kernel.eval(p.row(i).data(), d.row(j).data());
    }
  }
  return r;
}

TrendBasis TrendBasis::constant() { return {}; }

TrendBasis TrendBasis::polynomials(PolyBasis basis) {
  TrendBasis t;
  t.basis_ = std::move(basis);
  return t;
}

Matrix TrendBasis::eval(const Matrix& points) const {
  if (!basis_) return Matrix::Ones(points.rows(), 1);
  return basis_->eval(points);
}

std::vector<double> default_nugget_ladder() {
  return {1e-12, 1e-11, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6};
}

void KrigingModel::factorize(const std::vector<double>& ladder) {
  if (ladder.empty()) throw ConfigError("nugget ladder is empty");
  const auto n = design_.size();
  const Vector& y = design_.y();
  const auto p = static_cast<Eigen::Index>(trend_.size());
  if (n <= p) {
    throw SingularSystemError("Kriging needs more design points (" + std::to_string(n) +
                                  ") than trend functions (" + std::to_string(p) + ")",
                              static_cast<long>(p));
  }
  const Matrix r = correlation_matrix(kernel_, design_.points);
  bool ok = false;
  for (double nug : ladder) {
    Matrix a = r;
    a.diagonal().array() += nug;
    llt_.compute(a);
    if (llt_.info() == Eigen::Success) {
      const auto diag = llt_.matrixLLT().diagonal();
      if (diag.allFinite() && (diag.array() > 0.0).all()) {
        nugget_ = nug;
        ok = true;
        break;
      }
    }
  }
  if (!ok) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(r, Eigen::EigenvaluesOnly);
    const auto ev = eig.eigenvalues();
    const double cond = ev(0) > 0.0 ? ev(ev.size() - 1) / ev(0)
                                    : std::numeric_limits<double>::infinity();
    throw ConditioningError("correlation matrix is not positive definite after nugget " +
                                format_double(ladder.back()) +
                                " (condition estimate " + format_double(cond) + ")",
                            cond);
  }
  const Matrix f = trend_.eval(design_.points);
  if (Eigen::ColPivHouseholderQR<Matrix> raw(f); raw.rank() < p) {
    throw SingularSystemError("trend information matrix is rank deficient (rank " +
                                  std::to_string(raw.rank()) + " for " +
                                  std::to_string(p) + " trend functions)",
                              static_cast<long>(p));
  }
  const auto l = llt_.matrixL();
  f_w_ = l.solve(f);
  const Vector y_w = l.solve(y);
  qr_.compute(f_w_);
  if (qr_.rank() < p) {
    throw SingularSystemError("trend information matrix is rank deficient (rank " +
                                  std::to_string(qr_.rank()) + " for " +
                                  std::to_string(p) + " trend functions)",
                              static_cast<long>(p));
  }
  beta_ = qr_.solve(y_w);
  const Vector res_w = y_w - f_w_ * beta_;
  const double floor = std::max(std::numeric_limits<double>::min(),
                                1e-28 * y.squaredNorm() / static_cast<double>(n));
  sigma2_ = std::max(res_w.squaredNorm() / static_cast<double>(n), floor);
  alpha_ = l.transpose().solve(res_w);
  log_det_ = 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
}

KrigingModel KrigingModel::fit(TrendBasis trend, Kernel kernel, ExperimentalDesign design,
                               const FitOptions& options) {
  if (!design.evaluated()) throw DataError("Kriging requires evaluated responses");
  if (static_cast<std::size_t>(design.dim()) != kernel.dim()) {
    throw DataError("kernel has " + std::to_string(kernel.dim()) +
                    " length scales but the design has dimension " +
                    std::to_string(design.dim()));
  }
  KrigingModel m;
  m.trend_ = std::move(trend);
  m.kernel_ = std::move(kernel);
  m.design_ = std::move(design);
  m.factorize(options.nugget_ladder);
  return m;
}

KrigingModel KrigingModel::restore(TrendBasis trend, Kernel kernel, ExperimentalDesign design,
                                   double nugget) {
  return fit(std::move(trend), std::move(kernel), std::move(design), FitOptions{{nugget}});
}

double KrigingModel::neg_log_ml() const {
  return std::log(sigma2_) + log_det_ / static_cast<double>(design_.size());
}

Vector KrigingModel::predict_trend(const Matrix& points) const {
  return trend_.eval(points) * beta_;
}

Vector KrigingModel::predict_mean(const Matrix& points) const {
  if (points.cols() != design_.dim()) throw DataError("prediction: dimension mismatch");
  Vector mean(points.rows());
  for (Eigen::Index start = 0; start < points.rows(); start += kBatch) {
    const auto len = std::min(kBatch, points.rows() - start);
    const Matrix chunk = points.middleRows(start, len);
    mean.segment(start, len) =
        trend_.eval(chunk) * beta_ + cross_correlation(kernel_, chunk, design_.points) * alpha_;
  }
  return mean;
}

KrigingPrediction KrigingModel::predict(const Matrix& points) const {
  if (points.cols() != design_.dim()) throw DataError("prediction: dimension mismatch");
  KrigingPrediction out{Vector(points.rows()), Vector(points.rows())};
  const auto p = f_w_.cols();
  const auto rq = qr_.matrixR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
  for (Eigen::Index start = 0; start < points.rows(); start += kBatch) {
    const auto len = std::min(kBatch, points.rows() - start);
    const Matrix chunk = points.middleRows(start, len);
    const Matrix fx = trend_.eval(chunk);
    const Matrix rx = cross_correlation(kernel_, chunk, design_.points);
    out.mean.segment(start, len) = fx * beta_ + rx * alpha_;
    // sigma^2 (1 - r~^T r~ + u^T (F~^T F~)^{-1} u), u = F~^T r~ - f, r~ = L^{-1} r
    const Matrix rw = llt_.matrixL().solve(rx.transpose());
    const Matrix u = f_w_.transpose() * rw - fx.transpose();
    const Matrix w = rq.transpose().solve(qr_.colsPermutation().transpose() * u);
    const Vector v = (1.0 - rw.colwise().squaredNorm().array() +
                      w.colwise().squaredNorm().array())
                         .matrix()
                         .transpose();
    out.variance.segment(start, len) = (sigma2_ * v.array()).max(0.0).matrix();
  }
  return out;
}

KrigingLoo KrigingModel::loo() const {
  const auto n = design_.size();
  const auto p = f_w_.cols();
  const Matrix linv = llt_.matrixL().solve(Matrix::Identity(n, n));
  // sigma^2 B_ii: diagonal of R^{-1} - R^{-1} F S^{-1} F^T R^{-1} = L^{-T} Q2 Q2^T L^{-1},
  // Q2 spanning the complement of the whitened trend
  const Matrix q = qr_.householderQ() * Matrix::Identity(n, n);
  const Vector d = (q.rightCols(n - p).transpose() * linv).colwise().squaredNorm().transpose();
  KrigingLoo out{0.0, Vector(n), Vector(n)};
  const Vector& y = design_.y();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(d(i) > 0.0)) {
      throw ConditioningError("non-positive diagonal in the leave-one-out system at point " +
                                  std::to_string(i),
                              std::numeric_limits<double>::infinity());
    }
    const double e = alpha_(i) / d(i);
    out.mean(i) = y(i) - e;
    out.variance(i) = sigma2_ / d(i);
    out.error += e * e;
  }
  out.error /= static_cast<double>(n);
  return out;
}

namespace {

Kernel kernel_from_log(KernelKind kind, double nu, const Vector& log_ell, std::size_t dim) {
  Vector ell(static_cast<Eigen::Index>(dim));
  if (log_ell.size() == 1) {
    ell.setConstant(std::exp(log_ell(0)));
  } else if (static_cast<std::size_t>(log_ell.size()) == dim) {
    ell = log_ell.array().exp().matrix();
  } else {
    throw DataError("length-scale vector has the wrong dimension");
  }
  return Kernel(kind, std::move(ell), nu);
}

}  // namespace

BlueEstimate fit_blue(const TrendBasis& trend, const Kernel& kernel,
                      const ExperimentalDesign& design, const FitOptions& options) {
  const auto m = KrigingModel::fit(trend, kernel, design, options);
  return {m.beta(), m.sigma2(), m.nugget(), m.log_det()};
}

double neg_log_ml(const Vector& log_ell, KernelKind kind, double nu, const TrendBasis& trend,
                  const ExperimentalDesign& design, const FitOptions& options) {
  const auto kernel = kernel_from_log(kind, nu, log_ell, static_cast<std::size_t>(design.dim()));
  const auto blue = fit_blue(trend, kernel, design, options);
  return std::log(blue.sigma2) + blue.log_det / static_cast<double>(design.size());
}

double cv_objective(const Vector& log_ell, KernelKind kind, double nu,
                    const ExperimentalDesign& design, const FitOptions& options) {
  const auto kernel = kernel_from_log(kind, nu, log_ell, static_cast<std::size_t>(design.dim()));
  const Matrix r = correlation_matrix(kernel, design.points);
  const auto n = r.rows();
  Eigen::LLT<Matrix> llt;
  bool ok = false;
  for (double nug : options.nugget_ladder) {
    Matrix a = r;
    a.diagonal().array() += nug;
    llt.compute(a);
    if (llt.info() == Eigen::Success) {
      ok = true;
      break;
    }
  }
  if (!ok) {
    throw ConditioningError("correlation matrix is not positive definite",
                            std::numeric_limits<double>::infinity());
  }
  const Vector a = llt.solve(design.y());
  const Matrix linv = llt.matrixL().solve(Matrix::Identity(n, n));
  const Vector diag = linv.colwise().squaredNorm().transpose();
  return (a.array() / diag.array()).square().sum();
}

KrigingModel calibrate(const TrendBasis& trend, KernelKind kind, double nu,
                       const ExperimentalDesign& design, const CalibrationOptions& options) {
  const auto m = design.dim();
  if (design.size() < static_cast<Eigen::Index>(trend.size()) + 2) {
    throw SingularSystemError("calibration needs at least P+2 design points",
                              static_cast<long>(trend.size()));
  }
  if (kind == KernelKind::Dirac) {
    // No hyperparameters to tune.
    return KrigingModel::fit(trend, Kernel(kind, Vector::Ones(m)), design, options.fit);
  }
  const Eigen::Index k = options.isotropic ? 1 : m;
  Vector range = (design.points.colwise().maxCoeff() - design.points.colwise().minCoeff()).transpose();
  for (Eigen::Index j = 0; j < m; ++j) {
    if (!(range(j) > 0.0)) range(j) = 1.0;
  }
  Vector lo(k), hi(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const double rj = options.isotropic ? range.maxCoeff() : range(j);
    lo(j) = std::log(options.lower_factor * rj);
    hi(j) = std::log(options.upper_factor * rj);
  }

  std::vector<Vector> starts;
  for (const auto& s : options.extra_starts) {
    if (s.size() == k) starts.push_back(s.cwiseMax(lo).cwiseMin(hi));
  }
  if (options.n_starts > 0) {
    const auto unit = lhs_sample(InputModel::iid(static_cast<std::size_t>(k),
                                                 MarginalDistribution::uniform(0.0, 1.0)),
                                 static_cast<std::size_t>(options.n_starts), options.seed);
    for (Eigen::Index i = 0; i < unit.points.rows(); ++i) {
      starts.emplace_back(lo.array() + unit.points.row(i).transpose().array() * (hi - lo).array());
    }
  }
  if (starts.empty()) throw ConfigError("calibration needs at least one starting point");

  const auto objective = [&](const Vector& theta) -> double {
    try {
      if (options.objective == CalibrationObjective::ML) {
        return neg_log_ml(theta, kind, nu, trend, design, options.fit);
      }
      return cv_objective(theta, kind, nu, design, options.fit);
    } catch (const NumericalError&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  CalibrationReport report;
  Vector best_theta;
  double best_value = std::numeric_limits<double>::infinity();
  double best_grad = 0.0;
  for (const auto& s : starts) {
    report.start_points.push_back(s);
    const auto res = minimize_box(objective, s, lo, hi, options.bfgs);
    report.start_values.push_back(objective(s.cwiseMax(lo).cwiseMin(hi)));
    report.final_values.push_back(res.value);
    report.iterations += res.iterations;
    report.evaluations += res.evaluations + 1;
    if (!std::isfinite(res.value)) {
      ++report.failed_starts;
      continue;
    }
    if (res.value < best_value) {
      best_value = res.value;
      best_theta = res.x;
      best_grad = res.gradient_norm;
    }
  }
  if (!std::isfinite(best_value)) {
    throw ConditioningError("all calibration starts failed to factorize the correlation matrix",
                            std::numeric_limits<double>::infinity());
  }
  report.objective_value = best_value;
  report.gradient_norm = best_grad;
  auto model = KrigingModel::fit(trend, kernel_from_log(kind, nu, best_theta, static_cast<std::size_t>(m)),
                                 design, options.fit);
  model.set_calibration(std::move(report));
  return model;
}

KrigingPrediction predict(const KrigingModel& model, const Matrix& points) {
  return model.predict(points);
}

KrigingLoo loo_kriging(const KrigingModel& model) { return model.loo(); }

}  // namespace pckrig
