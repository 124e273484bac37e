// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include "pckrig/doe.hpp"
#include "pckrig/optimize.hpp"
#include "pckrig/orthopoly.hpp"

namespace pckrig {

enum class KernelKind { Matern32, Matern52, MaternNu, Gaussian, Exponential, Dirac };

std::string to_string(KernelKind kind);
KernelKind kernel_kind_from_string(const std::string& name);

/// Stationary product-form correlation function. `Dirac` is the degenerate
/// correlation R(x,x') = [x == x'] (R = I on distinct design points).
struct Kernel {
  KernelKind kind = KernelKind::Matern52;
  Vector lengthscales;
  /// Shape parameter, used by MaternNu only (>= 1/2).
  double nu = 2.5;

  Kernel() = default;
  Kernel(KernelKind k, Vector ell, double shape = 2.5);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(lengthscales.size()); }

  /// One-dimensional correlation at distance h >= 0 with length scale ell.
  double eval_1d(double h, double ell) const;
  double eval(const double* x, const double* xp) const;
};

double kernel_eval(const Kernel& kernel, const Vector& x, const Vector& xp);

/// Symmetric N x N correlation matrix of the rows of `points` (no nugget).
Matrix correlation_matrix(const Kernel& kernel, const Matrix& points);
/// n x N cross-correlations between `points` and the design rows.
Matrix cross_correlation(const Kernel& kernel, const Matrix& points, const Matrix& design);

/// Regression part of a universal Kriging model.
class TrendBasis {
 public:
  static TrendBasis constant();
  static TrendBasis polynomials(PolyBasis basis);

  bool is_constant() const noexcept { return !basis_.has_value(); }
  const std::optional<PolyBasis>& basis() const noexcept { return basis_; }
  std::size_t size() const noexcept { return basis_ ? basis_->size() : 1; }

  /// Information matrix F_ij = f_j(x_i) for physical points.
  Matrix eval(const Matrix& points) const;

 private:
  std::optional<PolyBasis> basis_;
};

/// Diagonal jitter values tried in order until the Cholesky factorization succeeds.
std::vector<double> default_nugget_ladder();

struct FitOptions {
  std::vector<double> nugget_ladder = default_nugget_ladder();
};

/// Generalized least-squares estimates for fixed correlation parameters.
struct BlueEstimate {
  Vector beta;
  double sigma2 = 0.0;
  double nugget = 0.0;
  double log_det = 0.0;
};

enum class CalibrationObjective { ML, CV };

std::string to_string(CalibrationObjective objective);
CalibrationObjective objective_from_string(const std::string& name);

struct CalibrationOptions {
  CalibrationObjective objective = CalibrationObjective::ML;
  int n_starts = 8;
  /// Length-scale box: [lower_factor, upper_factor] x per-dimension design range.
  double lower_factor = 1e-2;
  double upper_factor = 10.0;
  bool isotropic = false;
  std::uint64_t seed = 0;
  /// Additional starting points in log length-scale space (warm starts).
  std::vector<Vector> extra_starts;
  BfgsOptions bfgs{};
  FitOptions fit{};
};

struct CalibrationReport {
  std::vector<Vector> start_points;  // log length scales
  std::vector<double> start_values;
  std::vector<double> final_values;
  int iterations = 0;
  int evaluations = 0;
  double gradient_norm = 0.0;
  double objective_value = 0.0;
  int failed_starts = 0;
};

struct KrigingPrediction {
  Vector mean;
  Vector variance;
};

struct KrigingLoo {
  /// (1/N) sum (Y_i - mu_{(-i)})^2
  double error = 0.0;
  Vector mean;
  Vector variance;
};

/// Universal Kriging model with a cached factorization of the correlation matrix.
class KrigingModel {
 public:
  /// Fits (beta, sigma^2) by BLUE for a fixed kernel.
  static KrigingModel fit(TrendBasis trend, Kernel kernel, ExperimentalDesign design,
                          const FitOptions& options = {});
  /// Rebuilds a stored model at its recorded nugget.
  static KrigingModel restore(TrendBasis trend, Kernel kernel, ExperimentalDesign design,
                              double nugget);

  const TrendBasis& trend() const noexcept { return trend_; }
  const Kernel& kernel() const noexcept { return kernel_; }
  const ExperimentalDesign& design() const noexcept { return design_; }
  const Vector& beta() const noexcept { return beta_; }
  double sigma2() const noexcept { return sigma2_; }
  double nugget() const noexcept { return nugget_; }
  double log_det() const noexcept { return log_det_; }

  /// log sigma^2 + (1/N) log det R at the fitted parameters.
  double neg_log_ml() const;

  Vector predict_mean(const Matrix& points) const;
  KrigingPrediction predict(const Matrix& points) const;
  /// Trend part f(x)^T beta only.
  Vector predict_trend(const Matrix& points) const;

  /// Analytic leave-one-out through the bordered-matrix inverse.
  KrigingLoo loo() const;

  const std::optional<CalibrationReport>& calibration() const noexcept { return report_; }
  void set_calibration(CalibrationReport report) { report_ = std::move(report); }

 private:
  KrigingModel() = default;
  void factorize(const std::vector<double>& ladder);

  TrendBasis trend_ = TrendBasis::constant();
  Kernel kernel_;
  ExperimentalDesign design_;
  double nugget_ = 0.0;
  Vector beta_;
  double sigma2_ = 0.0;
  double log_det_ = 0.0;
  // Cached factorization: R + nugget I = L L^T, F_w = L^{-1} F with QR.
  Eigen::LLT<Matrix> llt_;
  Matrix f_w_;
  Eigen::ColPivHouseholderQR<Matrix> qr_;
  Vector alpha_;  // R^{-1}(Y - F beta)
  std::optional<CalibrationReport> report_;
};

BlueEstimate fit_blue(const TrendBasis& trend, const Kernel& kernel,
                      const ExperimentalDesign& design, const FitOptions& options = {});

/// ML criterion in log form for log length scales `log_ell`.
double neg_log_ml(const Vector& log_ell, KernelKind kind, double nu, const TrendBasis& trend,
                  const ExperimentalDesign& design, const FitOptions& options = {});

/// Y^T R^-1 diag(R^-1)^-2 R^-1 Y for log length scales `log_ell`.
double cv_objective(const Vector& log_ell, KernelKind kind, double nu,
                    const ExperimentalDesign& design, const FitOptions& options = {});

/// Multi-start bounded quasi-Newton over log length scales.
KrigingModel calibrate(const TrendBasis& trend, KernelKind kind, double nu,
                       const ExperimentalDesign& design, const CalibrationOptions& options = {});

KrigingPrediction predict(const KrigingModel& model, const Matrix& points);
KrigingLoo loo_kriging(const KrigingModel& model);

}  // namespace pckrig
