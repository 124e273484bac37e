// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "pckrig/doe.hpp"
#include "pckrig/orthopoly.hpp"

namespace pckrig {

/// Truncated polynomial chaos expansion.
struct PceModel {
  PolyBasis basis;
  Vector coeffs;
  /// Analytic leave-one-out mean squared error (+inf in the interpolation regime).
  double loo_error = 0.0;
  /// Relative empirical error: residual sum of squares over total sum of squares.
  double emp_error = 0.0;
  /// (1/N) sum (Y - mean Y)^2 of the training responses.
  double response_variance = 0.0;

  /// LOO normalized by the response variance.
  double relative_loo() const noexcept {
    return response_variance > 0.0 ? loo_error / response_variance : loo_error;
  }

  Vector predict(const Matrix& points) const;
};

/// Entry order of a LAR run together with the hybrid-LOO of each prefix.
struct LarPath {
  /// Constant first (when a candidate), then LAR entry order.
  std::vector<MultiIndex> ranked_indices;
  /// loo[k] belongs to the prefix of size k+1; +inf when the prefix is degenerate.
  std::vector<double> loo;
  std::size_t best_size = 0;
};

struct LarResult {
  PceModel model;
  LarPath path;
};

/// Least-squares coefficients via column-pivoted QR of the information matrix.
PceModel fit_ols(const PolyBasis& basis, const ExperimentalDesign& design);

/// (1/N) sum ((Y_i - yhat_i) / (1 - h_i))^2 with h the hat-matrix diagonal.
/// Throws DegenerateLeverageError when some 1 - h_i <= 1e-12.
double loo_pce(const PceModel& model, const ExperimentalDesign& design);

/// Hybrid LAR: rank the candidates by least angle regression on standardized
/// regressors, refit OLS on every prefix, keep the prefix with smallest LOO.
LarResult fit_lar(const IndexSet& candidates, const ExperimentalDesign& design,
                  const InputModel& input);

Vector predict_pce(const PceModel& model, const Matrix& points);

/// Degree-adaptive sparse PCE on hyperbolic candidate sets.
struct PceOptions {
  double q = 0.75;
  int p_min = 2;
  int p_max = 20;
  /// Stop after this many consecutive degrees without LOO improvement.
  int patience = 2;
  /// Do not build candidate sets larger than this.
  std::size_t max_candidates = 5000;
};

struct AdaptivePceResult {
  PceModel model;
  LarPath path;
  IndexSet candidates;
  int degree = 0;
  std::vector<double> loo_by_degree;
};

AdaptivePceResult fit_pce_adaptive(const ExperimentalDesign& design,
                                   const InputModel& input,
                                   const PceOptions& options = {});

/// sum (y - yhat)^2 / sum (y - mean y)^2 over the same sample.
double relative_error(const Vector& exact, const Vector& approx);

}  // namespace pckrig
