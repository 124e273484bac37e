// SPDX-License-Identifier: Apache-2.0
#include "pckrig/pce.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include "pckrig/errors.hpp"

namespace pckrig {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double centered_sum_squares(const Vector& y) {
  return (y.array() - y.mean()).square().sum();
}

struct LeastSquares {
  Vector coeffs;
  Vector one_minus_h;
  Vector residuals;
};

LeastSquares solve_least_squares(const Matrix& f, const Vector& y) {
  const auto p = f.cols();
  if (f.rows() < p) {
    throw SingularSystemError("least squares with " + std::to_string(f.rows()) +
                                  " points cannot determine " + std::to_string(p) +
                                  " basis coefficients",
                              static_cast<long>(p));
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(f);
  if (qr.rank() < p) {
    throw SingularSystemError("information matrix is rank deficient (rank " +
                                  std::to_string(qr.rank()) + " for a basis of size " +
                                  std::to_string(p) + ")",
                              static_cast<long>(p));
  }
  LeastSquares out;
  out.coeffs = qr.solve(y);
  // 1 - h from the orthogonal complement, no cancellation near h = 1
  const Matrix q = qr.householderQ() * Matrix::Identity(f.rows(), f.rows());
  out.one_minus_h = q.rightCols(f.rows() - p).rowwise().squaredNorm();
  out.residuals = y - f * out.coeffs;
  return out;
}

double loo_from(const LeastSquares& ls) {
  const auto n = ls.residuals.size();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double denom = ls.one_minus_h(i);
    if (denom <= 1e-12) {
      throw DegenerateLeverageError("leverage of design point " + std::to_string(i) +
                                    " is 1: the basis interpolates the data");
    }
    const double e = ls.residuals(i) / denom;
    acc += e * e;
  }
  return acc / static_cast<double>(n);
}

// Incremental Gram-Schmidt (two passes) used to scan the LOO of every prefix
// of the LAR ranking in O(N k) per added column.
class PrefixScanner {
 public:
  PrefixScanner(const Vector& y, Eigen::Index max_cols)
      : y_(y), q_(y.size(), max_cols), residual_(y), leverage_(Vector::Zero(y.size())) {}

  /// Adds a column; returns false when it is numerically dependent.
  bool add(Vector col) {
    const double norm0 = col.norm();
    if (norm0 == 0.0) return false;
    for (int pass = 0; pass < 2; ++pass) {
      if (k_ > 0) {
        const Vector r = q_.leftCols(k_).transpose() * col;
        col.noalias() -= q_.leftCols(k_) * r;
      }
    }
    const double norm = col.norm();
    if (norm <= 1e-10 * norm0) return false;
    col /= norm;
    q_.col(k_) = col;
    ++k_;
    residual_ -= col.dot(y_) * col;
    leverage_.array() += col.array().square();
    return true;
  }

  double loo() const {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < y_.size(); ++i) {
      const double denom = 1.0 - leverage_(i);
      if (denom <= 1e-12) return kInf;
      const double e = residual_(i) / denom;
      acc += e * e;
    }
    return acc / static_cast<double>(y_.size());
  }

 private:
  const Vector& y_;
  Matrix q_;
  Vector residual_;
  Vector leverage_;
  Eigen::Index k_ = 0;
};

// Least angle regression (Efron et al.) without the lasso modification.
// Returns the entry order of the columns of `x` (indices into its columns).
// Columns are expected centered (when an intercept is forced) and of unit
// norm; zero columns are never selected.
std::vector<Eigen::Index> lar_ranking(const Matrix& x, const Vector& y,
                                      std::size_t max_steps) {
  const auto n_cols = x.cols();
  std::vector<Eigen::Index> active;
  std::vector<double> signs;
  std::vector<char> state(static_cast<std::size_t>(n_cols), 0);  // 0 free, 1 active, 2 excluded
  for (Eigen::Index j = 0; j < n_cols; ++j) {
    if (x.col(j).squaredNorm() == 0.0) state[static_cast<std::size_t>(j)] = 2;
  }
  Matrix chol(std::min<Eigen::Index>(n_cols, static_cast<Eigen::Index>(max_steps)) + 1,
              std::min<Eigen::Index>(n_cols, static_cast<Eigen::Index>(max_steps)) + 1);
  chol.setZero();
  Vector mu = Vector::Zero(y.size());
  const double y_scale = std::max(y.norm(), std::numeric_limits<double>::min());

  while (active.size() < max_steps) {
    const Vector c = x.transpose() * (y - mu);
    double big = 0.0;
    Eigen::Index pick = -1;
    for (Eigen::Index j = 0; j < n_cols; ++j) {
      if (state[static_cast<std::size_t>(j)] != 0) continue;
      if (std::abs(c(j)) > big) {
        big = std::abs(c(j));
        pick = j;
      }
    }
    if (pick < 0 || big <= 1e-13 * y_scale) break;

    // Cholesky update for the sign-adjusted Gram matrix of the active set.
    const auto k = static_cast<Eigen::Index>(active.size());
    const double s_new = c(pick) >= 0.0 ? 1.0 : -1.0;
    Vector g(k);
    for (Eigen::Index i = 0; i < k; ++i) {
      g(i) = signs[static_cast<std::size_t>(i)] * s_new *
             x.col(active[static_cast<std::size_t>(i)]).dot(x.col(pick));
    }
    Vector l = g;
    if (k > 0) chol.topLeftCorner(k, k).triangularView<Eigen::Lower>().solveInPlace(l);
    const double d2 = x.col(pick).squaredNorm() - l.squaredNorm();
    if (d2 <= 1e-10) {
      state[static_cast<std::size_t>(pick)] = 2;
      continue;
    }
    chol.row(k).head(k) = l.transpose();
    chol(k, k) = std::sqrt(d2);
    active.push_back(pick);
    signs.push_back(s_new);
    state[static_cast<std::size_t>(pick)] = 1;

    const auto ka = k + 1;
    Vector w = Vector::Ones(ka);
    const auto lchol = chol.topLeftCorner(ka, ka).triangularView<Eigen::Lower>();
    lchol.solveInPlace(w);
    lchol.transpose().solveInPlace(w);
    const double norm_a = 1.0 / std::sqrt(w.sum());
    w *= norm_a;
    Vector u = Vector::Zero(y.size());
    for (Eigen::Index i = 0; i < ka; ++i) {
      u.noalias() += (signs[static_cast<std::size_t>(i)] * w(i)) *
                     x.col(active[static_cast<std::size_t>(i)]);
    }
    const Vector a = x.transpose() * u;
    double gamma = big / norm_a;
    for (Eigen::Index j = 0; j < n_cols; ++j) {
      if (state[static_cast<std::size_t>(j)] != 0) continue;
      const double g1 = (big - c(j)) / (norm_a - a(j));
      const double g2 = (big + c(j)) / (norm_a + a(j));
      if (g1 > 1e-15 && g1 < gamma) gamma = g1;
      if (g2 > 1e-15 && g2 < gamma) gamma = g2;
    }
    mu.noalias() += gamma * u;
  }
  return active;
}

PceModel finish_model(PolyBasis basis, const Matrix& f, const Vector& y) {
  const auto ls = solve_least_squares(f, y);
  PceModel model{std::move(basis), ls.coeffs, 0.0, 0.0, 0.0};
  const double tss = centered_sum_squares(y);
  model.response_variance = tss / static_cast<double>(y.size());
  const double rss = ls.residuals.squaredNorm();
  model.emp_error = tss > 0.0 ? rss / tss : 0.0;
  try {
    model.loo_error = loo_from(ls);
  } catch (const DegenerateLeverageError&) {
    model.loo_error = kInf;
  }
  return model;
}

}  // namespace

Vector PceModel::predict(const Matrix& points) const { return basis.eval(points) * coeffs; }

Vector predict_pce(const PceModel& model, const Matrix& points) { return model.predict(points); }

PceModel fit_ols(const PolyBasis& basis, const ExperimentalDesign& design) {
  const Vector& y = design.y();
  return finish_model(basis, basis.eval(design.points), y);
}

double loo_pce(const PceModel& model, const ExperimentalDesign& design) {
  const Matrix f = model.basis.eval(design.points);
  return loo_from(solve_least_squares(f, design.y()));
}

LarResult fit_lar(const IndexSet& candidates, const ExperimentalDesign& design,
                  const InputModel& input) {
  const Vector& y = design.y();
  const auto n = design.size();
  if (n < 2) throw DomainError("LAR requires at least 2 design points");
  if (candidates.size() == 0) throw DomainError("LAR requires a non-empty candidate set");

  const PolyBasis full(input, candidates);
  const Matrix f = full.eval(design.points);
  const MultiIndex zero(candidates.dim(), 0);
  const std::size_t const_pos = candidates.find(zero);
  const bool has_const = const_pos != candidates.size();

  // Regressors entering LAR: every non-constant candidate, standardized.
  std::vector<std::size_t> pool;
  for (std::size_t j = 0; j < candidates.size(); ++j) {
    if (j != const_pos) pool.push_back(j);
  }
  Matrix x(n, static_cast<Eigen::Index>(pool.size()));
  for (std::size_t c = 0; c < pool.size(); ++c) {
    Vector col = f.col(static_cast<Eigen::Index>(pool[c]));
    if (has_const) col.array() -= col.mean();
    const double nrm = col.norm();
    x.col(static_cast<Eigen::Index>(c)) = nrm > 1e-12 * std::sqrt(static_cast<double>(n))
                                              ? Vector(col / nrm)
                                              : Vector::Zero(n);
  }
  Vector yc = y;
  if (has_const) yc.array() -= y.mean();

  const std::size_t cap = std::min<std::size_t>(static_cast<std::size_t>(n) - 1, candidates.size());
  std::vector<std::size_t> ranked;
  if (has_const) ranked.push_back(const_pos);
  const std::size_t lar_steps = cap - ranked.size();
  if (lar_steps > 0 && centered_sum_squares(y) > 0.0) {
    for (auto c : lar_ranking(x, yc, lar_steps)) ranked.push_back(pool[static_cast<std::size_t>(c)]);
  }
  if (ranked.empty()) ranked.push_back(0);

  LarPath path;
  for (auto r : ranked) path.ranked_indices.push_back(candidates[r]);
  PrefixScanner scan(y, static_cast<Eigen::Index>(ranked.size()));
  bool dependent = false;
  for (auto r : ranked) {
    dependent = dependent || !scan.add(f.col(static_cast<Eigen::Index>(r)));
    path.loo.push_back(dependent ? kInf : scan.loo());
  }
  const auto best = static_cast<std::size_t>(
      std::min_element(path.loo.begin(), path.loo.end()) - path.loo.begin());
  path.best_size = best + 1;

  const std::vector<std::size_t> chosen(ranked.begin(),
                                        ranked.begin() + static_cast<std::ptrdiff_t>(best + 1));
  Matrix f_sel(n, static_cast<Eigen::Index>(chosen.size()));
  for (std::size_t c = 0; c < chosen.size(); ++c) {
    f_sel.col(static_cast<Eigen::Index>(c)) = f.col(static_cast<Eigen::Index>(chosen[c]));
  }
  auto model = finish_model(full.with_index_set(candidates.subset(chosen)), f_sel, y);
  path.loo[best] = model.loo_error;
  return {std::move(model), std::move(path)};
}

AdaptivePceResult fit_pce_adaptive(const ExperimentalDesign& design, const InputModel& input,
                                   const PceOptions& options) {
  if (options.p_min < 0 || options.p_max < options.p_min) {
    throw ConfigError("invalid degree range for adaptive PCE");
  }
  std::optional<AdaptivePceResult> best;
  std::vector<double> history;
  int stale = 0;
  for (int p = options.p_min; p <= options.p_max; ++p) {
    auto candidates = build_index_set(input.dim(), p, options.q);
    if (candidates.size() > options.max_candidates && best) break;
    auto fit = fit_lar(candidates, design, input);
    history.push_back(fit.model.loo_error);
    if (!best || fit.model.loo_error < best->model.loo_error) {
      best = AdaptivePceResult{std::move(fit.model), std::move(fit.path), std::move(candidates),
                               p, {}};
      stale = 0;
    } else if (++stale >= options.patience) {
      break;
    }
  }
  best->loo_by_degree = std::move(history);
  return std::move(*best);
}

double relative_error(const Vector& exact, const Vector& approx) {
  if (exact.size() != approx.size()) throw DataError("relative_error: size mismatch");
  const double tss = centered_sum_squares(exact);
  if (!(tss > 0.0)) throw DomainError("relative error undefined for constant responses");
  return (exact - approx).squaredNorm() / tss;
}

}  // namespace pckrig
