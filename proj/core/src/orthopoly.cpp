// SPDX-License-Identifier: Apache-2.0
#include "pckrig/orthopoly.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pckrig/errors.hpp"

namespace pckrig {

PolyFamily family_for(const MarginalDistribution& marginal) noexcept {
  return marginal.kind() == MarginalDistribution::Kind::Uniform ? PolyFamily::Legendre
                                                                 : PolyFamily::Hermite;
}

void eval_univariate_all(PolyFamily family, double x, std::span<double> out) {
  const auto n = out.size();
  if (n == 0) return;
  out[0] = 1.0;
  if (n == 1) return;
  // Classical recurrence first, normalization afterwards.
  out[1] = x;
  if (family == PolyFamily::Legendre) {
    for (std::size_t k = 1; k + 1 < n; ++k) {
      const auto kd = static_cast<double>(k);
      out[k + 1] = ((2.0 * kd + 1.0) * x * out[k] - kd * out[k - 1]) / (kd + 1.0);
    }
    for (std::size_t k = 1; k < n; ++k) out[k] *= std::sqrt(2.0 * static_cast<double>(k) + 1.0);
  } else {
    for (std::size_t k = 1; k + 1 < n; ++k) {
      out[k + 1] = x * out[k] - static_cast<double>(k) * out[k - 1];
    }
    for (std::size_t k = 2; k < n; ++k) {
      out[k] *= std::exp(-0.5 * std::lgamma(static_cast<double>(k) + 1.0));
    }
  }
}

double eval_univariate(PolyFamily family, int k, double x) {
  if (k < 0) throw DomainError("polynomial degree must be >= 0");
  std::vector<double> vals(static_cast<std::size_t>(k) + 1);
  eval_univariate_all(family, x, vals);
  return vals.back();
}

int total_degree(const MultiIndex& alpha) noexcept {
  return std::accumulate(alpha.begin(), alpha.end(), 0);
}

double q_norm(const MultiIndex& alpha, double q) {
  double s = 0.0;
  for (int a : alpha) {
    if (a > 0) s += std::pow(static_cast<double>(a), q);
  }
  return std::pow(s, 1.0 / q);
}

IndexSet::IndexSet(std::size_t dim, int degree, double q, std::vector<MultiIndex> indices)
    : dim_(dim), degree_(degree), q_(q), indices_(std::move(indices)) {
  if (!(q > 0.0 && q <= 1.0)) throw DomainError("q-norm parameter must lie in (0,1]");
  if (degree < 0) throw DomainError("degree must be >= 0");
  for (const auto& a : indices_) {
    if (a.size() != dim_) throw DomainError("multi-index dimension mismatch");
    if (std::any_of(a.begin(), a.end(), [](int v) { return v < 0; })) {
      throw DomainError("multi-index entries must be >= 0");
    }
  }
}

std::size_t IndexSet::find(const MultiIndex& alpha) const {
  return static_cast<std::size_t>(std::find(indices_.begin(), indices_.end(), alpha) -
                                  indices_.begin());
}

IndexSet IndexSet::subset(std::span<const std::size_t> positions) const {
  std::vector<MultiIndex> picked;
  picked.reserve(positions.size());
  for (auto p : positions) picked.push_back(indices_.at(p));
  return {dim_, degree_, q_, std::move(picked)};
}

namespace {

void enumerate(std::size_t dim, int p, double q, double bound, MultiIndex& cur,
               std::size_t pos, double partial, int partial_deg,
               std::vector<MultiIndex>& out) {
  if (pos == dim) {
    out.push_back(cur);
    return;
  }
  for (int a = 0; partial_deg + a <= p; ++a) {
    const double term = a == 0 ? 0.0 : std::pow(static_cast<double>(a), q);
    if (partial + term > bound) break;
    cur[pos] = a;
    enumerate(dim, p, q, bound, cur, pos + 1, partial + term, partial_deg + a, out);
  }
  cur[pos] = 0;
}

}  // namespace

IndexSet build_index_set(std::size_t dim, int p, double q) {
  if (dim < 1) throw DomainError("index set dimension must be >= 1");
  if (p < 0) throw DomainError("degree must be >= 0");
  if (!(q > 0.0 && q <= 1.0)) throw DomainError("q-norm parameter must lie in (0,1]");
  // ||a||_q <= p + tol  <=>  sum a_i^q <= (p + tol)^q
  const double bound = std::pow(static_cast<double>(p) + 1e-12, q);
  std::vector<MultiIndex> out;
  MultiIndex cur(dim, 0);
  enumerate(dim, p, q, bound, cur, 0, 0.0, 0, out);
  std::sort(out.begin(), out.end(), [](const MultiIndex& a, const MultiIndex& b) {
    const int da = total_degree(a);
    const int db = total_degree(b);
    if (da != db) return da < db;
    return a < b;
  });
  return {dim, p, q, std::move(out)};
}

PolyBasis::PolyBasis(InputModel input, IndexSet index_set)
    : input_(std::move(input)), index_set_(std::move(index_set)) {
  if (index_set_.dim() != input_.dim()) {
    throw DomainError("index set dimension does not match the input model");
  }
  families_.reserve(input_.dim());
  for (const auto& m : input_.marginals()) families_.push_back(family_for(m));
}

Matrix PolyBasis::eval_std(const Matrix& points_std) const {
  const auto m = input_.dim();
  if (static_cast<std::size_t>(points_std.cols()) != m) {
    throw DataError("basis evaluation: point dimension mismatch");
  }
  std::vector<int> max_deg(m, 0);
  for (const auto& a : index_set_) {
    for (std::size_t i = 0; i < m; ++i) max_deg[i] = std::max(max_deg[i], a[i]);
  }
  std::vector<std::vector<double>> uni(m);
  for (std::size_t i = 0; i < m; ++i) uni[i].resize(static_cast<std::size_t>(max_deg[i]) + 1);

  const auto n_terms = static_cast<Eigen::Index>(index_set_.size());
  Matrix f(points_std.rows(), n_terms);
  for (Eigen::Index r = 0; r < points_std.rows(); ++r) {
    for (std::size_t i = 0; i < m; ++i) {
      eval_univariate_all(families_[i], points_std(r, static_cast<Eigen::Index>(i)), uni[i]);
    }
    for (Eigen::Index c = 0; c < n_terms; ++c) {
      const auto& a = index_set_[static_cast<std::size_t>(c)];
      double v = 1.0;
      for (std::size_t i = 0; i < m; ++i) {
        if (a[i] != 0) v *= uni[i][static_cast<std::size_t>(a[i])];
      }
      f(r, c) = v;
    }
  }
  return f;
}

Matrix PolyBasis::eval(const Matrix& points) const {
  return eval_std(standardize(input_, points));
}

PolyBasis PolyBasis::with_index_set(IndexSet index_set) const {
  return {input_, std::move(index_set)};
}

}  // namespace pckrig
