// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pckrig/doe.hpp"

namespace pckrig {

/// Orthonormal univariate families. Legendre is orthonormal for the
/// uniform density on [-1,1], Hermite for the standard normal density.
enum class PolyFamily { Legendre, Hermite };

/// Family matching a marginal: Uniform -> Legendre, Gaussian -> Hermite.
PolyFamily family_for(const MarginalDistribution& marginal) noexcept;

/// Orthonormal polynomial of degree k at x (reference coordinates).
double eval_univariate(PolyFamily family, int k, double x);

/// Writes psi_0(x) .. psi_{out.size()-1}(x) into `out`.
void eval_univariate_all(PolyFamily family, double x, std::span<double> out);

using MultiIndex = std::vector<int>;

int total_degree(const MultiIndex& alpha) noexcept;
double q_norm(const MultiIndex& alpha, double q);

/// Truncated index set, ordered by (total degree, lexicographic).
class IndexSet {
 public:
  IndexSet(std::size_t dim, int degree, double q, std::vector<MultiIndex> indices);

  std::size_t dim() const noexcept { return dim_; }
  int degree() const noexcept { return degree_; }
  double q() const noexcept { return q_; }
  std::size_t size() const noexcept { return indices_.size(); }
  const MultiIndex& operator[](std::size_t i) const { return indices_[i]; }
  const std::vector<MultiIndex>& indices() const noexcept { return indices_; }

  auto begin() const noexcept { return indices_.begin(); }
  auto end() const noexcept { return indices_.end(); }

  /// Position of `alpha`, or size() when absent.
  std::size_t find(const MultiIndex& alpha) const;
  bool contains(const MultiIndex& alpha) const { return find(alpha) != size(); }

  /// Keeps the given positions, in the given order.
  IndexSet subset(std::span<const std::size_t> positions) const;

  friend bool operator==(const IndexSet&, const IndexSet&) = default;

 private:
  std::size_t dim_;
  int degree_;
  double q_;
  std::vector<MultiIndex> indices_;
};

/// All alpha in N^dim with ||alpha||_q <= p (boundary tolerance 1e-12).
IndexSet build_index_set(std::size_t dim, int p, double q = 1.0);

/// Tensor-product orthonormal basis over an input model.
class PolyBasis {
 public:
  PolyBasis(InputModel input, IndexSet index_set);

  const InputModel& input() const noexcept { return input_; }
  const IndexSet& index_set() const noexcept { return index_set_; }
  const std::vector<PolyFamily>& families() const noexcept { return families_; }
  std::size_t size() const noexcept { return index_set_.size(); }

  /// Information matrix F_ij = psi_j(point_i) for standardized points.
  Matrix eval_std(const Matrix& points_std) const;
  /// Same for physical points (standardized internally).
  Matrix eval(const Matrix& points) const;

  PolyBasis with_index_set(IndexSet index_set) const;

 private:
  InputModel input_;
  IndexSet index_set_;
  std::vector<PolyFamily> families_;
};

}  // namespace pckrig
