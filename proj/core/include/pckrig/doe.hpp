// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace pckrig {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Independent marginal of one input variable.
class MarginalDistribution {
 public:
  enum class Kind { Uniform, Gaussian };

  /// Uniform on [lower, upper]; requires lower < upper.
  static MarginalDistribution uniform(double lower, double upper);
  /// Gaussian N(mean, stddev^2); requires stddev > 0.
  static MarginalDistribution gaussian(double mean, double stddev);

  Kind kind() const noexcept { return kind_; }
  // (lower, upper) for Uniform, (mean, stddev) for Gaussian.
  double first() const noexcept { return p1_; }
  double second() const noexcept { return p2_; }

  bool in_support(double x) const noexcept;
  double inverse_cdf(double u) const;

  /// Affine map to the reference support of the orthonormal family:
  /// Uniform(a,b) -> [-1,1], Gaussian(mu,sigma) -> N(0,1).
  double to_reference(double x) const;
  double from_reference(double z) const noexcept;

  friend bool operator==(const MarginalDistribution&,
                         const MarginalDistribution&) = default;

 private:
  MarginalDistribution(Kind kind, double p1, double p2) noexcept
      : kind_(kind), p1_(p1), p2_(p2) {}

  Kind kind_;
  double p1_;
  double p2_;
};

/// Joint distribution of independent inputs.
class InputModel {
 public:
  explicit InputModel(std::vector<MarginalDistribution> marginals);

  /// M independent copies of one marginal.
  static InputModel iid(std::size_t dim, const MarginalDistribution& marginal);

  std::size_t dim() const noexcept { return marginals_.size(); }
  const MarginalDistribution& operator[](std::size_t i) const { return marginals_[i]; }
  const std::vector<MarginalDistribution>& marginals() const noexcept { return marginals_; }

  friend bool operator==(const InputModel&, const InputModel&) = default;

 private:
  std::vector<MarginalDistribution> marginals_;
};

/// Input points (N x M) with optional responses (length N).
struct ExperimentalDesign {
  Matrix points;
  std::optional<Vector> responses;

  Eigen::Index size() const noexcept { return points.rows(); }
  Eigen::Index dim() const noexcept { return points.cols(); }
  bool evaluated() const noexcept { return responses.has_value(); }
  const Vector& y() const;

  /// Throws DataError when a point leaves the support, the response count
  /// is inconsistent, or two rows coincide in standardized coordinates.
  void validate(const InputModel& input, double duplicate_tol = 1e-12) const;
};

/// Random-permutation Latin hypercube, uniform jitter inside each stratum,
/// mapped through the marginal inverse CDFs.
ExperimentalDesign lhs_sample(const InputModel& input, std::size_t n,
                              std::uint64_t seed);

/// Independent draws from the input model.
ExperimentalDesign mc_sample(const InputModel& input, std::size_t n,
                             std::uint64_t seed);

Matrix standardize(const InputModel& input, const Matrix& points);
Matrix destandardize(const InputModel& input, const Matrix& points_std);

// CSV: header x1,...,xM[,y], one point per row, %.17g.
void write_design_csv(std::ostream& out, const ExperimentalDesign& design);
void write_design_csv(const std::filesystem::path& path,
                      const ExperimentalDesign& design);

/// Reads a design; a trailing `y` column becomes the responses.
ExperimentalDesign read_design_csv(std::istream& in);
ExperimentalDesign read_design_csv(const std::filesystem::path& path);

/// Formats a double with %.17g.
std::string format_double(double v);
/// Parses a CSV numeric field; accepts nan/inf spellings.
double parse_double(const std::string& field);

}  // namespace pckrig
