// SPDX-License-Identifier: Apache-2.0
#include "pckrig/doe.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include <boost/math/distributions/normal.hpp>

#include "pckrig/errors.hpp"
#include "pckrig/rng.hpp"

namespace pckrig {

MarginalDistribution MarginalDistribution::uniform(double lower, double upper) {
  if (!(lower < upper)) {
    throw DomainError("uniform marginal requires lower < upper");
  }
  return {Kind::Uniform, lower, upper};
}

MarginalDistribution MarginalDistribution::gaussian(double mean, double stddev) {
  if (!(stddev > 0.0) || !std::isfinite(mean)) {
    throw DomainError("gaussian marginal requires stddev > 0");
  }
  return {Kind::Gaussian, mean, stddev};
}

bool MarginalDistribution::in_support(double x) const noexcept {
  if (kind_ == Kind::Uniform) return x >= p1_ && x <= p2_;
  return std::isfinite(x);
}

double MarginalDistribution::inverse_cdf(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) throw DomainError("probability outside [0,1]");
  if (kind_ == Kind::Uniform) return p1_ + u * (p2_ - p1_);
  if (u <= 0.0 || u >= 1.0) throw DomainError("gaussian quantile at 0 or 1");
  return boost::math::quantile(boost::math::normal_distribution<double>(p1_, p2_), u);
}

double MarginalDistribution::to_reference(double x) const {
  if (!in_support(x)) {
    throw DomainError("point " + format_double(x) + " outside marginal support");
  }
  if (kind_ == Kind::Uniform) return 2.0 * (x - p1_) / (p2_ - p1_) - 1.0;
  return (x - p1_) / p2_;
}

double MarginalDistribution::from_reference(double z) const noexcept {
  if (kind_ == Kind::Uniform) return p1_ + 0.5 * (z + 1.0) * (p2_ - p1_);
  return p1_ + p2_ * z;
}

InputModel::InputModel(std::vector<MarginalDistribution> marginals)
    : marginals_(std::move(marginals)) {
  if (marginals_.empty()) throw DomainError("input model needs at least one marginal");
}

InputModel InputModel::iid(std::size_t dim, const MarginalDistribution& marginal) {
  return InputModel(std::vector<MarginalDistribution>(dim, marginal));
}

const Vector& ExperimentalDesign::y() const {
  if (!responses) throw DataError("experimental design has no responses");
  return *responses;
}

void ExperimentalDesign::validate(const InputModel& input, double duplicate_tol) const {
  if (points.rows() < 1) throw DataError("experimental design is empty");
  if (static_cast<std::size_t>(points.cols()) != input.dim()) {
    throw DataError("design has " + std::to_string(points.cols()) +
                    " columns but the input model has dimension " +
                    std::to_string(input.dim()));
  }
  if (responses && responses->size() != points.rows()) {
    throw DataError("response count does not match the number of points");
  }
  Matrix z;
  try {
    z = standardize(input, points);
  } catch (const DomainError& e) {
    throw DataError(e.what());
  }
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < z.rows(); ++j) {
      if ((z.row(i) - z.row(j)).lpNorm<Eigen::Infinity>() <= duplicate_tol) {
        throw DataError("duplicate design rows " + std::to_string(i) + " and " +
                        std::to_string(j));
      }
    }
  }
}

ExperimentalDesign lhs_sample(const InputModel& input, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw DomainError("lhs_sample requires n >= 1");
  Xoshiro256 rng(seed);
  const auto m = input.dim();
  Matrix points(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
  std::vector<std::size_t> perm(n);
  for (std::size_t j = 0; j < m; ++j) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    // Fisher-Yates with the portable generator (std::shuffle is not portable).
    for (std::size_t i = n - 1; i > 0; --i) {
      std::swap(perm[i], perm[rng.below(i + 1)]);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double u = (static_cast<double>(perm[i]) + rng.uniform_open()) /
                       static_cast<double>(n);
      points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          input[j].inverse_cdf(u);
    }
  }
  return {std::move(points), std::nullopt};
}

ExperimentalDesign mc_sample(const InputModel& input, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw DomainError("mc_sample requires n >= 1");
  Xoshiro256 rng(seed);
  const auto m = static_cast<Eigen::Index>(input.dim());
  Matrix points(static_cast<Eigen::Index>(n), m);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      points(i, j) = input[static_cast<std::size_t>(j)].inverse_cdf(rng.uniform_open());
    }
  }
  return {std::move(points), std::nullopt};
}

Matrix standardize(const InputModel& input, const Matrix& points) {
  if (static_cast<std::size_t>(points.cols()) != input.dim()) {
    throw DataError("standardize: dimension mismatch");
  }
  Matrix z(points.rows(), points.cols());
  for (Eigen::Index j = 0; j < points.cols(); ++j) {
    const auto& marg = input[static_cast<std::size_t>(j)];
    for (Eigen::Index i = 0; i < points.rows(); ++i) z(i, j) = marg.to_reference(points(i, j));
  }
  return z;
}

Matrix destandardize(const InputModel& input, const Matrix& points_std) {
  if (static_cast<std::size_t>(points_std.cols()) != input.dim()) {
    throw DataError("destandardize: dimension mismatch");
  }
  Matrix x(points_std.rows(), points_std.cols());
  for (Eigen::Index j = 0; j < points_std.cols(); ++j) {
    const auto& marg = input[static_cast<std::size_t>(j)];
    for (Eigen::Index i = 0; i < points_std.rows(); ++i) {
      x(i, j) = marg.from_reference(points_std(i, j));
    }
  }
  return x;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& field) {
  std::size_t pos = 0;
  double v;
  try {
    v = std::stod(field, &pos);
  } catch (const std::out_of_range&) {
    // Subnormals written with %.17g parse with ERANGE; strtod is exact there.
    v = std::strtod(field.c_str(), nullptr);
    pos = field.size();
  } catch (const std::exception&) {
    throw DataError("not a number: '" + field + "'");
  }
  while (pos < field.size() && std::isspace(static_cast<unsigned char>(field[pos]))) ++pos;
  if (pos != field.size()) throw DataError("not a number: '" + field + "'");
  return v;
}

void write_design_csv(std::ostream& out, const ExperimentalDesign& design) {
  const auto m = design.dim();
  for (Eigen::Index j = 0; j < m; ++j) out << (j ? "," : "") << 'x' << (j + 1);
  if (design.evaluated()) out << ",y";
  out << '\n';
  for (Eigen::Index i = 0; i < design.size(); ++i) {
    for (Eigen::Index j = 0; j < m; ++j) out << (j ? "," : "") << format_double(design.points(i, j));
    if (design.evaluated()) out << ',' << format_double((*design.responses)(i));
    out << '\n';
  }
}

void write_design_csv(const std::filesystem::path& path, const ExperimentalDesign& design) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  write_design_csv(out, design);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    if (!field.empty() && field.back() == '\r') field.pop_back();
    fields.push_back(field);
  }
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

ExperimentalDesign read_design_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("design CSV is empty (missing header)");
  const auto header = split_csv_line(line);
  if (header.empty()) throw DataError("design CSV header is empty");
  const bool has_y = header.back() == "y";
  const std::size_t m = header.size() - (has_y ? 1 : 0);
  for (std::size_t j = 0; j < m; ++j) {
    if (header[j] != "x" + std::to_string(j + 1)) {
      throw DataError("unexpected design CSV column '" + header[j] + "'");
    }
  }
  std::vector<double> xs;
  std::vector<double> ys;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw DataError("design CSV row " + std::to_string(rows + 1) + " has " +
                      std::to_string(fields.size()) + " fields, expected " +
                      std::to_string(header.size()));
    }
    for (std::size_t j = 0; j < m; ++j) xs.push_back(parse_double(fields[j]));
    if (has_y) ys.push_back(parse_double(fields[m]));
    ++rows;
  }
  ExperimentalDesign d;
  d.points.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      d.points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = xs[i * m + j];
    }
  }
  if (has_y) d.responses = Eigen::Map<Vector>(ys.data(), static_cast<Eigen::Index>(rows));
  return d;
}

ExperimentalDesign read_design_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return read_design_csv(in);
}

}  // namespace pckrig
