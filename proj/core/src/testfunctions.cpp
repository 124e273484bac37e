// SPDX-License-Identifier: Apache-2.0
#include "pckrig/testfunctions.hpp"

#include <array>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>

#include "pckrig/errors.hpp"

#ifndef PCKRIG_DATA_DIR
#define PCKRIG_DATA_DIR "data"
#endif

namespace pckrig {

namespace {

void require_dim(std::span<const double> x, std::size_t m, const char* name) {
  if (x.size() != m) {
    throw DataError(std::string(name) + " expects " + std::to_string(m) + " inputs, got " +
                    std::to_string(x.size()));
  }
}

constexpr std::array<double, 8> kSobolC{1, 2, 5, 10, 20, 50, 100, 500};

}  // namespace

std::string to_string(BenchmarkId id) {
  switch (id) {
    case BenchmarkId::Ishigami: return "ishigami";
    case BenchmarkId::Sobol8: return "sobol";
    case BenchmarkId::Rosenbrock: return "rosenbrock";
    case BenchmarkId::Morris20: return "morris";
    case BenchmarkId::Rastrigin2: return "rastrigin";
    case BenchmarkId::OHagan15: return "ohagan";
  }
  return "unknown";
}

std::vector<BenchmarkId> all_benchmarks() {
  return {BenchmarkId::Ishigami, BenchmarkId::Sobol8,     BenchmarkId::Rosenbrock,
          BenchmarkId::Morris20, BenchmarkId::Rastrigin2, BenchmarkId::OHagan15};
}

BenchmarkId benchmark_from_string(const std::string& name) {
  for (auto id : all_benchmarks()) {
    if (to_string(id) == name) return id;
  }
  throw ConfigError("unknown benchmark function '" + name + "'");
}

double eval_ishigami(std::span<const double> x) {
  require_dim(x, 3, "ishigami");
  const double s2 = std::sin(x[1]);
  const double x3 = x[2] * x[2];
  return std::sin(x[0]) * (1.0 + 0.1 * x3 * x3) + 7.0 * s2 * s2;
}

double eval_sobol(std::span<const double> x) {
  require_dim(x, 8, "sobol");
  double v = 1.0;
  for (std::size_t i = 0; i < 8; ++i) {
    v *= (std::abs(4.0 * x[i] - 2.0) + kSobolC[i]) / (1.0 + kSobolC[i]);
  }
  return v;
}

double eval_rosenbrock(std::span<const double> x) {
  require_dim(x, 2, "rosenbrock");
  const double a = x[1] - x[0] * x[0];
  const double b = 1.0 - x[0];
  return 100.0 * a * a + b * b;
}

double eval_morris(std::span<const double> x) {
  require_dim(x, 20, "morris");
  std::array<double, 20> w{};
  for (std::size_t k = 0; k < 20; ++k) {
    const std::size_t i = k + 1;
    if (i == 3 || i == 5 || i == 7) {
      w[k] = 2.0 * (1.1 * x[k] / (x[k] + 0.1) - 0.5);
    } else {
      w[k] = 2.0 * (x[k] - 0.5);
    }
  }
  const auto sign = [](std::size_t e) { return e % 2 == 0 ? 1.0 : -1.0; };
  double v = 0.0;
  for (std::size_t i = 1; i <= 20; ++i) {
    v += (i <= 10 ? 20.0 : sign(i)) * w[i - 1];
  }
  for (std::size_t i = 1; i <= 20; ++i) {
    for (std::size_t j = i + 1; j <= 20; ++j) {
      v += (j <= 6 ? -15.0 : sign(i + j)) * w[i - 1] * w[j - 1];
    }
  }
  // Third-order coefficients vanish outside the first five inputs.
  for (std::size_t i = 1; i <= 5; ++i) {
    for (std::size_t j = i + 1; j <= 5; ++j) {
      for (std::size_t l = j + 1; l <= 5; ++l) v -= 10.0 * w[i - 1] * w[j - 1] * w[l - 1];
    }
  }
  return v + 5.0 * w[0] * w[1] * w[2] * w[3];
}

double eval_rastrigin(std::span<const double> x) {
  require_dim(x, 2, "rastrigin");
  double v = 10.0;
  for (double xi : x) v -= xi * xi - 5.0 * std::cos(2.0 * std::numbers::pi * xi);
  return v;
}

OHaganParameters OHaganParameters::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open O'Hagan parameter file " + path.string());
  std::vector<double> values;
  std::string token;
  while (in >> token) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(token, &used));
      if (used != token.size()) throw std::invalid_argument(token);
    } catch (const std::exception&) {
      throw ConfigError("malformed value '" + token + "' in " + path.string());
    }
  }
  constexpr std::size_t kExpected = 3 * 15 + 15 * 15;
  if (values.size() != kExpected) {
    throw ConfigError("O'Hagan parameter file " + path.string() + " holds " +
                      std::to_string(values.size()) + " values, expected " +
                      std::to_string(kExpected));
  }
  OHaganParameters p;
  p.a1 = Eigen::Map<const Vector>(values.data(), 15);
  p.a2 = Eigen::Map<const Vector>(values.data() + 15, 15);
  p.a3 = Eigen::Map<const Vector>(values.data() + 30, 15);
  p.m = Eigen::Map<const Eigen::Matrix<double, 15, 15, Eigen::RowMajor>>(values.data() + 45);
  return p;
}

std::filesystem::path default_ohagan_path() {
  if (const char* dir = std::getenv("PCKRIG_DATA_DIR"); dir && *dir) {
    return std::filesystem::path(dir) / "oakley_ohagan_2004.txt";
  }
  return std::filesystem::path(PCKRIG_DATA_DIR) / "oakley_ohagan_2004.txt";
}

double eval_ohagan(std::span<const double> x, const OHaganParameters& params) {
  require_dim(x, 15, "ohagan");
  const Eigen::Map<const Vector> v(x.data(), 15);
  return params.a1.dot(v) + params.a2.dot(v.array().sin().matrix()) +
         params.a3.dot(v.array().cos().matrix()) + v.dot(params.m * v);
}

Vector BenchmarkFunction::eval(const Matrix& points) const {
  if (static_cast<std::size_t>(points.cols()) != input.dim()) {
    throw DataError(name() + ": points have " + std::to_string(points.cols()) +
                    " columns, expected " + std::to_string(input.dim()));
  }
  Vector y(points.rows());
  std::vector<double> row(static_cast<std::size_t>(points.cols()));
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (Eigen::Index j = 0; j < points.cols(); ++j) row[static_cast<std::size_t>(j)] = points(i, j);
    y(i) = evaluator(row);
  }
  return y;
}

ExperimentalDesign BenchmarkFunction::evaluate(ExperimentalDesign design) const {
  design.responses = eval(design.points);
  return design;
}

BenchmarkFunction make_benchmark(BenchmarkId id,
                                 const std::optional<std::filesystem::path>& ohagan_file) {
  using MD = MarginalDistribution;
  constexpr double pi = std::numbers::pi;
  switch (id) {
    case BenchmarkId::Ishigami:
      return {id, InputModel::iid(3, MD::uniform(-pi, pi)), eval_ishigami};
    case BenchmarkId::Sobol8:
      return {id, InputModel::iid(8, MD::uniform(0.0, 1.0)), eval_sobol};
    case BenchmarkId::Rosenbrock:
      return {id, InputModel::iid(2, MD::uniform(-2.0, 2.0)), eval_rosenbrock};
    case BenchmarkId::Morris20:
      return {id, InputModel::iid(20, MD::uniform(0.0, 1.0)), eval_morris};
    case BenchmarkId::Rastrigin2:
      return {id, InputModel::iid(2, MD::gaussian(0.0, 1.0)), eval_rastrigin};
    case BenchmarkId::OHagan15: {
      auto params = std::make_shared<const OHaganParameters>(
          OHaganParameters::load(ohagan_file.value_or(default_ohagan_path())));
      return {id, InputModel::iid(15, MD::gaussian(0.0, 1.0)),
              [params](std::span<const double> x) { return eval_ohagan(x, *params); }};
    }
  }
  throw ConfigError("unknown benchmark function");
}

double relative_generalization_error(const Vector& predicted, const Vector& exact) {
  if (predicted.size() != exact.size()) {
    throw DataError("generalization error: prediction and validation sizes differ");
  }
  if (exact.size() < 2) throw DomainError("generalization error needs at least 2 points");
  const double tss = (exact.array() - exact.mean()).square().sum();
  if (!(tss > 0.0)) throw DomainError("generalization error undefined for constant validation responses");
  return (exact - predicted).squaredNorm() / tss;
}

}  // namespace pckrig
