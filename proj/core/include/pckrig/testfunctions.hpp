// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pckrig/doe.hpp"

namespace pckrig {

enum class BenchmarkId { Ishigami, Sobol8, Rosenbrock, Morris20, Rastrigin2, OHagan15 };

std::string to_string(BenchmarkId id);
BenchmarkId benchmark_from_string(const std::string& name);
std::vector<BenchmarkId> all_benchmarks();

/// sin x1 + 7 sin^2 x2 + 0.1 x3^4 sin x1
double eval_ishigami(std::span<const double> x);
/// prod (|4 x_i - 2| + c_i) / (1 + c_i), c = (1,2,5,10,20,50,100,500)
double eval_sobol(std::span<const double> x);
/// 100 (x2 - x1^2)^2 + (1 - x1)^2
double eval_rosenbrock(std::span<const double> x);
/// 20-dimensional Morris screening function.
double eval_morris(std::span<const double> x);
/// 10 - sum (x_i^2 - 5 cos(2 pi x_i))
double eval_rastrigin(std::span<const double> x);

/// Coefficients of the 15-dimensional Oakley-O'Hagan function.
struct OHaganParameters {
  Vector a1, a2, a3;
  Matrix m;

  /// Whitespace-separated: 3 rows of 15 values, then the 15 x 15 matrix.
  /// Throws ConfigError when the file is missing or malformed.
  static OHaganParameters load(const std::filesystem::path& path);
};

/// File used when no explicit path is given: $PCKRIG_DATA_DIR or the shipped data directory.
std::filesystem::path default_ohagan_path();

/// a1^T x + a2^T sin x + a3^T cos x + x^T M x
double eval_ohagan(std::span<const double> x, const OHaganParameters& params);

/// Benchmark evaluator together with its input distribution.
struct BenchmarkFunction {
  BenchmarkId id;
  InputModel input;
  std::function<double(std::span<const double>)> evaluator;

  std::string name() const { return to_string(id); }
  double operator()(std::span<const double> x) const { return evaluator(x); }
  /// Row-wise evaluation.
  Vector eval(const Matrix& points) const;
  /// Returns a copy of `design` with responses attached.
  ExperimentalDesign evaluate(ExperimentalDesign design) const;
};

/// Uniform(-pi,pi)^3, Uniform(0,1)^8, Uniform(-2,2)^2, Uniform(0,1)^20,
/// N(0,1)^2 and N(0,1)^15 respectively.
BenchmarkFunction make_benchmark(BenchmarkId id,
                                 const std::optional<std::filesystem::path>& ohagan_file = {});

/// sum (y - yhat)^2 / sum (y - mean y)^2 over a validation sample.
double relative_generalization_error(const Vector& predicted, const Vector& exact);

}  // namespace pckrig
