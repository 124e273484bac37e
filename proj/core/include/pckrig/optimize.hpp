// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>

#include "pckrig/doe.hpp"

namespace pckrig {

struct BfgsOptions {
  int max_iterations = 200;
  /// Stop when the projected gradient inf-norm falls below this.
  double gradient_tol = 1e-6;
  /// Stop when the objective decrease is below f_tol * (1 + |f|).
  double f_tol = 1e-10;
  /// Central-difference step.
  double fd_step = 1e-4;
  /// Largest allowed step inf-norm per iteration.
  double max_step = 2.0;
};

struct BfgsResult {
  Vector x;
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
  double gradient_norm = 0.0;
  bool converged = false;
};

using Objective = std::function<double(const Vector&)>;

/// Projected BFGS on the box [lower, upper] with finite-difference gradients.
/// Non-finite objective values are treated as infeasible and rejected by the
/// line search.
BfgsResult minimize_box(const Objective& f, const Vector& x0, const Vector& lower,
                        const Vector& upper, const BfgsOptions& options = {});

}  // namespace pckrig
