// SPDX-License-Identifier: Apache-2.0
#include "pckrig/optimize.hpp"

#include <cmath>
#include <limits>

#include "pckrig/errors.hpp"

namespace pckrig {

namespace {

struct Counted {
  const Objective& f;
  int evaluations = 0;
  double operator()(const Vector& x) {
    ++evaluations;
    const double v = f(x);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  }
};

Vector gradient(Counted& f, const Vector& x, double fx, const Vector& lo, const Vector& hi,
                double h) {
  Vector g(x.size());
  Vector xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double up = std::min(x(i) + h, hi(i));
    const double dn = std::max(x(i) - h, lo(i));
    xp(i) = up;
    const double fu = up > x(i) ? f(xp) : fx;
    xp(i) = dn;
    const double fd = dn < x(i) ? f(xp) : fx;
    xp(i) = x(i);
    double gi;
    if (std::isfinite(fu) && std::isfinite(fd) && up > dn) {
      gi = (fu - fd) / (up - dn);
    } else if (std::isfinite(fu) && up > x(i)) {
      gi = (fu - fx) / (up - x(i));
    } else if (std::isfinite(fd) && dn < x(i)) {
      gi = (fx - fd) / (x(i) - dn);
    } else {
      gi = 0.0;
    }
    g(i) = gi;
  }
  return g;
}

// Variables pinned at a bound with the gradient pointing outward.
std::vector<bool> active_set(const Vector& x, const Vector& g, const Vector& lo,
                             const Vector& hi) {
  std::vector<bool> active(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    active[static_cast<std::size_t>(i)] =
        (x(i) <= lo(i) && g(i) > 0.0) || (x(i) >= hi(i) && g(i) < 0.0);
  }
  return active;
}

double projected_norm(const Vector& g, const std::vector<bool>& active) {
  double m = 0.0;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    if (!active[static_cast<std::size_t>(i)]) m = std::max(m, std::abs(g(i)));
  }
  return m;
}

}  // namespace

BfgsResult minimize_box(const Objective& objective, const Vector& x0, const Vector& lower,
                        const Vector& upper, const BfgsOptions& options) {
  const auto n = x0.size();
  if (lower.size() != n || upper.size() != n) throw DomainError("bound dimension mismatch");
  Counted f{objective};
  BfgsResult res;
  res.x = x0.cwiseMax(lower).cwiseMin(upper);
  res.value = f(res.x);
  if (!std::isfinite(res.value)) {
    res.evaluations = f.evaluations;
    res.gradient_norm = std::numeric_limits<double>::infinity();
    return res;
  }
  Vector g = gradient(f, res.x, res.value, lower, upper, options.fd_step);
  Matrix h = Matrix::Identity(n, n);

  for (res.iterations = 0; res.iterations < options.max_iterations; ++res.iterations) {
    const auto active = active_set(res.x, g, lower, upper);
    res.gradient_norm = projected_norm(g, active);
    if (res.gradient_norm < options.gradient_tol) {
      res.converged = true;
      break;
    }
    Vector d = -h * g;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (active[static_cast<std::size_t>(i)]) d(i) = 0.0;
    }
    if (d.dot(g) >= 0.0) {
      h.setIdentity();
      d = -g;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (active[static_cast<std::size_t>(i)]) d(i) = 0.0;
      }
    }
    const double dmax = d.lpNorm<Eigen::Infinity>();
    if (dmax > options.max_step) d *= options.max_step / dmax;

    double t = 1.0;
    Vector xn;
    double fn = std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      xn = (res.x + t * d).cwiseMax(lower).cwiseMin(upper);
      fn = f(xn);
      if (std::isfinite(fn) && fn <= res.value + 1e-4 * g.dot(xn - res.x)) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted || (xn - res.x).lpNorm<Eigen::Infinity>() == 0.0) {
      if (!h.isIdentity()) {
        h.setIdentity();
        continue;
      }
      res.converged = true;
      break;
    }
    const Vector gn = gradient(f, xn, fn, lower, upper, options.fd_step);
    const Vector s = xn - res.x;
    const Vector yv = gn - g;
    const double sy = s.dot(yv);
    if (sy > 1e-12 * s.norm() * yv.norm()) {
      const double rho = 1.0 / sy;
      const Matrix id = Matrix::Identity(n, n);
      h = (id - rho * s * yv.transpose()) * h * (id - rho * yv * s.transpose()) +
          rho * s * s.transpose();
    }
    const double decrease = res.value - fn;
    res.x = xn;
    res.value = fn;
    g = gn;
    if (decrease < options.f_tol * (1.0 + std::abs(fn))) {
      res.gradient_norm = projected_norm(g, active_set(res.x, g, lower, upper));
      res.converged = true;
      ++res.iterations;
      break;
    }
  }
  res.evaluations = f.evaluations;
  return res;
}

}  // namespace pckrig
