// SPDX-License-Identifier: Apache-2.0
#include "pckrig/pck.hpp"

#include <cmath>
#include <limits>

#include "pckrig/errors.hpp"
#include "pckrig/rng.hpp"

namespace pckrig {

namespace {

double response_variance(const Vector& y) {
  return (y.array() - y.mean()).square().sum() / static_cast<double>(y.size());
}

double relative(double loo, double var) { return var > 0.0 ? loo / var : loo; }

Vector log_lengthscales(const KrigingModel& m, bool isotropic) {
  const Vector l = m.kernel().lengthscales.array().log().matrix();
  return isotropic ? Vector::Constant(1, l(0)) : l;
}

IndexSet prefix_set(const IndexSet& candidates, const std::vector<MultiIndex>& ranked,
                    std::size_t q) {
  std::vector<std::size_t> pos;
  pos.reserve(q);
  for (std::size_t i = 0; i < q; ++i) pos.push_back(candidates.find(ranked[i]));
  return candidates.subset(pos);
}

void check_design(const ExperimentalDesign& design, const InputModel& input) {
  if (design.size() < 3) throw DomainError("PC-Kriging requires at least 3 design points");
  if (static_cast<std::size_t>(design.dim()) != input.dim()) {
    throw DataError("design dimension " + std::to_string(design.dim()) +
                    " does not match input dimension " + std::to_string(input.dim()));
  }
  if (!design.evaluated()) throw DataError("PC-Kriging requires evaluated responses");
}

}  // namespace

std::string to_string(PckVariant variant) { return variant == PckVariant::SPC ? "spc" : "opc"; }

double PckModel::relative_loo() const {
  return relative(inner.loo().error, response_variance(inner.design().y()));
}

PckModel fit_spc(const ExperimentalDesign& design, const InputModel& input,
                 const PckOptions& options) {
  check_design(design, input);
  auto pce = fit_pce_adaptive(design, input, options.pce);
  PolyBasis trend_basis = pce.model.basis;
  if (options.spc_full_ranking) {
    std::size_t q = pce.path.ranked_indices.size();
    q = std::min<std::size_t>(q, static_cast<std::size_t>(design.size()) - 2);
    trend_basis = trend_basis.with_index_set(prefix_set(pce.candidates, pce.path.ranked_indices, q));
  }
  // Keep N >= P + 2 for calibration.
  const auto limit = static_cast<std::size_t>(design.size()) - 2;
  if (trend_basis.size() > limit) {
    trend_basis = trend_basis.with_index_set(prefix_set(pce.candidates, pce.path.ranked_indices, limit));
  }
  const std::size_t p = trend_basis.size();
  auto model = calibrate(TrendBasis::polynomials(std::move(trend_basis)), options.kernel,
                         options.nu, design, options.calibration);
  return PckModel{PckVariant::SPC, std::move(model), std::move(pce.path),
                  std::move(pce.candidates), pce.degree, {}, p};
}

PckModel fit_opc(const ExperimentalDesign& design, const InputModel& input,
                 const PckOptions& options) {
  check_design(design, input);
  auto pce = fit_pce_adaptive(design, input, options.pce);
  const auto& ranked = pce.path.ranked_indices;
  const std::size_t q_max = std::min({ranked.size(), static_cast<std::size_t>(design.size()) - 2,
                                      options.opc_cap});
  const double var = response_variance(design.y());
  const double nan = std::numeric_limits<double>::quiet_NaN();

  std::vector<double> curve;
  std::optional<KrigingModel> best;
  double best_loo = std::numeric_limits<double>::infinity();
  std::size_t best_q = 0;
  std::optional<Vector> warm;
  const PolyBasis full(input, pce.candidates);
  for (std::size_t q = 1; q <= q_max; ++q) {
    CalibrationOptions cal = options.calibration;
    cal.seed = derive_seed(options.calibration.seed, "opc/" + std::to_string(q));
    if (options.warm_start && warm) {
      cal.extra_starts.push_back(*warm);
      cal.n_starts = options.warm_extra_starts;
    }
    try {
      auto model = calibrate(TrendBasis::polynomials(full.with_index_set(prefix_set(pce.candidates, ranked, q))),
                             options.kernel, options.nu, design, cal);
      const double loo = relative(model.loo().error, var);
      curve.push_back(std::isfinite(loo) ? loo : nan);
      warm = log_lengthscales(model, cal.isotropic);
      if (options.on_prefix) options.on_prefix(q, model);
      if (loo < best_loo) {
        best_loo = loo;
        best_q = q;
        best = std::move(model);
      }
    } catch (const NumericalError&) {
      curve.push_back(nan);
    }
  }
  if (!best) {
    throw ConditioningError("OPC-Kriging: every trend prefix failed to calibrate",
                            std::numeric_limits<double>::infinity());
  }
  return PckModel{PckVariant::OPC, std::move(*best), std::move(pce.path),
                  std::move(pce.candidates), pce.degree, std::move(curve), best_q};
}

KrigingPrediction predict_pck(const PckModel& model, const Matrix& points) {
  return model.predict(points);
}

}  // namespace pckrig
