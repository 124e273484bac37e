// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "pckrig/kriging.hpp"
#include "pckrig/pce.hpp"

namespace pckrig {

enum class PckVariant { SPC, OPC };

std::string to_string(PckVariant variant);

struct PckOptions {
  PceOptions pce{};
  KernelKind kernel = KernelKind::Matern52;
  double nu = 2.5;
  CalibrationOptions calibration{};
  /// SPC: use every LAR-ranked polynomial instead of the LOO-optimal prefix.
  bool spc_full_ranking = false;
  /// OPC: largest trend size tried (also bounded by the ranking and N - 2).
  std::size_t opc_cap = 128;
  /// OPC: seed each prefix calibration with the optimum of the previous one.
  bool warm_start = true;
  /// OPC with warm start: space-filling starts added to the warm start.
  int warm_extra_starts = 1;
  /// OPC: called with (Q, model) after every successful prefix calibration.
  std::function<void(std::size_t, const KrigingModel&)> on_prefix;
};

struct PckModel {
  PckVariant variant = PckVariant::SPC;
  KrigingModel inner;
  LarPath lar_path;
  IndexSet candidates;
  int degree = 0;
  /// OPC: relative Kriging LOO (LOO / Var Y) of prefix Q at index Q-1; NaN if it failed.
  std::vector<double> loo_curve;
  std::size_t selected_size = 0;

  /// Relative Kriging LOO of the returned model.
  double relative_loo() const;

  KrigingPrediction predict(const Matrix& points) const { return inner.predict(points); }
  Vector predict_mean(const Matrix& points) const { return inner.predict_mean(points); }
};

/// Sparse PCE selects the trend, then a single Kriging calibration.
PckModel fit_spc(const ExperimentalDesign& design, const InputModel& input,
                 const PckOptions& options = {});

/// Trend grown one polynomial at a time in LAR order; the prefix with the
/// smallest Kriging LOO is retained.
PckModel fit_opc(const ExperimentalDesign& design, const InputModel& input,
                 const PckOptions& options = {});

KrigingPrediction predict_pck(const PckModel& model, const Matrix& points);

}  // namespace pckrig
