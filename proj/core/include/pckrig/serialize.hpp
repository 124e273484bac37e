// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "pckrig/kriging.hpp"
#include "pckrig/pce.hpp"
#include "pckrig/pck.hpp"

namespace pckrig {

using Json = nlohmann::json;

// Non-finite doubles are written as the strings "inf", "-inf" and "nan".
Json to_json(double v);
double double_from_json(const Json& j);

Json to_json(const InputModel& input);
InputModel input_from_json(const Json& j);

Json to_json(const IndexSet& set);
IndexSet index_set_from_json(const Json& j);

Json to_json(const Kernel& kernel);
Kernel kernel_from_json(const Json& j);

Json to_json(const LarPath& path);
LarPath lar_path_from_json(const Json& j);

/// Fitted surrogate of any supported type, as stored on disk.
struct SavedModel {
  /// "pce", "kriging", "spc" or "opc".
  std::string type;
  std::optional<PceModel> pce;
  std::optional<KrigingModel> kriging;
  std::optional<PckModel> pck;
  /// Input distribution; required for ordinary Kriging, derived otherwise.
  std::optional<InputModel> input_model;
  std::uint64_t seed = 0;
  std::string config_hash;

  const InputModel& input() const;
  std::size_t dim() const { return input().dim(); }
  /// Mean and variance; the variance of a PCE is reported as NaN.
  KrigingPrediction predict(const Matrix& points) const;
};

Json to_json(const SavedModel& model);
/// Throws DataError on schema violations.
SavedModel saved_model_from_json(const Json& j);

void save_model(const std::filesystem::path& path, const SavedModel& model);
SavedModel load_model(const std::filesystem::path& path);

/// 16 hex digits of FNV-1a over the compact dump.
std::string config_hash(const Json& config);

}  // namespace pckrig
