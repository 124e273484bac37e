// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pckrig/pck.hpp"
#include "pckrig/serialize.hpp"
#include "pckrig/stats.hpp"
#include "pckrig/testfunctions.hpp"

namespace pckrig::cli {

struct CampaignConfig {
  std::vector<std::string> functions{"ishigami"};
  std::vector<Method> methods{Method::OK, Method::PCE, Method::SPC, Method::OPC};
  std::vector<std::size_t> design_sizes{32, 64, 128};
  std::size_t replications = 50;
  std::size_t validation_n = 100000;
  std::uint64_t base_seed = 1;

  PceOptions pce{};
  KernelKind kernel = KernelKind::Matern52;
  double nu = 2.5;
  CalibrationObjective objective = CalibrationObjective::ML;
  int n_starts = 8;
  double lower_factor = 1e-2;
  double upper_factor = 10.0;
  bool isotropic = false;
  std::vector<double> nugget_ladder = default_nugget_ladder();

  std::size_t opc_cap = 128;
  bool opc_warm_start = true;
  int opc_extra_starts = 1;
  bool spc_full_ranking = false;

  std::optional<std::filesystem::path> ohagan_file;
  std::filesystem::path output_dir = "results";

  /// Every field, defaults included.
  Json to_json() const;
  /// Missing fields keep their defaults; unknown fields are rejected. Throws ConfigError.
  static CampaignConfig from_json(const Json& j);
  static CampaignConfig load(const std::filesystem::path& path);
  void validate() const;

  CalibrationOptions calibration(std::uint64_t seed) const;
  PckOptions pck(std::uint64_t seed) const;
};

/// Seed of the design shared by all methods of one (function, N, replication).
std::uint64_t design_seed(std::uint64_t base, const std::string& function, std::size_t n,
                          std::size_t replication);
/// Seed of the hyperparameter search of one method inside a cell.
std::uint64_t method_seed(std::uint64_t base, const std::string& function, Method method,
                          std::size_t n, std::size_t replication);
std::uint64_t validation_seed(std::uint64_t base, const std::string& function);

struct FittedSurrogate {
  SavedModel model;
  std::size_t p_star = 0;
};

FittedSurrogate fit_method(Method method, const ExperimentalDesign& design,
                           const InputModel& input, const CampaignConfig& config,
                           std::uint64_t seed);

struct BenchRunOptions {
  /// Write 0 into wall_ms so that repeated runs give byte-identical files.
  bool record_timing = true;
  /// 0: PCKRIG_THREADS or the hardware concurrency.
  unsigned threads = 0;
  bool quiet = false;
};

struct BenchRunStats {
  std::size_t computed = 0;
  std::size_t skipped = 0;
  std::size_t failed = 0;
  std::vector<std::string> disabled_functions;
};

/// Runs every missing cell, then rewrites results.csv sorted and deduplicated
/// and writes summary.json and boxplot.tsv next to it.
BenchRunStats run_campaign(const CampaignConfig& config, const BenchRunOptions& options = {});

/// Thread count from PCKRIG_THREADS, else the hardware concurrency (>= 1).
unsigned default_thread_count();

struct CellSummary {
  std::string function;
  Method method;
  std::size_t n_design;
  std::size_t failures;
  std::optional<BoxplotSummary> box;
};

std::vector<CellSummary> summarize_results(const std::vector<BenchResult>& results);
Json summaries_to_json(const std::vector<CellSummary>& cells);
void write_boxplot_tsv(std::ostream& out, const std::vector<CellSummary>& cells);

}  // namespace pckrig::cli
