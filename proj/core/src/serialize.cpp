// SPDX-License-Identifier: Apache-2.0
#include "pckrig/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "pckrig/errors.hpp"
#include "pckrig/rng.hpp"

namespace pckrig {

namespace {

constexpr int kFormatVersion = 1;

Json vector_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(to_json(v(i)));
  return a;
}

Vector vector_from(const Json& j) {
  if (!j.is_array()) throw DataError("expected a numeric array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = double_from_json(j[i]);
  return v;
}

Json matrix_json(const Matrix& m) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(vector_json(m.row(i).transpose()));
  return a;
}

Matrix matrix_from(const Json& j, Eigen::Index cols) {
  if (!j.is_array()) throw DataError("expected an array of rows");
  Matrix m(static_cast<Eigen::Index>(j.size()), cols);
  for (std::size_t i = 0; i < j.size(); ++i) {
    const Vector r = vector_from(j[i]);
    if (r.size() != cols) throw DataError("row " + std::to_string(i) + " has the wrong length");
    m.row(static_cast<Eigen::Index>(i)) = r.transpose();
  }
  return m;
}

const Json& field(const Json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) {
    throw DataError(std::string("model file is missing field '") + name + "'");
  }
  return j.at(name);
}

Json design_json(const ExperimentalDesign& d) {
  return {{"points", matrix_json(d.points)}, {"responses", vector_json(d.y())}};
}

ExperimentalDesign design_from(const Json& j, std::size_t dim) {
  ExperimentalDesign d;
  d.points = matrix_from(field(j, "points"), static_cast<Eigen::Index>(dim));
  d.responses = vector_from(field(j, "responses"));
  if (d.responses->size() != d.points.rows()) throw DataError("design response count mismatch");
  return d;
}

Json kriging_json(const KrigingModel& m) {
  Json trend = {{"type", m.trend().is_constant() ? "constant" : "polynomials"}};
  if (!m.trend().is_constant()) trend["index_set"] = to_json(m.trend().basis()->index_set());
  return {{"kernel", to_json(m.kernel())}, {"nugget", to_json(m.nugget())},
          {"beta", vector_json(m.beta())}, {"sigma2", to_json(m.sigma2())},
          {"trend", trend},                {"design", design_json(m.design())}};
}

KrigingModel kriging_from(const Json& j, const InputModel& input) {
  const Json& t = field(j, "trend");
  const std::string type = field(t, "type").get<std::string>();
  TrendBasis trend = TrendBasis::constant();
  if (type == "polynomials") {
    trend = TrendBasis::polynomials(PolyBasis(input, index_set_from_json(field(t, "index_set"))));
  } else if (type != "constant") {
    throw DataError("unknown trend type '" + type + "'");
  }
  auto model = KrigingModel::restore(std::move(trend), kernel_from_json(field(j, "kernel")),
                                     design_from(field(j, "design"), input.dim()),
                                     double_from_json(field(j, "nugget")));
  return model;
}

}  // namespace

Json to_json(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double double_from_json(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw DataError("expected a number, got " + j.dump());
}

Json to_json(const InputModel& input) {
  Json a = Json::array();
  for (const auto& m : input.marginals()) {
    if (m.kind() == MarginalDistribution::Kind::Uniform) {
      a.push_back({{"kind", "uniform"}, {"lower", m.first()}, {"upper", m.second()}});
    } else {
      a.push_back({{"kind", "gaussian"}, {"mean", m.first()}, {"stddev", m.second()}});
    }
  }
  return a;
}

InputModel input_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) throw DataError("input model must be a non-empty array");
  std::vector<MarginalDistribution> ms;
  for (const auto& e : j) {
    const auto kind = field(e, "kind").get<std::string>();
    try {
      if (kind == "uniform") {
        ms.push_back(MarginalDistribution::uniform(double_from_json(field(e, "lower")),
                                                   double_from_json(field(e, "upper"))));
      } else if (kind == "gaussian") {
        ms.push_back(MarginalDistribution::gaussian(double_from_json(field(e, "mean")),
                                                    double_from_json(field(e, "stddev"))));
      } else {
        throw DataError("unknown marginal kind '" + kind + "'");
      }
    } catch (const DomainError& e2) {
      throw DataError(e2.what());
    }
  }
  return InputModel(std::move(ms));
}

Json to_json(const IndexSet& set) {
  Json idx = Json::array();
  for (const auto& a : set) idx.push_back(a);
  return {{"dim", set.dim()}, {"degree", set.degree()}, {"q", set.q()},
          {"ordering", "total_degree_then_lex"}, {"indices", idx}};
}

IndexSet index_set_from_json(const Json& j) {
  try {
    return IndexSet(field(j, "dim").get<std::size_t>(), field(j, "degree").get<int>(),
                    double_from_json(field(j, "q")),
                    field(j, "indices").get<std::vector<MultiIndex>>());
  } catch (const DomainError& e) {
    throw DataError(e.what());
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed index set: ") + e.what());
  }
}

Json to_json(const Kernel& kernel) {
  return {{"kind", to_string(kernel.kind)},
          {"lengthscales", vector_json(kernel.lengthscales)},
          {"nu", kernel.nu}};
}

Kernel kernel_from_json(const Json& j) {
  try {
    return Kernel(kernel_kind_from_string(field(j, "kind").get<std::string>()),
                  vector_from(field(j, "lengthscales")), double_from_json(field(j, "nu")));
  } catch (const ConfigError& e) {
    throw DataError(e.what());
  } catch (const DomainError& e) {
    throw DataError(e.what());
  }
}

Json to_json(const LarPath& path) {
  Json ranked = Json::array();
  for (const auto& a : path.ranked_indices) ranked.push_back(a);
  Json loo = Json::array();
  for (double v : path.loo) loo.push_back(to_json(v));
  return {{"ranked_indices", ranked}, {"loo", loo}, {"best_size", path.best_size}};
}

LarPath lar_path_from_json(const Json& j) {
  LarPath p;
  p.ranked_indices = field(j, "ranked_indices").get<std::vector<MultiIndex>>();
  for (const auto& v : field(j, "loo")) p.loo.push_back(double_from_json(v));
  p.best_size = field(j, "best_size").get<std::size_t>();
  return p;
}

const InputModel& SavedModel::input() const {
  if (input_model) return *input_model;
  if (pce) return pce->basis.input();
  if (pck) return pck->inner.trend().basis()->input();
  if (kriging && kriging->trend().basis()) return kriging->trend().basis()->input();
  throw DataError("saved model carries no input model");
}

KrigingPrediction SavedModel::predict(const Matrix& points) const {
  if (pce) {
    return {pce->predict(points),
            Vector::Constant(points.rows(), std::numeric_limits<double>::quiet_NaN())};
  }
  if (pck) return pck->predict(points);
  if (kriging) return kriging->predict(points);
  throw DataError("empty saved model");
}

Json to_json(const SavedModel& model) {
  Json j = {{"format", "pckrig-model"}, {"version", kFormatVersion}, {"type", model.type},
            {"seed", model.seed},       {"config_hash", model.config_hash}};
  j["input"] = to_json(model.input());
  if (model.pce) {
    const auto& m = *model.pce;
    j["index_set"] = to_json(m.basis.index_set());
    j["families"] = Json::array();
    for (auto f : m.basis.families()) j["families"].push_back(f == PolyFamily::Legendre ? "legendre" : "hermite");
    j["coeffs"] = vector_json(m.coeffs);
    j["loo_error"] = to_json(m.loo_error);
    j["emp_error"] = to_json(m.emp_error);
    j["response_variance"] = to_json(m.response_variance);
  } else if (model.pck) {
    const auto& m = *model.pck;
    j["variant"] = to_string(m.variant);
    j["kriging"] = kriging_json(m.inner);
    j["candidates"] = to_json(m.candidates);
    j["degree"] = m.degree;
    j["lar_path"] = to_json(m.lar_path);
    j["loo_curve"] = Json::array();
    for (double v : m.loo_curve) j["loo_curve"].push_back(to_json(v));
    j["selected_size"] = m.selected_size;
  } else if (model.kriging) {
    j["kriging"] = kriging_json(*model.kriging);
  } else {
    throw DataError("empty saved model");
  }
  return j;
}

SavedModel saved_model_from_json(const Json& j) {
  try {
    if (field(j, "format").get<std::string>() != "pckrig-model") throw DataError("not a pckrig model file");
    if (field(j, "version").get<int>() != kFormatVersion) throw DataError("unsupported model file version");
    SavedModel out;
    out.type = field(j, "type").get<std::string>();
    out.seed = field(j, "seed").get<std::uint64_t>();
    out.config_hash = field(j, "config_hash").get<std::string>();
    out.input_model = input_from_json(field(j, "input"));
    const InputModel& input = *out.input_model;
    if (out.type == "pce") {
      PolyBasis basis(input, index_set_from_json(field(j, "index_set")));
      Vector coeffs = vector_from(field(j, "coeffs"));
      if (static_cast<std::size_t>(coeffs.size()) != basis.size()) {
        throw DataError("coefficient count does not match the index set");
      }
      out.pce = PceModel{std::move(basis), std::move(coeffs), double_from_json(field(j, "loo_error")),
                         double_from_json(field(j, "emp_error")),
                         double_from_json(field(j, "response_variance"))};
    } else if (out.type == "spc" || out.type == "opc") {
      std::vector<double> curve;
      for (const auto& v : field(j, "loo_curve")) curve.push_back(double_from_json(v));
      out.pck = PckModel{out.type == "spc" ? PckVariant::SPC : PckVariant::OPC,
                         kriging_from(field(j, "kriging"), input),
                         lar_path_from_json(field(j, "lar_path")),
                         index_set_from_json(field(j, "candidates")),
                         field(j, "degree").get<int>(),
                         std::move(curve),
                         field(j, "selected_size").get<std::size_t>()};
    } else if (out.type == "kriging") {
      out.kriging = kriging_from(field(j, "kriging"), input);
    } else {
      throw DataError("unknown model type '" + out.type + "'");
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed model file: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const SavedModel& model) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << to_json(model).dump(2) << '\n';
}

SavedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file " + path.string());
  Json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("model file " + path.string() + " is not valid JSON: " + e.what());
  }
  return saved_model_from_json(j);
}

std::string config_hash(const Json& config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(config.dump())));
  return buf;
}

}  // namespace pckrig
