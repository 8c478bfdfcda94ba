#pragma once

#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "curvlab/branching.hpp"
#include "curvlab/report.hpp"
#include "curvlab/space1d.hpp"
#include "curvlab/tripod.hpp"

namespace curvlab {

using Json = nlohmann::ordered_json;

class SchemaError : public std::runtime_error {
 public:
  SchemaError(const std::string& field, const std::string& what)
      : std::runtime_error("schema error at '" + field + "': " + what), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

namespace detail {

inline double number_at(const Json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) throw SchemaError(path + key, "missing");
  if (!j.at(key).is_number()) throw SchemaError(path + key, "expected a number");
  const double v = j.at(key).get<double>();
  if (!std::isfinite(v)) throw SchemaError(path + key, "must be finite");
  return v;
}

inline std::vector<double> numbers_at(const Json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) throw SchemaError(path + key, "missing");
  const Json& arr = j.at(key);
  if (!arr.is_array()) throw SchemaError(path + key, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number()) throw SchemaError(path + key + "[" + std::to_string(i) + "]", "expected a number");
    out.push_back(arr[i].get<double>());
  }
  return out;
}

// JSON has no infinity; encode it as null.
inline Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace detail

/// {"topology", "param", "window", "weight": {"coords", "f"}, "grid_step"}
inline Space1D space_from_json(const Json& j) {
  if (!j.is_object()) throw SchemaError("$", "expected an object");
  if (!j.contains("topology") || !j.at("topology").is_string()) throw SchemaError("topology", "missing or not a string");
  const std::string topo = j.at("topology").get<std::string>();
  const double grid_step = j.contains("grid_step") ? detail::number_at(j, "grid_step", "") : 1e-3;
  if (!(grid_step > 0.0)) throw SchemaError("grid_step", "must be > 0");
  if (!j.contains("weight") || !j.at("weight").is_object()) throw SchemaError("weight", "missing or not an object");
  const Json& w = j.at("weight");
  auto coords = detail::numbers_at(w, "coords", "weight.");
  auto fs = detail::numbers_at(w, "f", "weight.");
  if (coords.size() != fs.size()) throw SchemaError("weight.f", "length differs from weight.coords");
  std::optional<std::pair<double, double>> window;
  Topology1D topology;
  if (topo == "line" || topo == "halfline") {
    const auto win = detail::numbers_at(j, "window", "");
    if (win.size() != 2 || !(win[1] > win[0])) throw SchemaError("window", "expected [a, b] with a < b");
    window = std::make_pair(win[0], win[1]);
    topology = topo == "line" ? Topology1D{Line{}} : Topology1D{HalfLine{}};
  } else if (topo == "interval") {
    const double l = detail::number_at(j, "param", "");
    if (!(l > 0.0)) throw SchemaError("param", "interval length must be > 0");
    topology = Interval{l};
  } else if (topo == "circle") {
    const double r = detail::number_at(j, "param", "");
    if (!(r > 0.0)) throw SchemaError("param", "circle radius must be > 0");
    topology = Circle{r};
  } else {
    throw SchemaError("topology", "expected line|halfline|interval|circle, got '" + topo + "'");
  }
  try {
    return Space1D(topology, WeightFn(std::move(coords), std::move(fs)), grid_step, window);
  } catch (const std::invalid_argument& e) {
    throw SchemaError("weight", e.what());
  }
}

inline Json space_to_json(const Space1D& space) {
  Json j;
  j["topology"] = topology_name(space.topology());
  if (const auto* iv = std::get_if<Interval>(&space.topology())) j["param"] = iv->length;
  if (const auto* c = std::get_if<Circle>(&space.topology())) j["param"] = c->radius;
  if (space.has_window()) j["window"] = {space.lo(), space.hi()};
  j["weight"] = {{"coords", space.weight().coords()}, {"f", space.weight().values()}};
  j["grid_step"] = space.grid_step();
  return j;
}

struct ScenarioInput {
  BranchingScenario scenario;
  std::array<double, 3> edge_lengths{1.0, 1.0, 1.0};
};

/// {a, b, eps, eta, beta, N, edge_lengths}
inline ScenarioInput scenario_from_json(const Json& j) {
  if (!j.is_object()) throw SchemaError("$", "expected an object");
  ScenarioInput in;
  auto& sc = in.scenario;
  sc.a = detail::number_at(j, "a", "");
  sc.b = detail::number_at(j, "b", "");
  sc.eps = detail::number_at(j, "eps", "");
  sc.eta = detail::number_at(j, "eta", "");
  sc.beta = j.contains("beta") ? detail::number_at(j, "beta", "") : 1.0;
  sc.N = j.contains("N") ? detail::number_at(j, "N", "") : 2.0;
  if (j.contains("edge_lengths")) {
    const auto e = detail::numbers_at(j, "edge_lengths", "");
    if (e.size() != 3) throw SchemaError("edge_lengths", "expected three lengths");
    for (int i = 0; i < 3; ++i) {
      if (!(e[i] > 0.0)) throw SchemaError("edge_lengths[" + std::to_string(i) + "]", "must be > 0");
      in.edge_lengths[static_cast<std::size_t>(i)] = e[i];
    }
  }
  return in;
}

inline Json witness_to_json(const Witness& w) {
  Json j;
  Json pts = Json::array();
  for (double p : w.points) pts.push_back(detail::finite_or_null(p));
  j["points"] = pts;
  j["t"] = detail::finite_or_null(w.t);
  j["index"] = w.index ? Json(*w.index) : Json(nullptr);
  j["note"] = w.note;
  return j;
}

/// {kind, K, N, max_violation, witness, tol, grid_step, seed, ...}
inline Json report_to_json(const CurvatureReport& r) {
  Json j;
  j["kind"] = r.kind;
  j["K"] = r.K;
  j["N"] = detail::finite_or_null(r.N);
  j["max_violation"] = detail::finite_or_null(r.max_violation);
  j["witness"] = witness_to_json(r.witness);
  j["tol"] = r.tolerance;
  j["grid_step"] = r.grid_step;
  j["seed"] = r.seed;
  j["passed"] = r.passed;
  j["evaluations"] = r.evaluations;
  j["conjugate_skipped"] = r.conjugate_skipped;
  Json extras = Json::object();
  for (const auto& [k, v] : r.extras) extras[k] = detail::finite_or_null(v);
  j["extras"] = extras;
  return j;
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError(path, "cannot open input file");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(path, std::string("JSON parse error: ") + e.what());
  }
}

}  // namespace curvlab
