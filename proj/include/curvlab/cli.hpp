#pragma once

// Command-line front end. Exit codes: 0 pass or completed scan, 2 inequality
// failure (report still written), 1 usage, schema or scenario errors.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "curvlab/branching.hpp"
#include "curvlab/coefficients.hpp"
#include "curvlab/curvature.hpp"
#include "curvlab/geometry_scan.hpp"
#include "curvlab/json_io.hpp"
#include "curvlab/rng.hpp"
#include "curvlab/space1d.hpp"
#include "curvlab/transport1d.hpp"

namespace curvlab::cli {

inline constexpr const char* kToolVersion = "0.1.0";

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> names{
      "check-kn-convex", "verify-cde",   "verify-cd-infty", "circle-obstruction", "bg-scan",      "bg-boundary",
      "density-ratio",   "lipschitz",    "classify",        "tripod-shannon",     "tripod-renyi", "coefficients-table"};
  return names;
}

struct RunConfig {
  std::string command;
  std::string input;
  std::string output;  // empty: stdout
  std::uint64_t seed = 1;
  std::optional<double> tol;
  std::optional<double> grid_step;
  std::optional<double> K;
  std::optional<double> N;
  std::optional<double> x0;
  std::optional<double> radius;
  int power = 1;
  std::string format = "json";
};

enum ExitCode : int { kPass = 0, kUsage = 1, kFail = 2 };

struct Outcome {
  int code = kPass;
  std::string body;
};

namespace detail {

inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline Json load_input(const RunConfig& cfg) {
  if (cfg.input.empty()) throw SchemaError("--input", "an input file is required for " + cfg.command);
  return read_json_file(cfg.input);
}

inline Space1D load_space(const RunConfig& cfg, Json& raw) {
  raw = load_input(cfg);
  if (cfg.grid_step) {
    if (!raw.is_object()) throw SchemaError("$", "expected an object");
    raw["grid_step"] = *cfg.grid_step;
  }
  return space_from_json(raw);
}

inline Json envelope(const std::string& check_id, const RunConfig& cfg, double K, std::optional<double> N,
                     double margin, const Json& witness, double grid_step) {
  Json j;
  j["paper_check_id"] = check_id;
  j["command"] = cfg.command;
  j["params"] = {{"K", K}, {"N", N ? Json(*N) : Json(nullptr)}};
  j["margin"] = std::isfinite(margin) ? Json(margin) : Json(nullptr);
  j["witness"] = witness;
  j["seed"] = cfg.seed;
  j["grid_step"] = grid_step;
  j["tool_version"] = kToolVersion;
  return j;
}

inline Json report_envelope(const std::string& check_id, const RunConfig& cfg, const CurvatureReport& rep) {
  Json j = envelope(check_id, cfg, rep.K, std::isfinite(rep.N) ? std::optional<double>(rep.N) : std::nullopt,
                    rep.max_violation, witness_to_json(rep.witness), rep.grid_step);
  j["report"] = report_to_json(rep);
  return j;
}

inline double default_x0(const Space1D& space) {
  if (std::holds_alternative<Line>(space.topology())) return 0.5 * (space.lo() + space.hi());
  if (std::holds_alternative<Interval>(space.topology())) return 0.5 * (space.lo() + space.hi());
  return 0.0;
}

// Ten radii up to min(reach, 2, conjugate radius).
inline std::vector<double> radius_grid(const Space1D& space, double x0, const CurvatureParams& params) {
  double top = std::min(space.max_radius(x0), 2.0);
  top = std::min(top, conjugate_radius(params));
  std::vector<double> rs;
  for (int i = 1; i <= 10; ++i) rs.push_back(top * i / 10.0);
  return rs;
}

inline std::vector<MeasurePair> pairs_from_input(const Space1D& space, const Json& raw, std::size_t count,
                                                 std::uint64_t seed) {
  if (raw.contains("pairs")) {
    const Json& arr = raw.at("pairs");
    if (!arr.is_array()) throw SchemaError("pairs", "expected an array of [a0, b0, a1, b1]");
    std::vector<MeasurePair> out;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string path = "pairs[" + std::to_string(i) + "]";
      if (!arr[i].is_array() || arr[i].size() != 4) throw SchemaError(path, "expected [a0, b0, a1, b1]");
      std::array<double, 4> v{};
      for (std::size_t k = 0; k < 4; ++k) {
        if (!arr[i][k].is_number()) throw SchemaError(path, "expected numbers");
        v[k] = arr[i][k].get<double>();
      }
      if (!(v[1] > v[0] && v[3] > v[2])) throw SchemaError(path, "each interval needs a < b");
      out.emplace_back(ProbMeasure1D::uniform(space, v[0], v[1]), ProbMeasure1D::uniform(space, v[2], v[3]));
    }
    return out;
  }
  SplitRng rng(seed);
  return uniform_pair_battery(space, count, rng);
}

inline std::vector<double> sweep_eps(double eps) {
  std::vector<double> out;
  for (double f : {1.0, 0.4, 0.2, 0.1, 0.04, 0.02}) out.push_back(eps * f);
  return out;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "eps,lhs,rhs,ratio\n";
  for (const auto& r : rows) os << fmt(r.eps) << ',' << fmt(r.lhs) << ',' << fmt(r.rhs) << ',' << fmt(r.ratio) << '\n';
  return os.str();
}

inline Json sweep_json(const std::vector<SweepRow>& rows) {
  Json arr = Json::array();
  for (const auto& r : rows) arr.push_back({{"eps", r.eps}, {"lhs", r.lhs}, {"rhs", r.rhs}, {"ratio", r.ratio}});
  return arr;
}

inline std::vector<double> numbers_or(const Json& raw, const char* key, std::vector<double> fallback) {
  if (!raw.is_object() || !raw.contains(key)) return fallback;
  return ::curvlab::detail::numbers_at(raw, key, "");
}

}  // namespace detail

inline Outcome run_check_kn(const RunConfig& cfg) {
  Json raw;
  const Space1D space = detail::load_space(cfg, raw);
  const CurvatureParams params(cfg.K.value_or(0.0), cfg.N.value_or(2.0));
  BatteryOptions bo;
  bo.seed = cfg.seed;
  auto rep = check_kn_convex(space.weight(), space, params, default_battery(space, bo), cfg.tol.value_or(1e-6));
  rep.seed = cfg.seed;
  return {rep.passed ? kPass : kFail, detail::report_envelope("kn_convexity", cfg, rep).dump(2)};
}

inline Outcome run_entropic(const RunConfig& cfg, bool infinite_dim) {
  Json raw;
  const Space1D space = detail::load_space(cfg, raw);
  const auto pairs = detail::pairs_from_input(space, raw, 50, cfg.seed);
  CurvatureReport rep;
  if (infinite_dim) {
    rep = verify_cd_infty(space, cfg.K.value_or(0.0), pairs, eighths(), cfg.tol.value_or(1e-3));
  } else {
    rep = verify_cde(space, CurvatureParams(cfg.K.value_or(0.0), cfg.N.value_or(2.0)), pairs, eighths(),
                     cfg.tol.value_or(5e-4));
  }
  rep.seed = cfg.seed;
  Json j = detail::report_envelope(infinite_dim ? "cd_infty" : "entropic_cd", cfg, rep);
  j["pairs"] = pairs.size();
  return {rep.passed ? kPass : kFail, j.dump(2)};
}

inline Outcome run_circle(const RunConfig& cfg) {
  Json raw;
  const Space1D space = detail::load_space(cfg, raw);
  auto rep = circle_obstruction(space, CurvatureParams(cfg.K.value_or(1.0), cfg.N.value_or(2.0)));
  rep.seed = cfg.seed;
  return {rep.passed ? kPass : kFail, detail::report_envelope("circle_obstruction", cfg, rep).dump(2)};
}

inline Outcome run_bg(const RunConfig& cfg, bool boundary) {
  Json raw;
  const Space1D space = detail::load_space(cfg, raw);
  const CurvatureParams params(cfg.K.value_or(0.0), cfg.N.value_or(2.0));
  const double x0 = cfg.x0.value_or(detail::default_x0(space));
  const auto radii = detail::radius_grid(space, x0, params);
  if (!boundary) {
    auto rep = bg_ratio_scan(space, x0, params, radii, cfg.tol.value_or(1e-6));
    rep.seed = cfg.seed;
    return {rep.passed ? kPass : kFail, detail::report_envelope("bg_ratio", cfg, rep).dump(2)};
  }
  auto scan = bg_boundary_check(space, x0, params, radii);
  scan.report.seed = cfg.seed;
  Json j = detail::report_envelope("bg_boundary", cfg, scan.report);
  Json rows = Json::array();
  for (const auto& r : scan.rows) rows.push_back({{"t", r.t}, {"lhs", r.lhs}, {"rhs", r.rhs}});
  j["rows"] = rows;
  return {scan.report.passed ? kPass : kFail, j.dump(2)};
}

inline Outcome run_density_ratio(const RunConfig& cfg) {
  Json raw;
  const Space1D space = detail::load_space(cfg, raw);
  const double x0 = cfg.x0.value_or(detail::default_x0(space));
  if (cfg.power < 1) throw SchemaError("--power", "must be a positive integer");
  const double top = std::min(1.0, space.max_radius(x0));
  const double bottom = 10.0 * space.grid_step();
  if (!(top > bottom)) throw SchemaError("--x0", "no room for radii above 10 grid steps");
  const auto trace = density_ratio_trace(space, x0, cfg.power, geometric_radii(top, bottom, 32));
  if (cfg.format == "csv") {
    std::ostringstream os;
    os << "r,ratio\n";
    for (std::size_t i = 0; i < trace.r_grid.size(); ++i) os << detail::fmt(trace.r_grid[i]) << ',' << detail::fmt(trace.ratios[i]) << '\n';
    return {kPass, os.str()};
  }
  Json j = detail::envelope("density_ratio", cfg, 0.0, std::nullopt, trace.ratios.back(),
                            Json{{"x", x0}, {"k", trace.k}}, space.grid_step());
  j["params"] = {{"k", trace.k}};
  j["r"] = trace.r_grid;
  j["ratio"] = trace.ratios;
  j["threshold"] = trace.threshold;
  j["in_Mk"] = trace.in_Mk;
  return {kPass, j.dump(2)};
}

inline Outcome run_lipschitz(const RunConfig& cfg) {
  Json raw;
  const Space1D space = detail::load_space(cfg, raw);
  const CurvatureParams params(cfg.K.value_or(0.0), cfg.N.value_or(2.0));
  const double r = cfg.radius.value_or(0.5);
  SplitRng rng(cfg.seed);
  const auto pairs = random_point_pairs(space, r, 500, rng);
  auto res = lipschitz_modulus(space, r, pairs, params);
  res.report.seed = cfg.seed;
  Json j = detail::report_envelope("lipschitz", cfg, res.report);
  j["empirical"] = res.empirical;
  j["theoretical"] = res.theoretical;
  j["pairs"] = pairs.size();
  return {res.report.passed ? kPass : kFail, j.dump(2)};
}

inline Outcome run_classify(const RunConfig& cfg) {
  Json raw;
  const Space1D space = detail::load_space(cfg, raw);
  std::vector<CurvatureParams> search;
  if (cfg.K || cfg.N) {
    search.emplace_back(cfg.K.value_or(0.0), cfg.N.value_or(2.0));
  } else if (raw.contains("search")) {
    const Json& arr = raw.at("search");
    if (!arr.is_array()) throw SchemaError("search", "expected an array of [K, N]");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      if (!arr[i].is_array() || arr[i].size() != 2 || !arr[i][0].is_number() || !arr[i][1].is_number()) {
        throw SchemaError("search[" + std::to_string(i) + "]", "expected [K, N]");
      }
      try {
        search.emplace_back(arr[i][0].get<double>(), arr[i][1].get<double>());
      } catch (const std::domain_error& e) {
        throw SchemaError("search[" + std::to_string(i) + "]", e.what());
      }
    }
  } else {
    search = {CurvatureParams(-1.0, 2.0), CurvatureParams(0.0, 2.0), CurvatureParams(1.0, 2.0)};
  }
  BatteryOptions bo;
  bo.seed = cfg.seed;
  const auto verdict = classify(space, search, cfg.tol.value_or(1e-5), bo);
  const double K = verdict.kn_params ? verdict.kn_params->K() : std::nan("");
  std::optional<double> N;
  if (verdict.kn_params) N.emplace(verdict.kn_params->N());
  Json witness = verdict.report ? witness_to_json(verdict.report->witness) : Json(nullptr);
  Json j = detail::envelope("classification", cfg, std::isfinite(K) ? K : 0.0, N,
                            verdict.report ? verdict.report->max_violation : std::nan(""), witness, space.grid_step());
  if (!verdict.kn_params) j["params"] = nullptr;
  j["model"] = topology_name(verdict.model);
  j["model_param"] = verdict.parameter ? Json(*verdict.parameter) : Json(nullptr);
  j["verdict"] = verdict.note;
  return {verdict.kn_params ? kPass : kFail, j.dump(2)};
}

inline Outcome run_tripod(const RunConfig& cfg, bool renyi) {
  const ScenarioInput in = scenario_from_json(detail::load_input(cfg));
  BranchingScenario sc = in.scenario;
  if (cfg.N) sc.N = *cfg.N;
  const Tripod T(in.edge_lengths);
  const auto rows = branching_sweep(T, sc, detail::sweep_eps(sc.eps));
  bool ok = true;
  for (const auto& r : rows) ok = ok && r.rhs < 0.0;
  const auto& last = rows.back();
  const double threshold = std::pow(2.0, 1.0 / sc.N);
  if (renyi) {
    ok = ok && last.ratio >= threshold * (1.0 - kRenyiTolerance);
  } else {
    ok = ok && last.lhs > last.rhs;
  }
  if (cfg.format == "csv") return {ok ? kPass : kFail, detail::sweep_csv(rows)};
  const double margin = renyi ? threshold - last.ratio : last.rhs - last.lhs;
  Json witness{{"eps", last.eps}, {"lhs", last.lhs}, {"rhs", last.rhs}, {"ratio", last.ratio}};
  Json j = detail::envelope(renyi ? "branching_renyi" : "branching_shannon", cfg, 0.0, sc.N, margin, witness,
                            pushforward(build_branching_plans(T, sc), 0.0, PlanSide::Up).step());
  j["scenario"] = {{"a", sc.a}, {"b", sc.b}, {"eps", sc.eps}, {"eta", sc.eta}, {"beta", sc.beta}, {"N", sc.N},
                   {"edge_lengths", in.edge_lengths}};
  j["threshold"] = threshold;
  j["contradiction_reproduced"] = ok;
  j["sweep"] = detail::sweep_json(rows);
  return {ok ? kPass : kFail, j.dump(2)};
}

struct TableRow {
  double t, K, N, theta, sigma, s_vol, f_vol;
};

/// (t, K, N, theta, sigma, s_vol, f_vol) in nested order K, N, theta, t.
/// sigma may be inf; f_vol is nan past the conjugate radius.
inline std::vector<TableRow> coefficients_table(const std::vector<double>& ts, const std::vector<double>& Ks,
                                                const std::vector<double>& Ns, const std::vector<double>& thetas) {
  std::vector<TableRow> rows;
  for (double K : Ks)
    for (double N : Ns) {
      const CurvatureParams p(K, N);
      for (double th : thetas) {
        const double sv = s_vol(p, th);
        const double fv = th <= conjugate_radius(p) ? f_vol(p, th) : std::nan("");
        for (double t : ts) rows.push_back({t, K, N, th, sigma(t, p, th).as_double(), sv, fv});
      }
    }
  return rows;
}

inline Outcome run_table(const RunConfig& cfg) {
  Json raw = cfg.input.empty() ? Json::object() : detail::load_input(cfg);
  const auto rows = coefficients_table(detail::numbers_or(raw, "t", {0.0, 0.25, 0.5, 0.75, 1.0}),
                                       detail::numbers_or(raw, "K", {-1.0, 0.0, 1.0}),
                                       detail::numbers_or(raw, "N", {2.0, 3.0}),
                                       detail::numbers_or(raw, "theta", {0.5, 1.0, 2.0}));
  if (cfg.format == "json") {
    Json arr = Json::array();
    for (const auto& r : rows) {
      arr.push_back({{"t", r.t}, {"K", r.K}, {"N", r.N}, {"theta", r.theta},
                     {"sigma", ::curvlab::detail::finite_or_null(r.sigma)}, {"s_vol", r.s_vol},
                     {"f_vol", ::curvlab::detail::finite_or_null(r.f_vol)}});
    }
    // a table has no single parameter pair, margin or witness
    Json j = detail::envelope("coefficients_table", cfg, 0.0, std::nullopt, std::nan(""), nullptr, 0.0);
    j["params"] = nullptr;
    j["grid_step"] = nullptr;
    j["rows"] = arr;
    return {kPass, j.dump(2)};
  }
  std::ostringstream os;
  os << "t,K,N,theta,sigma,s_vol,f_vol\n";
  for (const auto& r : rows) {
    os << detail::fmt(r.t) << ',' << detail::fmt(r.K) << ',' << detail::fmt(r.N) << ',' << detail::fmt(r.theta) << ','
       << detail::fmt(r.sigma) << ',' << detail::fmt(r.s_vol) << ',' << detail::fmt(r.f_vol) << '\n';
  }
  return {kPass, os.str()};
}

/// Runs one command and returns its exit code and report body.
inline Outcome execute(const RunConfig& cfg) {
  const std::string& c = cfg.command;
  if (c == "check-kn-convex") return run_check_kn(cfg);
  if (c == "verify-cde") return run_entropic(cfg, false);
  if (c == "verify-cd-infty") return run_entropic(cfg, true);
  if (c == "circle-obstruction") return run_circle(cfg);
  if (c == "bg-scan") return run_bg(cfg, false);
  if (c == "bg-boundary") return run_bg(cfg, true);
  if (c == "density-ratio") return run_density_ratio(cfg);
  if (c == "lipschitz") return run_lipschitz(cfg);
  if (c == "classify") return run_classify(cfg);
  if (c == "tripod-shannon") return run_tripod(cfg, false);
  if (c == "tripod-renyi") return run_tripod(cfg, true);
  if (c == "coefficients-table") return run_table(cfg);
  throw SchemaError("command", "unknown command '" + c + "'");
}

/// execute() plus output handling and error-to-exit-code mapping.
inline int run(const RunConfig& cfg, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  Outcome res;
  try {
    res = execute(cfg);
  } catch (const SchemaError& e) {
    err << "curvlab: " << e.what() << '\n';
    return kUsage;
  } catch (const InfeasibleScenario& e) {
    err << "curvlab: infeasible scenario: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "curvlab: " << cfg.command << " failed: " << e.what() << '\n';
    return kUsage;
  }
  if (!res.body.empty() && res.body.back() != '\n') res.body.push_back('\n');
  if (cfg.output.empty()) {
    out << res.body;
  } else {
    std::ofstream f(cfg.output, std::ios::binary);
    if (!f) {
      err << "curvlab: cannot write " << cfg.output << '\n';
      return kUsage;
    }
    f << res.body;
  }
  return res.code;
}

/// Parses argv into a RunConfig and runs it.
inline int main_entry(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"curvlab: numerical checks of synthetic Ricci curvature bounds in one dimension"};
  RunConfig cfg;
  double tol = 0, grid = 0, k = 0, n = 0, x0 = 0, radius = 0;
  app.add_option("command", cfg.command, "Check to run")->required()->check(CLI::IsMember(commands()));
  app.add_option("--input,-i", cfg.input, "Space or scenario JSON");
  app.add_option("--output,-o", cfg.output, "Report file (default: stdout)");
  app.add_option("--seed", cfg.seed, "Seed for every random battery");
  auto* o_tol = app.add_option("--tol", tol, "Pass threshold override");
  auto* o_grid = app.add_option("--grid-step", grid, "Grid step override")->check(CLI::PositiveNumber);
  auto* o_k = app.add_option("--k", k, "Curvature bound K");
  auto* o_n = app.add_option("--n", n, "Dimension bound N (> 1)");
  auto* o_x0 = app.add_option("--x0", x0, "Base point for bg-scan, bg-boundary and density-ratio");
  auto* o_r = app.add_option("--radius", radius, "Ball radius for lipschitz")->check(CLI::PositiveNumber);
  app.add_option("--power", cfg.power, "Exponent k of m(B_r)/r^k for density-ratio")->check(CLI::PositiveNumber);
  app.add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  app.set_version_flag("--version", kToolVersion);
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kPass;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << '\n';
    return kPass;
  } catch (const CLI::ParseError& e) {
    err << "curvlab: " << e.what() << '\n';
    return kUsage;
  }
  if (o_tol->count()) cfg.tol = tol;
  if (o_grid->count()) cfg.grid_step = grid;
  if (o_k->count()) cfg.K = k;
  if (o_n->count()) cfg.N = n;
  if (o_x0->count()) cfg.x0 = x0;
  if (o_r->count()) cfg.radius = radius;
  if (cfg.command == "coefficients-table" && !app.get_option("--format")->count()) cfg.format = "csv";
  return run(cfg, out, err);
}

}  // namespace curvlab::cli
