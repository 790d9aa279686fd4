#include "lhj/scenario.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

#include <json.hpp>

#include "lhj/errors.hpp"
#include "lhj/field_io.hpp"

namespace lhj {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& ctx) {
  if (!obj.is_object()) throw ConfigError(ctx + ": expected an object");
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key))
      throw ConfigError("unknown key '" + key + "' in " + ctx);
}

double require_number(const json& obj, const std::string& key, const std::string& ctx) {
  if (!obj.contains(key)) throw ConfigError(ctx + ": missing required key '" + key + "'");
  if (!obj[key].is_number()) throw ConfigError(ctx + "." + key + ": must be a number");
  return obj[key].get<double>();
}

double number_or(const json& obj, const std::string& key, double fallback) {
  if (!obj.contains(key)) return fallback;
  return obj[key].get<double>();
}

std::string require_string(const json& obj, const std::string& key, const std::string& ctx) {
  if (!obj.contains(key) || !obj[key].is_string())
    throw ConfigError(ctx + ": missing required string key '" + key + "'");
  return obj[key].get<std::string>();
}

void check_order_range(double alpha, const std::string& ctx) {
  if (!(alpha > 1.0 && alpha <= 2.0))
    throw ConfigError(ctx + ": order must lie in (1, 2], got " + std::to_string(alpha));
}

Symbol build_symbol(const json& spec, int dim, const std::string& ctx) {
  std::string kind = require_string(spec, "kind", ctx);
  if (kind == "laplacian") {
    check_keys(spec, {"kind"}, ctx);
    return symbol_laplacian(dim);
  }
  if (kind == "fractional") {
    check_keys(spec, {"kind", "alpha"}, ctx);
    double alpha = require_number(spec, "alpha", ctx);
    check_order_range(alpha, ctx + ".alpha");
    if (alpha == 2.0) throw ConfigError(ctx + ".alpha: fractional order must be strictly below 2");
    return symbol_fractional(dim, alpha);
  }
  if (kind == "anisotropic") {
    check_keys(spec, {"kind", "orders"}, ctx);
    if (!spec.contains("orders") || !spec["orders"].is_array())
      throw ConfigError(ctx + ": anisotropic symbol needs an 'orders' array");
    std::vector<double> orders = spec["orders"].get<std::vector<double>>();
    if (static_cast<int>(orders.size()) != dim)
      throw ConfigError(ctx + ".orders: need one order per axis (" + std::to_string(dim) + ")");
    for (double a : orders) check_order_range(a, ctx + ".orders");
    return symbol_anisotropic(orders);
  }
  if (kind == "riesz_feller") {
    check_keys(spec, {"kind", "alpha", "side"}, ctx);
    if (dim != 1) throw ConfigError(ctx + ": riesz_feller requires d = 1");
    double alpha = require_number(spec, "alpha", ctx);
    check_order_range(alpha, ctx + ".alpha");
    if (alpha == 2.0) throw ConfigError(ctx + ".alpha: order must be strictly below 2");
    int side = static_cast<int>(number_or(spec, "side", 1.0));
    return symbol_riesz_feller(alpha, side);
  }
  if (kind == "cgmy") {
    check_keys(spec, {"kind", "C", "G", "M", "Y"}, ctx);
    if (dim != 1) throw ConfigError(ctx + ": cgmy requires d = 1");
    double y = require_number(spec, "Y", ctx);
    check_order_range(y, ctx + ".Y");
    if (y == 2.0) throw ConfigError(ctx + ".Y: order must be strictly below 2");
    return symbol_cgmy(require_number(spec, "C", ctx), require_number(spec, "G", ctx),
                       require_number(spec, "M", ctx), y);
  }
  if (kind == "sum") {
    check_keys(spec, {"kind", "terms"}, ctx);
    if (!spec.contains("terms") || !spec["terms"].is_array() || spec["terms"].size() < 2)
      throw ConfigError(ctx + ": sum symbol needs a 'terms' array with at least two entries");
    Symbol acc = build_symbol(spec["terms"][0], dim, ctx + ".terms[0]");
    for (std::size_t i = 1; i < spec["terms"].size(); ++i)
      acc = symbol_sum(acc, build_symbol(spec["terms"][i], dim, ctx + ".terms[" +
                                          std::to_string(i) + "]"));
    return acc;
  }
  if (kind == "drift") {
    check_keys(spec, {"kind", "b"}, ctx);
    if (!spec.contains("b") || !spec["b"].is_array())
      throw ConfigError(ctx + ": drift symbol needs a 'b' array");
    std::vector<double> b = spec["b"].get<std::vector<double>>();
    if (static_cast<int>(b.size()) != dim)
      throw ConfigError(ctx + ".b: need one component per axis");
    return symbol_drift(b);
  }
  if (kind == "quadrature") {
    check_keys(spec, {"kind", "density", "alpha", "side", "C", "G", "M", "Y", "truncation"}, ctx);
    std::string density = require_string(spec, "density", ctx);
    TripletQuadrature quad;
    quad.truncation = number_or(spec, "truncation", quad.truncation);
    LevyTriplet trip;
    if (density == "stable_symmetric") {
      double alpha = require_number(spec, "alpha", ctx);
      check_order_range(alpha, ctx + ".alpha");
      trip = triplet_symmetric_stable(alpha);
    } else if (density == "stable_one_sided") {
      double alpha = require_number(spec, "alpha", ctx);
      check_order_range(alpha, ctx + ".alpha");
      trip = triplet_one_sided_stable(alpha, static_cast<int>(number_or(spec, "side", 1.0)));
    } else if (density == "cgmy") {
      trip = triplet_cgmy(require_number(spec, "C", ctx), require_number(spec, "G", ctx),
                          require_number(spec, "M", ctx), require_number(spec, "Y", ctx));
    } else {
      throw ConfigError(ctx + ".density: unknown density '" + density + "'");
    }
    if (dim != trip.dim) throw ConfigError(ctx + ": quadrature densities are one-dimensional");
    return symbol_from_triplet(trip, quad);
  }
  throw ConfigError(ctx + ".kind: unknown symbol kind '" + kind + "'");
}

Hamiltonian build_hamiltonian(const json& spec, double period, const std::string& ctx) {
  std::string kind = require_string(spec, "kind", ctx);
  if (kind == "zero") {
    check_keys(spec, {"kind"}, ctx);
    return ham_zero();
  }
  if (kind == "quadratic") {
    check_keys(spec, {"kind", "c"}, ctx);
    double c = require_number(spec, "c", ctx);
    if (!(c > 0.0)) throw ConfigError(ctx + ".c: must be positive");
    return ham_quadratic(c);
  }
  if (kind == "smooth_lipschitz") {
    check_keys(spec, {"kind", "a"}, ctx);
    double a = require_number(spec, "a", ctx);
    if (!(a > 0.0)) throw ConfigError(ctx + ".a: must be positive");
    return ham_smooth_lipschitz(a);
  }
  if (kind == "with_zero_order") {
    check_keys(spec, {"kind", "base", "lambda"}, ctx);
    if (!spec.contains("base")) throw ConfigError(ctx + ": missing 'base' Hamiltonian");
    return ham_with_zero_order(build_hamiltonian(spec["base"], period, ctx + ".base"),
                               require_number(spec, "lambda", ctx));
  }
  if (kind == "x_dependent") {
    check_keys(spec, {"kind", "base", "coeff"}, ctx);
    if (!spec.contains("base")) throw ConfigError(ctx + ": missing 'base' Hamiltonian");
    std::string coeff = require_string(spec, "coeff", ctx);
    if (coeff != "one_plus_half_sin")
      throw ConfigError(ctx + ".coeff: unknown coefficient '" + coeff + "'");
    SpatialCoeff c;
    double k = 2.0 * std::numbers::pi / period;
    c.eval = [k](std::span<const double> x) { return 1.0 + 0.5 * std::sin(k * x[0]); };
    c.inf = 0.5;
    c.sup = 1.5;
    c.grad_sup = 0.5 * k;
    c.name = "one_plus_half_sin";
    return ham_x_dependent(build_hamiltonian(spec["base"], period, ctx + ".base"), c);
  }
  throw ConfigError(ctx + ".kind: unknown hamiltonian kind '" + kind + "'");
}

std::function<Field(const PeriodicGrid&, std::uint64_t)> build_datum(const json& spec,
                                                                     const std::string& ctx) {
  std::string kind = require_string(spec, "kind", ctx);
  if (kind == "gaussian_bump") {
    check_keys(spec, {"kind", "amplitude", "width", "center"}, ctx);
    double amp = number_or(spec, "amplitude", 1.0);
    double width = number_or(spec, "width", 1.0);
    double center = number_or(spec, "center", -1.0);
    if (!(width > 0.0)) throw ConfigError(ctx + ".width: must be positive");
    return [amp, width, center](const PeriodicGrid& g, std::uint64_t) {
      double c = center >= 0.0 ? center : g.period / 2.0;
      return make_field(g, [&](std::span<const double> x) {
        double r2 = 0.0;
        for (int a = 0; a < g.dim; ++a) {
          double d = x[a] - c;
          r2 += d * d;
        }
        return amp * std::exp(-r2 / (width * width));
      });
    };
  }
  if (kind == "cosine") {
    check_keys(spec, {"kind", "amplitude", "mode"}, ctx);
    double amp = number_or(spec, "amplitude", 1.0);
    int mode = static_cast<int>(number_or(spec, "mode", 1.0));
    if (mode < 1) throw ConfigError(ctx + ".mode: must be a positive integer");
    return [amp, mode](const PeriodicGrid& g, std::uint64_t) {
      if (mode >= g.n / 2) throw ConfigError("datum.mode: at or above the Nyquist index");
      double k = 2.0 * std::numbers::pi * mode / g.period;
      return make_field(g, [&](std::span<const double> x) {
        double v = amp;
        for (int a = 0; a < g.dim; ++a) v *= std::cos(k * x[a]);
        return v;
      });
    };
  }
  if (kind == "weierstrass") {
    check_keys(spec, {"kind", "beta"}, ctx);
    double beta = require_number(spec, "beta", ctx);
    if (!(beta > 0.0 && beta < 1.0)) throw ConfigError(ctx + ".beta: must lie in (0, 1)");
    return [beta](const PeriodicGrid& g, std::uint64_t seed) {
      return weierstrass_datum(g, beta, seed);
    };
  }
  if (kind == "snapshot") {
    check_keys(spec, {"kind", "path"}, ctx);
    std::string path = require_string(spec, "path", ctx);
    return [path](const PeriodicGrid& g, std::uint64_t) {
      Snapshot snap = read_snapshot(path);
      if (!(snap.field.grid == g))
        throw ConfigError("datum.path: snapshot grid does not match the scenario grid");
      return snap.field;
    };
  }
  throw ConfigError(ctx + ".kind: unknown datum kind '" + kind + "'");
}

std::function<Forcing(const PeriodicGrid&)> build_forcing(const json& spec,
                                                          const std::string& ctx) {
  std::string kind = require_string(spec, "kind", ctx);
  if (kind == "zero") {
    check_keys(spec, {"kind"}, ctx);
    return [](const PeriodicGrid&) { return Forcing{}; };
  }
  if (kind == "constant") {
    check_keys(spec, {"kind", "value"}, ctx);
    double v = require_number(spec, "value", ctx);
    return [v](const PeriodicGrid& g) {
      Forcing f;
      f.name = "constant";
      f.eval = [v, g](double) { return constant_field(g, v); };
      return f;
    };
  }
  if (kind == "decaying_cosine") {
    check_keys(spec, {"kind", "amplitude", "mode", "rate"}, ctx);
    double amp = number_or(spec, "amplitude", 1.0);
    int mode = static_cast<int>(number_or(spec, "mode", 1.0));
    double rate = number_or(spec, "rate", 1.0);
    if (mode < 1) throw ConfigError(ctx + ".mode: must be a positive integer");
    return [amp, mode, rate](const PeriodicGrid& g) {
      if (mode >= g.n / 2) throw ConfigError("forcing.mode: at or above the Nyquist index");
      double k = 2.0 * std::numbers::pi * mode / g.period;
      Forcing f;
      f.name = "decaying_cosine";
      f.eval = [amp, k, rate, g](double t) {
        return make_field(g, [&](std::span<const double> x) {
          double v = amp * std::exp(-rate * t);
          for (int a = 0; a < g.dim; ++a) v *= std::cos(k * x[a]);
          return v;
        });
      };
      return f;
    };
  }
  throw ConfigError(ctx + ".kind: unknown forcing kind '" + kind + "'");
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

Scenario parse_one(const json& j) {
  check_keys(j,
             {"schema_version", "name", "study", "grid", "symbol", "hamiltonian", "forcing",
              "datum", "horizon", "solver", "snapshots", "seed", "study_params"},
             "scenario");
  Scenario s;

  if (!j.contains("schema_version") || !j["schema_version"].is_number_integer())
    throw ConfigError("scenario: missing integer 'schema_version'");
  s.schema_version = j["schema_version"].get<int>();
  if (s.schema_version != 1)
    throw ConfigError("schema_version: only version 1 is supported, got " +
                      std::to_string(s.schema_version));

  if (j.contains("name")) s.name = j["name"].get<std::string>();

  std::string study = require_string(j, "study", "scenario");
  if (study == "solve") s.study = Study::solve;
  else if (study == "kernel-audit") s.study = Study::kernel_audit;
  else if (study == "blowup") s.study = Study::blowup;
  else if (study == "estimate-audit") s.study = Study::estimate_audit;
  else if (study == "oracle-compare") s.study = Study::oracle_compare;
  else throw ConfigError("study: unknown study '" + study + "'");

  if (!j.contains("grid")) throw ConfigError("scenario: missing 'grid'");
  check_keys(j["grid"], {"d", "n", "L"}, "grid");
  int d = static_cast<int>(require_number(j["grid"], "d", "grid"));
  int n = static_cast<int>(require_number(j["grid"], "n", "grid"));
  double L = require_number(j["grid"], "L", "grid");
  s.grid = PeriodicGrid(d, n, L);  // validates d, n power of two, L > 0

  if (!j.contains("symbol")) throw ConfigError("scenario: missing 'symbol'");
  s.symbol = build_symbol(j["symbol"], d, "symbol");

  if (!j.contains("hamiltonian")) throw ConfigError("scenario: missing 'hamiltonian'");
  s.hamiltonian = build_hamiltonian(j["hamiltonian"], L, "hamiltonian");

  s.forcing = j.contains("forcing") ? build_forcing(j["forcing"], "forcing")
                                    : [](const PeriodicGrid&) { return Forcing{}; };

  if (!j.contains("datum")) throw ConfigError("scenario: missing 'datum'");
  s.datum = build_datum(j["datum"], "datum");

  s.horizon = require_number(j, "horizon", "scenario");
  if (!(s.horizon > 0.0)) throw ConfigError("horizon: must be positive");

  if (j.contains("solver")) {
    const json& sol = j["solver"];
    check_keys(sol,
               {"dt", "picard_tol", "picard_max", "quad_rule", "substeps", "resolve_guard",
                "tau_initial", "diag_beta", "diag_sigma", "diag_seminorms", "diag_residual"},
               "solver");
    s.solver.dt = number_or(sol, "dt", s.solver.dt);
    s.solver.picard_tol = number_or(sol, "picard_tol", s.solver.picard_tol);
    s.solver.picard_max = static_cast<int>(number_or(sol, "picard_max", s.solver.picard_max));
    s.solver.substeps = static_cast<int>(number_or(sol, "substeps", s.solver.substeps));
    s.solver.resolve_guard = number_or(sol, "resolve_guard", s.solver.resolve_guard);
    s.solver.tau_initial = number_or(sol, "tau_initial", s.solver.tau_initial);
    s.solver.diag_beta = number_or(sol, "diag_beta", s.solver.diag_beta);
    s.solver.diag_sigma = number_or(sol, "diag_sigma", s.solver.diag_sigma);
    if (sol.contains("diag_seminorms")) s.solver.diag_seminorms = sol["diag_seminorms"].get<bool>();
    if (sol.contains("diag_residual")) s.solver.diag_residual = sol["diag_residual"].get<bool>();
    if (sol.contains("quad_rule")) {
      std::string rule = sol["quad_rule"].get<std::string>();
      if (rule == "trapezoid") s.solver.quad_rule = QuadRule::trapezoid;
      else if (rule == "left_rectangle") s.solver.quad_rule = QuadRule::left_rectangle;
      else throw ConfigError("solver.quad_rule: must be 'trapezoid' or 'left_rectangle'");
    }
    s.solver.validate();
  }

  if (j.contains("snapshots")) {
    if (!j["snapshots"].is_array()) throw ConfigError("snapshots: must be an array of times");
    s.snapshot_times = j["snapshots"].get<std::vector<double>>();
    for (double t : s.snapshot_times)
      if (!(t >= 0.0 && t <= s.horizon))
        throw ConfigError("snapshots: times must lie in [0, horizon]");
  }

  if (j.contains("seed")) s.seed = j["seed"].get<std::uint64_t>();

  const json params = j.contains("study_params") ? j["study_params"] : json::object();
  switch (s.study) {
    case Study::kernel_audit: {
      check_keys(params, {"t_lo", "t_hi", "per_decade", "betas"}, "study_params");
      s.kernel_audit.t_lo = number_or(params, "t_lo", s.kernel_audit.t_lo);
      s.kernel_audit.t_hi = number_or(params, "t_hi", s.kernel_audit.t_hi);
      if (!(s.kernel_audit.t_lo > 0.0 && s.kernel_audit.t_hi > s.kernel_audit.t_lo))
        throw ConfigError("study_params: need 0 < t_lo < t_hi");
      s.kernel_audit.per_decade =
          static_cast<int>(number_or(params, "per_decade", s.kernel_audit.per_decade));
      if (params.contains("betas"))
        s.kernel_audit.betas = params["betas"].get<std::vector<std::vector<int>>>();
      break;
    }
    case Study::blowup: {
      check_keys(params, {"eps"}, "study_params");
      s.blowup.eps = number_or(params, "eps", s.blowup.eps);
      if (!(s.blowup.eps > 0.0 && s.blowup.eps < s.symbol.order - 1.0))
        throw ConfigError("study_params.eps: must lie in (0, order - 1)");
      if (!s.hamiltonian.satisfies_HLip)
        throw ConfigError(
            "study: blowup requires a Hamiltonian that is globally Lipschitz in p "
            "(satisfies_HLip); pick 'zero' or 'smooth_lipschitz'");
      if (!j["datum"].contains("kind") || j["datum"]["kind"] != "weierstrass")
        throw ConfigError("datum: the blowup study requires the 'weierstrass' datum");
      break;
    }
    case Study::estimate_audit: {
      check_keys(params, {"checks", "eps", "lambdas", "bump_amplitude", "bump_width",
                          "bump_center"},
                 "study_params");
      if (params.contains("checks"))
        s.estimate_audit.checks = params["checks"].get<std::vector<std::string>>();
      for (const std::string& c : s.estimate_audit.checks)
        if (c != "comparison" && c != "supbound" && c != "lipschitz" && c != "schauder")
          throw ConfigError("study_params.checks: unknown check '" + c + "'");
      s.estimate_audit.eps = number_or(params, "eps", s.estimate_audit.eps);
      if (params.contains("lambdas"))
        s.estimate_audit.lambdas = params["lambdas"].get<std::vector<double>>();
      s.estimate_audit.bump_amplitude =
          number_or(params, "bump_amplitude", s.estimate_audit.bump_amplitude);
      s.estimate_audit.bump_width = number_or(params, "bump_width", s.estimate_audit.bump_width);
      s.estimate_audit.bump_center = number_or(params, "bump_center", s.estimate_audit.bump_center);
      bool needs_h2 = false;
      for (const std::string& c : s.estimate_audit.checks)
        if (c == "comparison" || c == "lipschitz") needs_h2 = true;
      if (needs_h2 && !s.hamiltonian.satisfies_H2)
        throw ConfigError(
            "study: comparison/lipschitz checks require the x-regularity flag (satisfies_H2)");
      break;
    }
    case Study::oracle_compare: {
      check_keys(params, {"oracle", "times", "tolerance", "forcing_constant"}, "study_params");
      if (params.contains("oracle"))
        s.oracle_compare.oracle = params["oracle"].get<std::string>();
      if (s.oracle_compare.oracle != "cole_hopf" && s.oracle_compare.oracle != "linear_heat")
        throw ConfigError("study_params.oracle: must be 'cole_hopf' or 'linear_heat'");
      if (params.contains("times"))
        s.oracle_compare.times = params["times"].get<std::vector<double>>();
      if (s.oracle_compare.times.empty()) s.oracle_compare.times = {s.horizon};
      for (double t : s.oracle_compare.times)
        if (!(t > 0.0 && t <= s.horizon))
          throw ConfigError("study_params.times: must lie in (0, horizon]");
      s.oracle_compare.tolerance = number_or(params, "tolerance", s.oracle_compare.tolerance);
      s.oracle_compare.forcing_constant =
          number_or(params, "forcing_constant", s.oracle_compare.forcing_constant);
      if (s.oracle_compare.oracle == "cole_hopf") {
        if (s.symbol.kind != SymbolKind::laplacian)
          throw ConfigError("study_params.oracle: cole_hopf needs the laplacian symbol");
        if (s.hamiltonian.name != "quadratic")
          throw ConfigError("study_params.oracle: cole_hopf needs the quadratic Hamiltonian");
      }
      break;
    }
    case Study::solve:
      check_keys(params, {}, "study_params");
      break;
  }

  s.scenario_hash = [&j] {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a(j.dump())));
    return std::string(buf);
  }();
  return s;
}

}  // namespace

std::string study_name(Study s) {
  switch (s) {
    case Study::solve: return "solve";
    case Study::kernel_audit: return "kernel-audit";
    case Study::blowup: return "blowup";
    case Study::estimate_audit: return "estimate-audit";
    case Study::oracle_compare: return "oracle-compare";
  }
  return "?";
}

Scenario parse_scenario(const std::string& json_text) {
  json j = json::parse(json_text, nullptr, true, /*ignore_comments=*/true);
  return parse_one(j);
}

std::vector<Scenario> load_scenarios(const std::filesystem::path& config_path) {
  std::ifstream in(config_path);
  if (!in) throw IoError("cannot open configuration file: " + config_path.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError("configuration is not valid JSON: " + std::string(e.what()));
  }
  std::vector<Scenario> out;
  if (j.is_object() && j.contains("scenarios")) {
    check_keys(j, {"scenarios"}, "configuration");
    if (!j["scenarios"].is_array() || j["scenarios"].empty())
      throw ConfigError("scenarios: must be a non-empty array");
    std::set<std::string> names;
    for (const auto& item : j["scenarios"]) {
      Scenario s = parse_one(item);
      if (!item.contains("name"))
        throw ConfigError("scenarios: every batch entry needs a unique 'name'");
      if (!names.insert(s.name).second)
        throw ConfigError("scenarios: duplicate name '" + s.name + "'");
      out.push_back(std::move(s));
    }
  } else {
    out.push_back(parse_one(j));
  }
  return out;
}

}  // namespace lhj
