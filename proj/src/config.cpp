#include "nonloc/config.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace nonloc {

using json = nlohmann::json;

namespace {

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw ConfigError(where + ": unknown key '" + k + "'");
}

double get_number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(where + ": not finite");
  return v;
}

int get_int(const json& j, const std::string& where) {
  if (!j.is_number_integer()) throw ConfigError(where + ": expected an integer");
  return j.get<int>();
}

bool get_bool(const json& j, const std::string& where) {
  if (!j.is_boolean()) throw ConfigError(where + ": expected true or false");
  return j.get<bool>();
}

std::vector<double> get_numbers(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_number(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

IVec get_ivec(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected an array of integers");
  IVec v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(i) = get_int(j[i], where);
  return v;
}

template <class F>
void maybe(const json& j, const char* key, F&& f) {
  if (j.contains(key)) f(j.at(key));
}

void parse_kernel(const json& j, KernelConfig& k) {
  only_keys(j, "kernel", {"family", "dimension", "sigma", "mass", "radius", "support", "samples", "l2_data"});
  maybe(j, "family", [&](const json& v) {
    if (!v.is_string()) throw ConfigError("kernel.family: expected a string");
    k.family = v.get<std::string>();
    if (k.family != "gaussian" && k.family != "ball" && k.family != "sampled")
      throw ConfigError("kernel.family: must be gaussian, ball or sampled");
  });
  maybe(j, "dimension", [&](const json& v) { k.dimension = get_int(v, "kernel.dimension"); });
  maybe(j, "sigma", [&](const json& v) {
    k.sigma = v.is_array() ? get_numbers(v, "kernel.sigma") : std::vector<double>{get_number(v, "kernel.sigma")};
  });
  maybe(j, "mass", [&](const json& v) { k.mass = get_number(v, "kernel.mass"); });
  maybe(j, "radius", [&](const json& v) { k.radius = get_number(v, "kernel.radius"); });
  maybe(j, "support", [&](const json& v) { k.support = get_number(v, "kernel.support"); });
  maybe(j, "samples", [&](const json& v) { k.samples = get_numbers(v, "kernel.samples"); });
  maybe(j, "l2_data", [&](const json& v) { k.l2_data = get_bool(v, "kernel.l2_data"); });
  if (k.dimension < 1 || k.dimension > 3) throw ConfigError("kernel.dimension: must be 1, 2 or 3");
}

void parse_modulation(const json& j, ModulationConfig& m, int dim) {
  only_keys(j, "modulation", {"mean", "cos_products", "terms", "certify_grid"});
  maybe(j, "mean", [&](const json& v) { m.mean = get_number(v, "modulation.mean"); });
  maybe(j, "certify_grid", [&](const json& v) { m.certify_grid = get_int(v, "modulation.certify_grid"); });
  maybe(j, "cos_products", [&](const json& v) {
    if (!v.is_array()) throw ConfigError("modulation.cos_products: expected an array");
    for (const auto& e : v) {
      only_keys(e, "modulation.cos_products[]", {"amplitude", "axis"});
      CosProductConfig c;
      maybe(e, "amplitude", [&](const json& x) { c.amplitude = get_number(x, "cos_products.amplitude"); });
      maybe(e, "axis", [&](const json& x) { c.axis = get_int(x, "cos_products.axis"); });
      if (c.axis < 0 || c.axis >= dim) throw ConfigError("modulation.cos_products.axis: out of range");
      m.cos_products.push_back(c);
    }
  });
  maybe(j, "terms", [&](const json& v) {
    if (!v.is_array()) throw ConfigError("modulation.terms: expected an array");
    for (const auto& e : v) {
      only_keys(e, "modulation.terms[]", {"p", "q", "re", "im"});
      if (!e.contains("p") || !e.contains("q")) throw ConfigError("modulation.terms[]: p and q are required");
      ModulationTerm t;
      t.p = get_ivec(e.at("p"), "modulation.terms.p");
      t.q = get_ivec(e.at("q"), "modulation.terms.q");
      if (t.p.size() != dim || t.q.size() != dim) throw ConfigError("modulation.terms: p and q need d entries");
      double re = 0.0, im = 0.0;
      maybe(e, "re", [&](const json& x) { re = get_number(x, "modulation.terms.re"); });
      maybe(e, "im", [&](const json& x) { im = get_number(x, "modulation.terms.im"); });
      t.c = cplx(re, im);
      m.terms.push_back(t);
    }
  });
}

void parse_effective(const json& j, EffectiveConfig& e) {
  only_keys(j, "effective", {"methods", "agreement_tol", "hessian_step", "contour_nodes", "max_contour_nodes"});
  maybe(j, "methods", [&](const json& v) {
    if (!v.is_array() || v.empty()) throw ConfigError("effective.methods: expected a nonempty array");
    e.methods.clear();
    for (const auto& s : v) {
      if (!s.is_string()) throw ConfigError("effective.methods: expected strings");
      const auto name = s.get<std::string>();
      if (name != "corrector" && name != "hessian" && name != "contour")
        throw ConfigError("effective.methods: unknown method '" + name + "'");
      if (std::find(e.methods.begin(), e.methods.end(), name) != e.methods.end())
        throw ConfigError("effective.methods: duplicate method '" + name + "'");
      e.methods.push_back(name);
    }
  });
  maybe(j, "agreement_tol", [&](const json& v) { e.agreement_tol = get_number(v, "effective.agreement_tol"); });
  maybe(j, "hessian_step", [&](const json& v) { e.hessian_step = get_number(v, "effective.hessian_step"); });
  maybe(j, "contour_nodes", [&](const json& v) { e.contour_nodes = get_int(v, "effective.contour_nodes"); });
  maybe(j, "max_contour_nodes", [&](const json& v) { e.max_contour_nodes = get_int(v, "effective.max_contour_nodes"); });
  if (!(e.agreement_tol > 0.0)) throw ConfigError("effective.agreement_tol: must be positive");
  if (!(e.hessian_step > 0.0)) throw ConfigError("effective.hessian_step: must be positive");
  if (e.contour_nodes < 4 || e.max_contour_nodes < e.contour_nodes)
    throw ConfigError("effective.contour_nodes: need 4 <= contour_nodes <= max_contour_nodes");
}

void parse_constants(const json& j, ConstantsConfig& c) {
  only_keys(j, "constants", {"samples_per_unit", "angular_samples", "sandwich_radii"});
  maybe(j, "samples_per_unit", [&](const json& v) { c.samples_per_unit = get_number(v, "constants.samples_per_unit"); });
  maybe(j, "angular_samples", [&](const json& v) { c.angular_samples = get_int(v, "constants.angular_samples"); });
  maybe(j, "sandwich_radii", [&](const json& v) { c.sandwich_radii = get_numbers(v, "constants.sandwich_radii"); });
  if (!(c.samples_per_unit >= 1.0)) throw ConfigError("constants.samples_per_unit: must be at least 1");
  if (c.angular_samples < 4) throw ConfigError("constants.angular_samples: must be at least 4");
  for (double r : c.sandwich_radii)
    if (!(r > 0.0)) throw ConfigError("constants.sandwich_radii: radii must be positive");
}

void parse_sweep(const json& j, SweepConfig& s) {
  only_keys(j, "sweep", {"eps", "grid_per_dim", "local_radial", "local_directions", "refine", "truncation_check",
                         "fit_points", "slope_min", "slope_max", "spread_points", "spread_max"});
  maybe(j, "eps", [&](const json& v) { s.eps = get_numbers(v, "sweep.eps"); });
  maybe(j, "grid_per_dim", [&](const json& v) { s.grid_per_dim = get_int(v, "sweep.grid_per_dim"); });
  maybe(j, "local_radial", [&](const json& v) { s.local_radial = get_int(v, "sweep.local_radial"); });
  maybe(j, "local_directions", [&](const json& v) { s.local_directions = get_int(v, "sweep.local_directions"); });
  maybe(j, "refine", [&](const json& v) { s.refine = get_bool(v, "sweep.refine"); });
  maybe(j, "truncation_check", [&](const json& v) { s.truncation_check = get_bool(v, "sweep.truncation_check"); });
  maybe(j, "fit_points", [&](const json& v) { s.fit_points = get_int(v, "sweep.fit_points"); });
  maybe(j, "slope_min", [&](const json& v) { s.slope_min = get_number(v, "sweep.slope_min"); });
  maybe(j, "slope_max", [&](const json& v) { s.slope_max = get_number(v, "sweep.slope_max"); });
  maybe(j, "spread_points", [&](const json& v) { s.spread_points = get_int(v, "sweep.spread_points"); });
  maybe(j, "spread_max", [&](const json& v) { s.spread_max = get_number(v, "sweep.spread_max"); });
  if (!s.eps.empty()) {
    if (s.eps.size() < 3) throw ConfigError("sweep.eps: at least 3 values are needed to fit a slope");
    for (double e : s.eps)
      if (!(e > 0.0)) throw ConfigError("sweep.eps: values must be positive");
  }
  if (s.grid_per_dim < 0 || s.grid_per_dim == 1) throw ConfigError("sweep.grid_per_dim: must be 0 or at least 2");
  if (s.local_radial < 0 || s.local_directions < 0) throw ConfigError("sweep: local point counts must be >= 0");
  if (s.fit_points < 2) throw ConfigError("sweep.fit_points: must be at least 2");
  if (s.spread_points < 2) throw ConfigError("sweep.spread_points: must be at least 2");
  if (!(s.slope_min < s.slope_max)) throw ConfigError("sweep: slope_min must be below slope_max");
}

void parse_oracle(const json& j, OracleConfig& o, int dim) {
  only_keys(j, "oracle", {"enabled", "grid", "form_grid", "lattice", "truncation", "tol", "xi", "seed"});
  maybe(j, "enabled", [&](const json& v) { o.enabled = get_bool(v, "oracle.enabled"); });
  maybe(j, "grid", [&](const json& v) { o.grid = get_int(v, "oracle.grid"); });
  maybe(j, "form_grid", [&](const json& v) { o.form_grid = get_int(v, "oracle.form_grid"); });
  maybe(j, "lattice", [&](const json& v) { o.lattice = get_int(v, "oracle.lattice"); });
  maybe(j, "truncation", [&](const json& v) { o.truncation = get_int(v, "oracle.truncation"); });
  maybe(j, "tol", [&](const json& v) { o.tol = get_number(v, "oracle.tol"); });
  maybe(j, "seed", [&](const json& v) { o.seed = static_cast<unsigned>(get_int(v, "oracle.seed")); });
  maybe(j, "xi", [&](const json& v) {
    if (!v.is_array()) throw ConfigError("oracle.xi: expected an array of points");
    for (const auto& p : v) {
      const auto x = get_numbers(p, "oracle.xi[]");
      if (static_cast<int>(x.size()) != dim) throw ConfigError("oracle.xi: each point needs d coordinates");
      o.xi.push_back(Eigen::Map<const Vec>(x.data(), dim));
    }
  });
  if ((o.grid != 0 && o.grid < 16) || (o.form_grid != 0 && o.form_grid < 16))
    throw ConfigError("oracle: grids need at least 16 points per dimension");
  if (o.lattice < 0 || o.truncation < 0 || o.tol < 0.0) throw ConfigError("oracle: negative setting");
}

void parse_dispersion(const json& j, DispersionConfig& d) {
  only_keys(j, "dispersion", {"points", "xi_max", "fit_rows", "fit_slope_min"});
  maybe(j, "points", [&](const json& v) { d.points = get_int(v, "dispersion.points"); });
  maybe(j, "xi_max", [&](const json& v) { d.xi_max = get_number(v, "dispersion.xi_max"); });
  maybe(j, "fit_rows", [&](const json& v) { d.fit_rows = get_int(v, "dispersion.fit_rows"); });
  maybe(j, "fit_slope_min", [&](const json& v) { d.fit_slope_min = get_number(v, "dispersion.fit_slope_min"); });
  if (d.points != 0 && d.points < 3) throw ConfigError("dispersion.points: must be 0 or at least 3");
  if (!(d.xi_max > 0.0 && d.xi_max <= kPi)) throw ConfigError("dispersion.xi_max: must lie in (0, pi]");
  if (d.fit_rows < 2) throw ConfigError("dispersion.fit_rows: must be at least 2");
}

}  // namespace

Kernel RunConfig::make_kernel() const {
  const auto& k = kernel;
  if (k.family == "gaussian") {
    std::vector<double> s = k.sigma;
    if (s.size() == 1) s.assign(k.dimension, s.front());
    if (static_cast<int>(s.size()) != k.dimension) throw ConfigError("kernel.sigma: need 1 or d widths");
    return Kernel::gaussian(k.dimension, s, k.mass);
  }
  if (k.dimension != 1) throw ConfigError("kernel: the " + k.family + " family is one-dimensional");
  if (k.family == "ball") return Kernel::ball(k.radius, k.mass);
  return Kernel::sampled(k.support, k.samples, k.l2_data);
}

Modulation RunConfig::make_modulation() const {
  const int d = kernel.dimension;
  std::vector<ModulationTerm> terms = modulation.terms;
  terms.push_back({IVec::Zero(d), IVec::Zero(d), modulation.mean});
  for (const auto& c : modulation.cos_products) {
    for (int sp : {1, -1})
      for (int sq : {1, -1}) {
        IVec p = IVec::Zero(d), q = IVec::Zero(d);
        p(c.axis) = sp;
        q(c.axis) = sq;
        terms.push_back({p, q, 0.25 * c.amplitude});
      }
  }
  return Modulation::from_terms(d, terms, modulation.certify_grid);
}

int RunConfig::truncation() const {
  if (N > 0) return N;
  return kernel.dimension == 1 ? 32 : kernel.dimension == 2 ? 8 : 4;
}

std::vector<double> RunConfig::eps_list() const {
  std::vector<double> e = sweep.eps;
  if (e.empty()) {
    const int lo = kernel.dimension == 1 ? 3 : 2;
    const int hi = kernel.dimension == 1 ? 9 : 6;
    for (int k = lo; k <= hi; ++k) e.push_back(std::ldexp(1.0, -k));
  }
  std::sort(e.begin(), e.end(), std::greater<>());
  if (std::adjacent_find(e.begin(), e.end()) != e.end()) throw ConfigError("sweep.eps: duplicate values");
  return e;
}

RunConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  only_keys(j, "config", {"schema_version", "kernel", "modulation", "N", "effective", "constants", "sweep",
                          "projector_bounds", "oracle", "dispersion"});
  RunConfig c;
  maybe(j, "schema_version", [&](const json& v) {
    if (get_int(v, "schema_version") != 1) throw ConfigError("schema_version: only version 1 is understood");
  });
  maybe(j, "kernel", [&](const json& v) { parse_kernel(v, c.kernel); });
  const int d = c.kernel.dimension;
  maybe(j, "modulation", [&](const json& v) { parse_modulation(v, c.modulation, d); });
  maybe(j, "N", [&](const json& v) { c.N = get_int(v, "N"); });
  if (c.N < 0) throw ConfigError("N: must be positive");
  maybe(j, "effective", [&](const json& v) { parse_effective(v, c.effective); });
  maybe(j, "constants", [&](const json& v) { parse_constants(v, c.constants); });
  maybe(j, "sweep", [&](const json& v) { parse_sweep(v, c.sweep); });
  maybe(j, "projector_bounds", [&](const json& v) {
    only_keys(v, "projector_bounds", {"samples", "seed"});
    maybe(v, "samples", [&](const json& x) { c.projector_bounds.samples = get_int(x, "projector_bounds.samples"); });
    maybe(v, "seed", [&](const json& x) { c.projector_bounds.seed = static_cast<unsigned>(get_int(x, "projector_bounds.seed")); });
    if (c.projector_bounds.samples < 1) throw ConfigError("projector_bounds.samples: must be at least 1");
  });
  maybe(j, "oracle", [&](const json& v) { parse_oracle(v, c.oracle, d); });
  maybe(j, "dispersion", [&](const json& v) { parse_dispersion(v, c.dispersion); });

  // Build the model once so that invalid kernels, modulations and truncations
  // surface as configuration errors.
  try {
    const Kernel a = c.make_kernel();
    const Modulation mu = c.make_modulation();
    if (c.truncation() < mu.bandwidth())
      throw ConfigError("N = " + std::to_string(c.truncation()) + " is below the modulation bandwidth " +
                        std::to_string(mu.bandwidth()));
    c.eps_list();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace nonloc
