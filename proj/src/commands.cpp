#include "nonloc/commands.hpp"

#include "nonloc/constants.hpp"
#include "nonloc/corrector.hpp"
#include "nonloc/homogenize.hpp"
#include "nonloc/oracle.hpp"
#include "nonloc/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace nonloc {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

json to_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json to_json(const Mat& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(to_json(Vec(m.row(i).transpose())));
  return a;
}

json to_json(const IVec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json to_json(const GapChain& g) {
  return {{"d0", g.d0}, {"delta0", g.delta0}, {"C1", g.C1}, {"C2", g.C2}, {"S", g.S}, {"calC", g.calC}};
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string write_text(const fs::path& dir, const std::string& name, const std::string& text) {
  fs::create_directories(dir);
  const fs::path p = dir / name;
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + p.string() + "'");
  out << text;
  return p.string();
}

std::string write_json(const fs::path& dir, const std::string& name, const json& j) {
  return write_text(dir, name, j.dump(2) + "\n");
}

json header(const RunConfig& cfg, const std::string& command) {
  return {{"schema_version", kSchemaVersion},
          {"command", command},
          {"model",
           {{"dimension", cfg.kernel.dimension},
            {"kernel_family", cfg.kernel.family},
            {"N", cfg.truncation()}}}};
}

void finish(CommandResult& r) { r.exit_code = r.failures.empty() ? kExitPass : kExitCheckFailed; }

double measured_gap(const Kernel& a, const Modulation& mu, const Truncation& trunc) {
  return spectral_data(assemble_matrix(a, mu, Vec::Zero(trunc.dim), trunc), 2).gap();
}

ArOptions ar_options(const RunConfig& cfg) {
  ArOptions o;
  o.samples_per_unit = cfg.constants.samples_per_unit;
  o.angular_samples = cfg.constants.angular_samples;
  return o;
}

json chain_json(const ConstantChain& c, double gap) {
  json j = {{"mu_minus", c.mu_minus}, {"mu_plus", c.mu_plus}, {"M1", c.M1},   {"M2", c.M2},
            {"M3", c.M3},             {"l1_norm", c.l1},      {"big_M", c.big_M}, {"A_pi", c.A_pi},
            {"r_a", c.r_a},           {"A_ra", c.A_ra},       {"C_a", c.C_a},   {"certified", to_json(c.certified)},
            {"warnings", c.warnings}};
  if (c.empirical) {
    j["empirical"] = to_json(*c.empirical);
    j["empirical"]["measured_gap"] = gap;
  }
  return j;
}

}  // namespace

CommandResult cmd_effective(const RunConfig& cfg, const fs::path& out_dir) {
  const Kernel a = cfg.make_kernel();
  const Modulation mu = cfg.make_modulation();
  const Truncation trunc(cfg.truncation(), cfg.kernel.dimension);
  CommandResult r;
  json rep = header(cfg, "effective");
  json methods = json::object();
  std::vector<std::pair<std::string, Mat>> ok;
  bool pd = true;

  for (const auto& name : cfg.effective.methods) {
    json m;
    try {
      EffectiveMatrix e;
      if (name == "corrector") {
        e = effective_matrix_corrector(a, mu, trunc);
        m["max_corrector_residual"] = e.max_corrector_residual;
      } else if (name == "hessian") {
        e = effective_matrix_hessian(a, mu, trunc, cfg.effective.hessian_step);
        m["step"] = e.step;
        m["richardson_change"] = e.richardson_change;
      } else {
        e = effective_matrix_contour(a, mu, trunc, cfg.effective.contour_nodes, cfg.effective.max_contour_nodes);
        m["contour_nodes"] = e.contour_nodes;
        m["G0_residual"] = e.G0_residual;
        m["Gi_residual"] = e.Gi_residual;
        m["Gij_off_projection"] = e.Gij_offP;
        m["route_residual"] = e.route_residual;
        m["dA_compression"] = e.dA_compression;
      }
      m["g0"] = to_json(e.g0);
      m["symmetry_defect"] = e.symmetry_defect;
      m["imaginary_part"] = e.imaginary_part;
      m["min_eigenvalue"] = e.min_eigenvalue;
      m["warnings"] = e.warnings;
      if (!(e.min_eigenvalue > 0.0)) pd = false;
      ok.emplace_back(name, e.g0);
    } catch (const InvalidArgument&) {
      throw;
    } catch (const Error& ex) {
      m["error"] = ex.what();
      r.failures.push_back("method " + name + " failed: " + ex.what());
    }
    methods[name] = m;
  }
  rep["methods"] = methods;

  json pairs = json::object();
  double worst = 0.0;
  for (std::size_t i = 0; i < ok.size(); ++i)
    for (std::size_t j = i + 1; j < ok.size(); ++j) {
      const double dist = relative_distance(ok[i].second, ok[j].second);
      pairs[ok[i].first + "-" + ok[j].first] = dist;
      worst = std::max(worst, dist);
    }
  const bool agree = worst <= cfg.effective.agreement_tol;
  rep["agreement"] = {{"pairwise_relative_distance", pairs},
                      {"max", worst},
                      {"tolerance", cfg.effective.agreement_tol},
                      {"pass", agree}};
  if (!agree) r.failures.push_back("effective-matrix methods disagree: max relative distance " + fmt(worst));
  rep["positive_definite"] = pd;
  if (!pd) r.failures.push_back("effective matrix is not positive definite");

  // Cell correctors on the truncated basis.
  const CorrectorSolution cs = solve_cell(a, mu, trunc);
  json corr = json::array();
  for (int j = 0; j < trunc.dim; ++j) {
    json coeffs = json::array();
    for (int o = 0; o < trunc.size(); ++o)
      coeffs.push_back({{"n", to_json(IVec(trunc.index(o)))}, {"re", cs.v[j](o).real()}, {"im", cs.v[j](o).imag()}});
    corr.push_back({{"j", j + 1},
                    {"residual", cs.residual[j]},
                    {"reality_defect", cs.reality_defect[j]},
                    {"norm", cs.v[j].norm()},
                    {"coefficients", coeffs}});
  }
  rep["correctors"] = corr;
  const double tc = truncation_convergence(a, mu, trunc);
  json tcj = {{"relative_change_N_to_2N", tc}, {"tolerance", 1e-8}};
  if (tc > 1e-8) tcj["warning"] = "g0 changes by " + fmt(tc) + " between N and 2N; increase N";
  rep["truncation_convergence"] = tcj;
  rep["pass"] = r.failures.empty();
  rep["failures"] = r.failures;
  r.files.push_back(write_json(out_dir, "effective.json", rep));
  r.report = rep;
  finish(r);
  return r;
}

CommandResult cmd_constants(const RunConfig& cfg, const fs::path& out_dir) {
  const Kernel a = cfg.make_kernel();
  const Modulation mu = cfg.make_modulation();
  const Truncation trunc(cfg.truncation(), cfg.kernel.dimension);
  const ArOptions opt = ar_options(cfg);
  CommandResult r;
  json rep = header(cfg, "constants");
  const auto& b = mu.bounds();
  rep["modulation_bounds"] = {{"lower", b.lower},   {"upper", b.upper},   {"grid_min", b.grid_min},
                              {"grid_max", b.grid_max}, {"margin", b.margin}, {"grid_per_dim", b.grid_per_dim}};
  const double gap = measured_gap(a, mu, trunc);
  const ConstantChain chain = threshold_chain(a, mu, gap, opt);
  rep["chain"] = chain_json(chain, gap);
  if (gap < chain.certified.d0 * (1.0 - 1e-9))
    r.failures.push_back("measured gap " + fmt(gap) + " is below the certified lower bound " + fmt(chain.certified.d0));
  rep["gap_check"] = {{"measured", gap}, {"certified_lower", chain.certified.d0}, {"pass", gap >= chain.certified.d0 * (1.0 - 1e-9)}};

  try {
    const SandwichBounds ab = sandwich_bounds(a, cfg.constants.sandwich_radii, opt);
    json checks = json::array();
    for (const auto& s : ab.A_checks)
      checks.push_back({{"r", s.r}, {"lower", s.lower}, {"A_r", s.value}, {"upper", s.upper}, {"pass", s.pass}});
    rep["sandwich_bounds"] = {{"rho0", ab.rho0},
                       {"r0", ab.r0},
                       {"tau0", ab.tau0},
                       {"N_a", ab.N_a},
                       {"kappa", ab.kappa},
                       {"big_M", {{"value", ab.big_M}, {"lower", ab.M_lower}, {"upper", ab.M_upper}, {"pass", ab.M_pass}}},
                       {"mass_within_rho0", {{"value", ab.tail_mass_within}, {"required", 0.875 * a.l1_norm()}, {"pass", ab.tail_mass_pass}}},
                       {"A_r", checks},
                       {"pass", ab.all_pass()}};
    if (!ab.all_pass()) r.failures.push_back("kernel sandwich bounds failed");
  } catch (const L2NormUnavailable&) {
    rep["sandwich_bounds"] = "unavailable";
  }
  rep["pass"] = r.failures.empty();
  rep["failures"] = r.failures;
  r.files.push_back(write_json(out_dir, "constants.json", rep));
  r.report = rep;
  finish(r);
  return r;
}

CommandResult cmd_dispersion(const RunConfig& cfg, const fs::path& out_dir) {
  const Kernel a = cfg.make_kernel();
  const Modulation mu = cfg.make_modulation();
  const int d = cfg.kernel.dimension;
  const Truncation trunc(cfg.truncation(), d);
  const EffectiveMatrix em = effective_matrix_corrector(a, mu, trunc);
  const ConstantChain chain = threshold_chain(a, mu, std::nullopt, ar_options(cfg));
  const int G = cfg.dispersion.points > 0 ? cfg.dispersion.points : (d == 1 ? 257 : d == 2 ? 33 : 9);
  const double xm = cfg.dispersion.xi_max;

  long total = 1;
  for (int k = 0; k < d; ++k) total *= G;
  struct Row {
    Vec xi;
    double l1, l2, q;
  };
  std::vector<Row> rows(total);
  parallel_for(static_cast<int>(total), [&](int f) {
    long rem = f;
    Vec xi(d);
    for (int k = 0; k < d; ++k) {
      xi(k) = -xm + 2.0 * xm * static_cast<double>(rem % G) / (G - 1);
      rem /= G;
    }
    Eigen::SelfAdjointEigenSolver<CMat> es(assemble_matrix(a, mu, xi, trunc), Eigen::EigenvaluesOnly);
    rows[f] = {xi, es.eigenvalues()(0), es.eigenvalues()(1), xi.dot(em.g0 * xi)};
  });

  std::string csv;
  for (int k = 0; k < d; ++k) csv += "xi_" + std::to_string(k + 1) + ",";
  csv += "lambda1,lambda2,q,lambda1_minus_q,lambda1_lower_bound\n";
  const double lc = chain.mu_minus * chain.C_a;
  const double l2_lower = chain.mu_minus * chain.A_pi;
  const double tol = 1e-12;
  int fail1 = 0, fail2 = 0;
  for (const auto& row : rows) {
    const double lb = lc * row.xi.squaredNorm();
    for (int k = 0; k < d; ++k) csv += fmt(row.xi(k)) + ",";
    csv += fmt(row.l1) + "," + fmt(row.l2) + "," + fmt(row.q) + "," + fmt(row.l1 - row.q) + "," + fmt(lb) + "\n";
    fail1 += row.l1 < lb - tol;
    fail2 += row.l2 < l2_lower - tol;
  }

  // Local order of lambda1 - q on the rows nearest xi = 0.
  std::vector<const Row*> near;
  for (const auto& row : rows)
    if (row.xi.norm() > 0.0 && std::abs(row.l1 - row.q) > 0.0) near.push_back(&row);
  std::stable_sort(near.begin(), near.end(), [](const Row* x, const Row* y) { return x->xi.norm() < y->xi.norm(); });
  const int k = std::min<int>(cfg.dispersion.fit_rows, static_cast<int>(near.size()));
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < k; ++i) {
    const double x = std::log(near[i]->xi.norm()), y = std::log(std::abs(near[i]->l1 - near[i]->q));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = k * sxx - sx * sx;
  const double slope = denom > 0.0 ? (k * sxy - sx * sy) / denom : 0.0;

  CommandResult r;
  if (fail1) r.failures.push_back(std::to_string(fail1) + " rows violate lambda1 >= mu_- C(a) |xi|^2");
  if (fail2) r.failures.push_back(std::to_string(fail2) + " rows violate lambda2 >= mu_- A_pi");
  const bool slope_ok = denom > 0.0 && slope >= cfg.dispersion.fit_slope_min;
  if (!slope_ok) r.failures.push_back("local order of lambda1 - q is " + fmt(slope));
  r.report = header(cfg, "dispersion");
  r.report["rows"] = total;
  r.report["lambda1_lower_bound_failures"] = fail1;
  r.report["lambda2_lower_bound"] = {{"value", l2_lower}, {"failures", fail2}};
  r.report["local_order"] = {{"slope", slope}, {"rows", k}, {"minimum", cfg.dispersion.fit_slope_min}, {"pass", slope_ok}};
  r.report["g0"] = to_json(em.g0);
  r.files.push_back(write_text(out_dir, "dispersion.csv", csv));
  finish(r);
  return r;
}

CommandResult cmd_verify(const RunConfig& cfg, const fs::path& out_dir) {
  const Kernel a = cfg.make_kernel();
  const Modulation mu = cfg.make_modulation();
  const int d = cfg.kernel.dimension;
  const Truncation trunc(cfg.truncation(), d);
  CommandResult r;
  json rep = header(cfg, "verify");
  json checks = json::object();
  auto check = [&](const std::string& name, bool pass, const std::string& detail) {
    checks[name] = pass;
    if (!pass) r.failures.push_back(name + ": " + detail);
  };

  const EffectiveMatrix em = effective_matrix_corrector(a, mu, trunc);
  const double gap = measured_gap(a, mu, trunc);
  const ConstantChain chain = threshold_chain(a, mu, gap, ar_options(cfg));
  rep["g0"] = to_json(em.g0);
  rep["chain"] = chain_json(chain, gap);

  // Discrepancy sweep.
  SweepOptions so;
  so.grid_per_dim = cfg.sweep.grid_per_dim;
  so.local_radial = cfg.sweep.local_radial;
  so.local_directions = cfg.sweep.local_directions;
  so.refine = cfg.sweep.refine;
  so.truncation_check = cfg.sweep.truncation_check;
  so.fit_points = cfg.sweep.fit_points;
  const SweepResult sw = discrepancy_sweep(a, mu, em.g0, cfg.eps_list(), trunc, chain, so);
  json rows = json::array();
  bool bound_ok = true;
  for (const auto& row : sw.rows) {
    rows.push_back({{"eps", row.eps},
                    {"D", row.D},
                    {"D_over_eps", row.ratio},
                    {"certified_bound", row.certified_bound},
                    {"grid_slack", row.grid_slack},
                    {"truncation_slack", row.truncation_slack},
                    {"argmax_xi", to_json(row.argmax)},
                    {"bound_pass", row.bound_pass}});
    bound_ok = bound_ok && row.bound_pass;
  }
  const double spread = sw.ratio_spread(cfg.sweep.spread_points);
  const bool slope_ok = sw.slope >= cfg.sweep.slope_min && sw.slope <= cfg.sweep.slope_max;
  rep["sweep"] = {{"rows", rows},
                  {"slope", sw.slope},
                  {"slope_residual", sw.slope_residual},
                  {"fit_points", sw.fit_points},
                  {"slope_range", {cfg.sweep.slope_min, cfg.sweep.slope_max}},
                  {"ratio_spread", spread},
                  {"ratio_spread_points", cfg.sweep.spread_points},
                  {"ratio_spread_max", cfg.sweep.spread_max},
                  {"fibers_evaluated", sw.fibers_evaluated}};
  check("sweep_bound", bound_ok, "D(eps) exceeds calC eps plus slack");
  check("sweep_slope", slope_ok, "fitted slope " + fmt(sw.slope) + " outside the configured range");
  check("sweep_order_sharpness", spread < cfg.sweep.spread_max, "D/eps spread " + fmt(spread));
  write_text(out_dir, "sweep.csv", sw.csv());
  r.files.push_back((out_dir / "sweep.csv").string());

  // Inequalities near xi = 0.
  const auto samples = random_ball_samples(d, cfg.projector_bounds.samples, chain.certified.delta0, cfg.projector_bounds.seed);
  const ProjectorBoundsReport th = projector_bounds_check(a, mu, em.g0, trunc, samples, chain);
  double r1 = 0.0, r2 = 0.0, rv = 0.0;
  for (const auto& s : th.samples) {
    if (s.norm_xi > 0.0) {
      r1 = std::max(r1, s.F_minus_P / s.C1_bound);
      r2 = std::max(r2, s.AF_minus_qP / s.C2_bound);
    }
    rv = std::max(rv, s.riesz_vs_eig);
  }
  rep["projector_bounds"] = {{"samples", th.samples.size()},
                      {"C1", th.C1},
                      {"C2", th.C2},
                      {"delta0", th.delta0},
                      {"failures_projector", th.failures1},
                      {"failures_compression", th.failures2},
                      {"max_ratio_projector", r1},
                      {"max_ratio_compression", r2},
                      {"max_riesz_vs_eigenvector", rv},
                      {"pass", th.pass()}};
  check("projector_bounds", th.pass(), std::to_string(th.failures1 + th.failures2) + " sample failures");

  // Two-term split on a coarse grid plus the samples above.
  std::vector<Vec> route = samples;
  {
    const int G = d == 1 ? 65 : d == 2 ? 9 : 5;
    long total = 1;
    for (int k = 0; k < d; ++k) total *= G;
    for (long f = 0; f < total; ++f) {
      long rem = f;
      Vec xi(d);
      for (int k = 0; k < d; ++k) {
        xi(k) = -kPi + kTwoPi * static_cast<double>(rem % G) / (G - 1);
        rem /= G;
      }
      route.push_back(xi);
    }
  }
  const ProofRouteReport pr = proof_route_check(a, mu, em.g0, cfg.eps_list(), route, trunc, chain);
  rep["proof_route"] = {{"inner_samples", pr.inner_samples},   {"outer_samples", pr.outer_samples},
                        {"split_failures", pr.split_failures}, {"S_failures", pr.S_failures},
                        {"outer_failures", pr.outer_failures}, {"max_tA_over_S_eps", pr.max_tA_over_S_eps},
                        {"pass", pr.pass()}};
  check("proof_route", pr.pass(), "split or outer-fiber bound failed");

  // Real-space oracle.
  if (cfg.oracle.enabled) {
    const bool smooth = cfg.kernel.family == "gaussian";
    const double tol = cfg.oracle.tol > 0.0 ? cfg.oracle.tol : (smooth ? 1e-6 : 1e-3);
    const int G = cfg.oracle.grid > 0 ? cfg.oracle.grid : (d == 1 ? 512 : d == 2 ? 32 : 16);
    const int Gf = cfg.oracle.form_grid > 0 ? cfg.oracle.form_grid : (d == 1 ? 128 : 16);
    const int No = cfg.oracle.truncation > 0 ? cfg.oracle.truncation
                                             : std::min(trunc.N, std::max(8, mu.diagonal_spread() + 1));
    const Truncation to(No, d);
    const CellGrid grid = make_cell_grid(a, G, cfg.oracle.lattice);
    const CellGrid fgrid = make_cell_grid(a, Gf, cfg.oracle.lattice);
    std::vector<Vec> xis = cfg.oracle.xi;
    if (xis.empty()) xis = {Vec::Zero(d), Vec::Constant(d, 0.37), Vec::Constant(d, -1.1)};
    json pts = json::array();
    double worst_g = 0.0, worst_f = 0.0;
    unsigned seed = cfg.oracle.seed;
    const int fband = std::max(0, std::min(No - mu.diagonal_spread(), Gf / 8));
    for (const Vec& xi : xis) {
      const double g = galerkin_vs_realspace(a, mu, xi, to, grid, seed++);
      const CVec u = synthesize(random_trig_coefficients(to, fband, seed++), to, fgrid);
      const FormValues fv = quadratic_form_check(a, mu, xi, u, fgrid);
      const double frel = std::abs(fv.direct - fv.symmetrized) / std::max(std::abs(fv.symmetrized), 1e-300);
      worst_g = std::max(worst_g, g);
      worst_f = std::max(worst_f, frel);
      pts.push_back({{"xi", to_json(xi)},
                     {"galerkin_relative_difference", g},
                     {"form_direct", fv.direct},
                     {"form_direct_imag", fv.direct_imag},
                     {"form_symmetrized", fv.symmetrized},
                     {"form_relative_difference", frel}});
    }
    rep["oracle"] = {{"grid", G},         {"form_grid", Gf},       {"lattice", grid.L}, {"truncation", No},
                     {"tolerance", tol},  {"points", pts},         {"max_galerkin", worst_g},
                     {"max_form", worst_f}};
    check("oracle_galerkin", worst_g <= tol, "relative difference " + fmt(worst_g));
    check("oracle_form", worst_f <= tol, "relative difference " + fmt(worst_f));
  }

  rep["checks"] = checks;
  rep["pass"] = r.failures.empty();
  rep["failures"] = r.failures;
  r.files.push_back(write_json(out_dir, "verify.json", rep));
  r.report = rep;
  finish(r);
  return r;
}

CommandResult run_command(const std::string& name, const RunConfig& cfg, const fs::path& out_dir) {
  if (name == "effective") return cmd_effective(cfg, out_dir);
  if (name == "constants") return cmd_constants(cfg, out_dir);
  if (name == "dispersion") return cmd_dispersion(cfg, out_dir);
  if (name == "verify") return cmd_verify(cfg, out_dir);
  throw ConfigError("unknown command '" + name + "'");
}

}  // namespace nonloc
