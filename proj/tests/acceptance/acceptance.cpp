// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "nonloc/constants.hpp"
#include "nonloc/corrector.hpp"
#include "nonloc/fiber.hpp"
#include "nonloc/homogenize.hpp"
#include "nonloc/oracle.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

using namespace nonloc;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* title, double time_limit_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& ex) {
    o = {false, std::string("exception: ") + ex.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = secs <= time_limit_s;
  const bool ok = o.pass && in_time;
  if (!ok) ++failures;
  std::printf("[%s] criterion %d: %s | %s | %.2f s (limit %.0f s)%s\n", ok ? "PASS" : "FAIL", id, title,
              o.detail.c_str(), secs, time_limit_s, in_time ? "" : " TIMEOUT");
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

Kernel gauss(double sigma, int d = 1) { return Kernel::gaussian(d, std::vector<double>(d, sigma)); }
Modulation standard_mu(int d = 1, double amp = 0.5) { return Modulation::cosine_product(d, amp); }

double measured_gap(const Kernel& a, const Modulation& mu, const Truncation& t) {
  return spectral_data(assemble_matrix(a, mu, Vec::Zero(t.dim), t), 2).gap();
}

// Composite Simpson on [lo, hi] with n (even) panels.
double simpson(const std::function<double(double)>& f, double lo, double hi, int n) {
  const double h = (hi - lo) / n;
  double s = f(lo) + f(hi);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(lo + i * h);
  return s * h / 3.0;
}

// inf over |k| >= r of 1 - Re â(k) by a dense grid on [r, r + span].
double grid_inf(const std::function<double(double)>& ahat, double r, double span, int n) {
  double m = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= n; ++i) m = std::min(m, 1.0 - ahat(r + span * i / n));
  return m;
}

Outcome homogeneous_closed_form() {
  double worst = 0.0, worst_corr = 0.0;
  for (double sigma : {0.3, 1.0}) {
    const Kernel a = gauss(sigma);
    const Modulation mu = Modulation::constant(1, 1.0);
    const Truncation t(16, 1);
    const double want = 0.5 * sigma * sigma;
    for (const EffectiveMatrix& e : {effective_matrix_corrector(a, mu, t), effective_matrix_hessian(a, mu, t),
                                     effective_matrix_contour(a, mu, t)})
      worst = std::max(worst, std::abs(e.g0(0, 0) - want) / want);
    const CorrectorSolution cs = solve_cell(a, mu, t);
    worst_corr = std::max(worst_corr, cs.v[0].norm());
  }
  return {worst <= 1e-8 && worst_corr <= 1e-10,
          fmt("max rel err of g0 %.2e (tol 1e-8), corrector norm %.2e (tol 1e-10)", worst, worst_corr)};
}

Outcome three_methods() {
  const Kernel a = gauss(0.3);
  const Modulation mu = standard_mu();
  const Truncation t(32, 1);
  const Mat g1 = effective_matrix_corrector(a, mu, t).g0;
  const Mat g2 = effective_matrix_hessian(a, mu, t).g0;
  const Mat g3 = effective_matrix_contour(a, mu, t).g0;
  const double worst = std::max({relative_distance(g1, g2), relative_distance(g1, g3), relative_distance(g2, g3)});
  return {worst <= 1e-6, fmt("g0 = %.15f, max pairwise distance %.2e (tol 1e-6)", g1(0, 0), worst)};
}

struct SweepSetup {
  Kernel a;
  Modulation mu;
  Truncation t;
  Mat g0;
  ConstantChain chain;
  std::vector<double> eps;
};

SweepSetup setup(const Kernel& a, const Modulation& mu, int N, int e_hi, int e_lo) {
  const Truncation t(N, a.dimension());
  SweepSetup s{a, mu, t, effective_matrix_corrector(a, mu, t).g0, threshold_chain(a, mu, measured_gap(a, mu, t)), {}};
  for (int e = e_hi; e <= e_lo; ++e) s.eps.push_back(std::ldexp(1.0, -e));
  return s;
}

Outcome rate(const SweepResult& sw, double lo, double hi, std::string& bound_detail, bool& bound_ok,
             double& spread) {
  bound_ok = std::all_of(sw.rows.begin(), sw.rows.end(), [](const SweepRow& r) { return r.bound_pass; });
  double worst = 0.0;
  for (const auto& r : sw.rows) worst = std::max(worst, r.D / (r.certified_bound + r.grid_slack + r.truncation_slack));
  bound_detail = fmt("max D/(calC eps + slack) %.2e", worst);
  spread = sw.ratio_spread(4);
  const bool ok = sw.slope >= lo && sw.slope <= hi;
  return {ok, fmt("slope %.4f on %.0f smallest eps (range [%.2f, %.2f])", sw.slope, static_cast<double>(sw.fit_points), lo, hi)};
}

void rate_criterion() {
  SweepResult sw;
  double elapsed = 0.0;
  {
    const auto t0 = std::chrono::steady_clock::now();
    const SweepSetup s = setup(gauss(0.3), standard_mu(), 32, 3, 9);
    sw = discrepancy_sweep(s.a, s.mu, s.g0, s.eps, s.t, s.chain);
    elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
  std::string bdetail;
  bool bound_ok = false;
  double spread = 0.0;
  const Outcome slope = rate(sw, 0.9, 1.1, bdetail, bound_ok, spread);
  const double limit = 300.0;
  const std::string when = fmt(" | sweep %.2f s (limit %.0f s)", elapsed, limit);
  const bool in_time = elapsed <= limit;
  auto line = [&](const char* tag, bool ok, const std::string& d) {
    ok = ok && in_time;
    if (!ok) ++failures;
    std::printf("[%s] criterion 3%s: discrepancy rate | %s%s\n", ok ? "PASS" : "FAIL", tag, d.c_str(), when.c_str());
  };
  std::string ratios;
  for (const auto& r : sw.rows) ratios += fmt(" %.4g", r.ratio);
  line("a", slope.pass, slope.detail + ", D/eps:" + ratios);
  line("b", bound_ok, bdetail + fmt(", calC %.4g", sw.calC));
  line("c", spread < 3.0, fmt("D/eps spread %.4f over 4 smallest eps (limit 3)", spread));
  std::fflush(stdout);
}

Outcome projector_bounds() {
  int total = 0, bad = 0;
  std::string detail;
  for (bool modulated : {false, true}) {
    const Kernel a = gauss(0.3);
    const Modulation mu = modulated ? standard_mu() : Modulation::constant(1, 1.0);
    const Truncation t(32, 1);
    const Mat g0 = effective_matrix_corrector(a, mu, t).g0;
    const ConstantChain chain = threshold_chain(a, mu, measured_gap(a, mu, t));
    const auto xs = random_ball_samples(1, 50, chain.certified.delta0, 7);
    const ProjectorBoundsReport rep = projector_bounds_check(a, mu, g0, t, xs, chain);
    total += static_cast<int>(rep.samples.size());
    bad += rep.failures1 + rep.failures2;
    double r1 = 0.0, r2 = 0.0;
    for (const auto& s : rep.samples) {
      r1 = std::max(r1, s.F_minus_P / s.C1_bound);
      r2 = std::max(r2, s.AF_minus_qP / s.C2_bound);
    }
    detail += std::string(modulated ? "modulated" : "mu = 1") + fmt(": max ratios %.3g, %.3g; ", r1, r2);
  }
  return {bad == 0 && total == 100, fmt("%.0f/%.0f samples pass, ", static_cast<double>(total - bad), static_cast<double>(total)) + detail};
}

Outcome spectral_bounds() {
  const Kernel a = gauss(0.3);
  const Modulation mu = standard_mu();
  const Truncation t(32, 1);
  const ConstantChain c = threshold_chain(a, mu);
  int fail = 0;
  double margin1 = std::numeric_limits<double>::infinity(), margin2 = margin1;
  for (int i = 0; i < 257; ++i) {
    const double x = -kPi + 2.0 * kPi * i / 256;
    const Vec xi = Vec::Constant(1, x);
    const SpectralData sd = spectral_data(assemble_matrix(a, mu, xi, t), 2);
    const double lb1 = c.mu_minus * c.C_a * x * x, lb2 = c.mu_minus * c.A_pi;
    if (sd.eigenvalues(0) < lb1 - 1e-12 || sd.eigenvalues(1) < lb2) ++fail;
    if (x != 0.0) margin1 = std::min(margin1, sd.eigenvalues(0) / lb1);
    margin2 = std::min(margin2, sd.eigenvalues(1) / lb2);
  }
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-kPi, kPi);
  int lfail = 0;
  double lratio = 0.0;
  for (int k = 0; k < 50; ++k) {
    const Vec x = Vec::Constant(1, U(rng)), y = Vec::Constant(1, U(rng));
    const double lhs = spectral_norm(assemble_matrix(a, mu, x, t) - assemble_matrix(a, mu, y, t));
    const double rhs = c.mu_plus * 2.0 * c.M1 * std::abs(x(0) - y(0));
    lratio = std::max(lratio, lhs / rhs);
    if (lhs > rhs) ++lfail;
  }
  const CMat A0 = assemble_matrix(a, mu, Vec::Zero(1), t);
  const FiberDerivatives der = assemble_derivatives(a, mu, t);
  int hfail = 0;
  double hratio = 0.0;
  for (int k = 0; k < 20; ++k) {
    const Vec xi = Vec::Constant(1, U(rng));
    const double r = hadamard_remainder(assemble_matrix(a, mu, xi, t), A0, der, xi);
    const double bound = std::pow(std::abs(xi(0)), 3) * c.mu_plus * c.M3 / 6.0;
    hratio = std::max(hratio, r / bound);
    if (r > bound) ++hfail;
  }
  return {fail == 0 && lfail == 0 && hfail == 0,
          fmt("grid failures %.0f (min ratios %.3g, %.3g), ", static_cast<double>(fail), margin1, margin2) +
              fmt("Lipschitz failures %.0f (max ratio %.3g), Hadamard failures %.0f (max ratio %.3g)", static_cast<double>(lfail), lratio,
                  static_cast<double>(hfail), hratio)};
}

Outcome sandwiches() {
  const std::vector<double> radii{0.1, 1.0, kPi, 10.0};
  std::string detail;
  bool ok = true;
  // Gaussian sigma = 1 and ball of radius 1 with unit mass.
  struct Case {
    const char* name;
    Kernel a;
    std::function<double(double)> density;  // a(z)
    std::function<double(double)> ahat;     // â(k)
    double support;
  };
  const std::vector<Case> cases{
      {"gaussian", gauss(1.0), [](double z) { return std::exp(-0.5 * z * z) / std::sqrt(2 * kPi); },
       [](double k) { return std::exp(-0.5 * k * k); }, 12.0},
      {"ball", Kernel::ball(1.0), [](double z) { return std::abs(z) <= 1.0 ? 0.5 : 0.0; },
       [](double k) { return k == 0.0 ? 1.0 : std::sin(k) / k; }, 1.0}};
  for (const Case& c : cases) {
    const SandwichBounds b = sandwich_bounds(c.a, radii);
    // Second moment by quadrature; one-dimensional, so it is the smallest eigenvalue.
    const double M = simpson([&](double z) { return z * z * c.density(z); }, -c.support, c.support, 20000);
    bool agree = std::abs(M - b.big_M) <= 1e-8 * M;
    double worst = 0.0;
    for (const auto& s : b.A_checks) {
      const double Ar = grid_inf(c.ahat, s.r, 400.0, 400000);
      worst = std::max(worst, std::abs(Ar - s.value));
      agree = agree && s.value <= Ar + 1e-12 && s.value >= Ar - 1e-4;
    }
    ok = ok && agree && b.all_pass();
    detail += std::string(c.name) + (b.all_pass() ? ": sandwiches pass" : ": sandwiches FAIL") +
              fmt(", M %.6g vs quadrature %.6g, max |A_r - grid| %.1e; ", b.big_M, M, worst);
  }
  return {ok, detail};
}

Outcome oracle() {
  const Modulation mu = standard_mu();
  const Truncation t(8, 1);
  const std::vector<Vec> xis{Vec::Zero(1), Vec::Constant(1, 0.37), Vec::Constant(1, -1.1), Vec::Constant(1, kPi)};
  double g = 0.0, b = 0.0, f = 0.0;
  const Kernel smooth = gauss(0.3);
  const CellGrid grid = make_cell_grid(smooth, 512);
  const Kernel ball = Kernel::ball(0.25);
  const CellGrid bgrid = make_cell_grid(ball, 512);
  const CellGrid fgrid = make_cell_grid(smooth, 128);
  unsigned seed = 3;
  for (const Vec& xi : xis) {
    g = std::max(g, galerkin_vs_realspace(smooth, mu, xi, t, grid, seed++));
    b = std::max(b, galerkin_vs_realspace(ball, mu, xi, t, bgrid, seed++));
    const CVec u = synthesize(random_trig_coefficients(t, 6, seed++), t, fgrid);
    const FormValues fv = quadratic_form_check(smooth, mu, xi, u, fgrid);
    f = std::max(f, std::abs(fv.direct - fv.symmetrized) / std::abs(fv.symmetrized));
  }
  return {g <= 1e-6 && b <= 1e-3 && f <= 1e-6,
          fmt("smooth %.2e (tol 1e-6), ball %.2e (tol 1e-3), form identity %.2e (tol 1e-6)", g, b, f)};
}

Outcome two_dimensional() {
  const Kernel a = gauss(0.3, 2);
  const Modulation mu = standard_mu(2, 0.25);
  const SweepSetup s = setup(a, mu, 8, 2, 6);
  const Mat g00 = effective_matrix_corrector(a, Modulation::constant(2, 1.0), s.t).g0;
  const double sym = (s.g0 - s.g0.transpose()).cwiseAbs().maxCoeff();
  const Eigen::SelfAdjointEigenSolver<Mat> es(s.g0);
  const double lo = Eigen::SelfAdjointEigenSolver<Mat>(s.g0 - mu.lower() * g00).eigenvalues().minCoeff();
  const double hi = Eigen::SelfAdjointEigenSolver<Mat>(mu.upper() * g00 - s.g0).eigenvalues().minCoeff();
  SweepOptions so;
  so.fit_points = static_cast<int>(s.eps.size());
  const SweepResult sw = discrepancy_sweep(s.a, s.mu, s.g0, s.eps, s.t, s.chain, so);
  const bool ok = sym <= 1e-12 && es.eigenvalues().minCoeff() > 0 && lo >= -1e-12 && hi >= -1e-12 &&
                  sw.slope >= 0.85 && sw.slope <= 1.15;
  return {ok, fmt("g0 eigenvalues (%.6g, %.6g), ordering margins (%.3g, %.3g), ", es.eigenvalues()(0),
                  es.eigenvalues()(1), lo, hi) +
                  fmt("slope %.4f over %.0f eps (range [0.85, 1.15])", sw.slope, static_cast<double>(sw.fit_points))};
}

}  // namespace

int main() {
  criterion(1, "homogeneous closed form", 5, homogeneous_closed_form);
  criterion(2, "three-method agreement", 30, three_methods);
  rate_criterion();
  criterion(4, "projector and compression bounds", 60, projector_bounds);
  criterion(5, "spectral lower bounds, Lipschitz, Hadamard", 60, spectral_bounds);
  criterion(6, "kernel sandwich bounds", 30, sandwiches);
  criterion(7, "oracle equivalence", 120, oracle);
  criterion(8, "d = 2 smoke", 900, two_dimensional);
  std::printf("%s: %d failing line(s)\n", failures ? "FAILED" : "ALL PASSED", failures);
  return failures ? 1 : 0;
}
