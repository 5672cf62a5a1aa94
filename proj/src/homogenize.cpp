#include "nonloc/homogenize.hpp"

#include "nonloc/parallel.hpp"
#include "nonloc/quadrature.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <sstream>

namespace nonloc {

namespace {

double quad_form(const Mat& g0, const Vec& k) { return k.dot(g0 * k); }

Vec q_on_basis(const Mat& g0, const Vec& xi, const Truncation& trunc) {
  Vec q(trunc.size());
  for (int o = 0; o < trunc.size(); ++o) q(o) = quad_form(g0, xi + kTwoPi * trunc.index(o).cast<double>());
  return q;
}

// Lexicographically negative points are mirror images of evaluated ones.
bool lex_negative(const Vec& xi) {
  for (Eigen::Index i = 0; i < xi.size(); ++i) {
    if (xi(i) < 0.0) return true;
    if (xi(i) > 0.0) return false;
  }
  return false;
}

std::vector<Vec> directions(int d, int n) {
  std::vector<Vec> out;
  if (d == 1) {
    out.emplace_back(Vec::Ones(1));
  } else if (d == 2) {
    for (int j = 0; j < n; ++j) {
      const double t = kPi * j / n;
      Vec u(2);
      u << std::cos(t), std::sin(t);
      out.push_back(u);
    }
  } else {
    for (int j = 0; j < n; ++j) {
      const double z = (j + 0.5) / n;
      const double r = std::sqrt(1.0 - z * z);
      const double phi = j * kPi * (3.0 - std::sqrt(5.0));
      Vec u(3);
      u << r * std::cos(phi), r * std::sin(phi), z;
      out.push_back(u);
    }
  }
  return out;
}

bool in_cell(const Vec& xi) { return (xi.array().abs() <= kPi).all(); }

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

FiberSpectrum fiber_spectrum(const Kernel& a, const Modulation& mu, const Mat& g0, const Vec& xi,
                             const Truncation& trunc) {
  Eigen::SelfAdjointEigenSolver<CMat> es(assemble_matrix(a, mu, xi, trunc));
  if (es.info() != Eigen::Success) throw SolverError("Hermitian eigensolver did not converge");
  return {xi, es.eigenvalues(), es.eigenvectors(), q_on_basis(g0, xi, trunc)};
}

double fiber_discrepancy(const FiberSpectrum& s, double eps) {
  if (!(eps > 0.0)) throw InvalidArgument("fiber_discrepancy: eps must be positive");
  const double e2 = eps * eps;
  const Vec w = (e2 / (s.eigenvalues.array().max(0.0) + e2)).matrix();
  CMat M = s.eigenvectors * w.cast<cplx>().asDiagonal() * s.eigenvectors.adjoint();
  M.diagonal() -= (e2 / (s.q_diag.array() + e2)).matrix().cast<cplx>();
  return spectral_norm_hermitian(M);
}

double fiber_discrepancy(const Kernel& a, const Modulation& mu, const Mat& g0, const Vec& xi, double eps,
                         const Truncation& trunc) {
  return fiber_discrepancy(fiber_spectrum(a, mu, g0, xi, trunc), eps);
}

double SweepResult::ratio_spread(int k) const {
  std::vector<SweepRow> sorted = rows;
  std::sort(sorted.begin(), sorted.end(), [](const SweepRow& x, const SweepRow& y) { return x.eps < y.eps; });
  k = std::min<int>(k, static_cast<int>(sorted.size()));
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (int i = 0; i < k; ++i) {
    lo = std::min(lo, sorted[i].ratio);
    hi = std::max(hi, sorted[i].ratio);
  }
  return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
}

std::string SweepResult::csv() const {
  std::ostringstream out;
  out << "eps,D,D_over_eps,certified_bound,grid_slack,truncation_slack";
  const int d = rows.empty() ? 0 : static_cast<int>(rows.front().argmax.size());
  for (int i = 0; i < d; ++i) out << ",argmax_xi_" << i + 1;
  out << "\n";
  for (const auto& r : rows) {
    out << fmt(r.eps) << ',' << fmt(r.D) << ',' << fmt(r.ratio) << ',' << fmt(r.certified_bound) << ','
        << fmt(r.grid_slack) << ',' << fmt(r.truncation_slack);
    for (int i = 0; i < d; ++i) out << ',' << fmt(r.argmax(i));
    out << "\n";
  }
  return out.str();
}

SweepResult discrepancy_sweep(const Kernel& a, const Modulation& mu, const Mat& g0, const std::vector<double>& eps_list,
                              const Truncation& trunc, const ConstantChain& chain, const SweepOptions& opt) {
  if (eps_list.size() < 3) throw InvalidArgument("discrepancy_sweep: need at least 3 epsilon values");
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    if (!(eps_list[i] > 0.0)) throw InvalidArgument("discrepancy_sweep: epsilon values must be positive");
    if (i > 0 && !(eps_list[i] < eps_list[i - 1]))
      throw InvalidArgument("discrepancy_sweep: epsilon values must be strictly decreasing");
  }
  const int d = trunc.dim;
  const int G = opt.grid_per_dim > 0 ? opt.grid_per_dim : (d == 1 ? 257 : 33);
  if (G < 2) throw InvalidArgument("discrepancy_sweep: grid_per_dim must be at least 2");
  const int n_rad = opt.local_radial > 0 ? opt.local_radial : (d == 1 ? 25 : 12);
  const int n_dir = opt.local_directions > 0 ? opt.local_directions : (d == 1 ? 1 : d == 2 ? 8 : 16);
  const std::size_t ne = eps_list.size();

  Eigen::SelfAdjointEigenSolver<Mat> ges(g0, Eigen::EigenvaluesOnly);
  const double g_min = ges.eigenvalues()(0);
  const double g_max = ges.eigenvalues()(d - 1);
  if (!(g_min > 0.0)) throw InvalidArgument("discrepancy_sweep: effective matrix is not positive definite");

  // Uniform grid over [-pi, pi]^d, half of it by evenness.
  std::vector<Vec> grid;
  {
    long total = 1;
    for (int k = 0; k < d; ++k) total *= G;
    for (long flat = 0; flat < total; ++flat) {
      long r = flat;
      Vec xi(d);
      for (int k = 0; k < d; ++k) {
        xi(k) = -kPi + kTwoPi * static_cast<double>(r % G) / (G - 1);
        r /= G;
      }
      if (!lex_negative(xi)) grid.push_back(xi);
    }
  }
  std::vector<std::vector<double>> grid_D(grid.size(), std::vector<double>(ne, 0.0));
  parallel_for(static_cast<int>(grid.size()), [&](int i) {
    const FiberSpectrum s = fiber_spectrum(a, mu, g0, grid[i], trunc);
    for (std::size_t e = 0; e < ne; ++e) grid_D[i][e] = fiber_discrepancy(s, eps_list[e]);
  });

  SweepResult res;
  res.calC = chain.certified.calC;
  res.fibers_evaluated = static_cast<int>(grid.size());
  const auto dirs = directions(d, n_dir);
  const double lip_A = chain.mu_plus * std::ldexp(1.0, d) * chain.M1;
  const double h = kTwoPi / (G - 1);

  for (std::size_t e = 0; e < ne; ++e) {
    const double eps = eps_list[e];
    std::vector<std::pair<Vec, double>> evaluated;
    for (std::size_t i = 0; i < grid.size(); ++i) evaluated.emplace_back(grid[i], grid_D[i][e]);

    // Points at the scale |xi| ~ eps / sqrt(g0), where the peak sits.
    std::vector<Vec> local;
    for (int j = 0; j < n_rad; ++j) {
      const double s = 0.05 * std::pow(400.0, n_rad > 1 ? static_cast<double>(j) / (n_rad - 1) : 0.5);
      for (const auto& u : dirs) {
        const Vec xi = s * eps / std::sqrt(g_max) * u;
        if (in_cell(xi)) local.push_back(xi);
      }
    }
    std::vector<double> local_D(local.size());
    parallel_for(static_cast<int>(local.size()), [&](int i) {
      local_D[i] = fiber_discrepancy(a, mu, g0, local[i], eps, trunc);
    });
    for (std::size_t i = 0; i < local.size(); ++i) evaluated.emplace_back(local[i], local_D[i]);
    res.fibers_evaluated += static_cast<int>(local.size());

    auto best = std::max_element(evaluated.begin(), evaluated.end(),
                                 [](const auto& x, const auto& y) { return x.second < y.second; });
    Vec arg = best->first;
    double Dmax = best->second;

    if (opt.refine) {
      auto f = [&](const Vec& xi) {
        ++res.fibers_evaluated;
        return fiber_discrepancy(a, mu, g0, xi, eps, trunc);
      };
      if (d == 1) {
        // Golden-section search between the neighbours of the argmax.
        double lo = -kPi, hi = kPi;
        for (const auto& [x, v] : evaluated) {
          if (x(0) < arg(0)) lo = std::max(lo, x(0));
          if (x(0) > arg(0)) hi = std::min(hi, x(0));
        }
        const double g = 0.6180339887498949;
        double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
        double f1 = f(Vec::Constant(1, x1)), f2 = f(Vec::Constant(1, x2));
        for (int it = 0; it < 60 && hi - lo > 1e-10 * (std::abs(arg(0)) + eps); ++it) {
          if (f1 >= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(Vec::Constant(1, x1));
          } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(Vec::Constant(1, x2));
          }
        }
        if (std::max(f1, f2) > Dmax) {
          Dmax = std::max(f1, f2);
          arg = Vec::Constant(1, f1 >= f2 ? x1 : x2);
        }
      } else {
        // Compass search.
        double step = std::min(h, std::max(0.25 * arg.norm(), 1e-3 * eps));
        for (int it = 0; it < 200 && step > 1e-6 * (arg.norm() + eps); ++it) {
          bool moved = false;
          for (int k = 0; k < d && !moved; ++k) {
            for (double sgn : {1.0, -1.0}) {
              Vec q = arg;
              q(k) += sgn * step;
              if (!in_cell(q)) continue;
              const double v = f(q);
              if (v > Dmax) {
                Dmax = v;
                arg = q;
                moved = true;
                break;
              }
            }
          }
          if (!moved) step *= 0.5;
        }
      }
    }

    SweepRow row;
    row.eps = eps;
    row.D = Dmax;
    row.ratio = Dmax / eps;
    row.certified_bound = chain.certified.calC * eps;
    // Lipschitz bound of the discrepancy in xi times half the grid-cell diagonal.
    const double lip = lip_A / (eps * eps) + 0.6495190528383290 * g0.norm() / (std::sqrt(g_min) * eps);
    row.grid_slack = lip * 0.5 * h * std::sqrt(static_cast<double>(d));
    if (opt.truncation_check) {
      const double D2 = fiber_discrepancy(a, mu, g0, arg, eps, Truncation(2 * trunc.N, d));
      row.truncation_slack = std::abs(D2 - Dmax);
    }
    row.argmax = arg;
    row.bound_pass = row.D <= row.certified_bound + row.grid_slack + row.truncation_slack;
    res.rows.push_back(row);
  }

  // Least-squares slope of log D against log eps over the smallest eps.
  std::vector<SweepRow> sorted = res.rows;
  std::sort(sorted.begin(), sorted.end(), [](const SweepRow& x, const SweepRow& y) { return x.eps < y.eps; });
  const int k = std::min<int>(opt.fit_points, static_cast<int>(sorted.size()));
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < k; ++i) {
    const double x = std::log(sorted[i].eps), y = std::log(sorted[i].D);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  res.fit_points = k;
  res.slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  const double icpt = (sy - res.slope * sx) / k;
  double ss = 0.0;
  for (int i = 0; i < k; ++i) {
    const double r = std::log(sorted[i].D) - (icpt + res.slope * std::log(sorted[i].eps));
    ss += r * r;
  }
  res.slope_residual = std::sqrt(ss / k);
  return res;
}

ProofRouteReport proof_route_check(const Kernel& a, const Modulation& mu, const Mat& g0, const std::vector<double>& eps_list,
                                   const std::vector<Vec>& xi_samples, const Truncation& trunc,
                                   const ConstantChain& chain) {
  ProofRouteReport rep;
  const int z = trunc.zero_offset();
  const double delta0 = chain.certified.delta0;
  const double lc = chain.mu_minus * chain.C_a;
  for (const Vec& xi : xi_samples) {
    const FiberSpectrum s = fiber_spectrum(a, mu, g0, xi, trunc);
    const bool inner = xi.norm() <= delta0;
    (inner ? rep.inner_samples : rep.outer_samples)++;
    for (double eps : eps_list) {
      const double e2 = eps * eps;
      const double D = fiber_discrepancy(s, eps);
      const Vec w = (e2 / (s.eigenvalues.array().max(0.0) + e2)).matrix();
      if (inner) {
        CMat M = s.eigenvectors * w.cast<cplx>().asDiagonal() * s.eigenvectors.adjoint();
        M(z, z) -= e2 / (s.q_diag(z) + e2);
        const double tA = spectral_norm_hermitian(M);
        double t_high = 0.0;
        for (int o = 0; o < trunc.size(); ++o)
          if (o != z) t_high = std::max(t_high, e2 / (s.q_diag(o) + e2));
        const double tol = 1e-12;
        if (D > tA + t_high + tol) ++rep.split_failures;
        if (tA > chain.certified.S * eps + tol) ++rep.S_failures;
        rep.max_tA_over_S_eps = std::max(rep.max_tA_over_S_eps, tA / (chain.certified.S * eps));
      } else {
        const double rnorm = w.maxCoeff();
        if (rnorm > e2 / (lc * xi.squaredNorm() + e2) + 1e-12) ++rep.outer_failures;
      }
    }
  }
  return rep;
}

ProjectorBoundsReport projector_bounds_check(const Kernel& a, const Modulation& mu, const Mat& g0, const Truncation& trunc,
                                const std::vector<Vec>& xi_samples, const ConstantChain& chain, double C1_scale,
                                double C2_scale) {
  ProjectorBoundsReport rep;
  rep.C1 = chain.certified.C1 * C1_scale;
  rep.C2 = chain.certified.C2 * C2_scale;
  rep.delta0 = chain.certified.delta0;
  const int d = trunc.dim;
  const int m = trunc.size();
  const int z = trunc.zero_offset();
  const SpectralData s0 = spectral_data(assemble_matrix(a, mu, Vec::Zero(d), trunc), 2);
  const double gap = s0.gap();
  CMat P = CMat::Zero(m, m);
  P(z, z) = 1.0;
  // Contour quadrature reaches about 1e-10; allow that much at xi = 0.
  const double tol = 1e-9;

  rep.samples.resize(xi_samples.size());
  for (const Vec& xi : xi_samples)
    if (xi.norm() > rep.delta0 * (1.0 + 1e-12))
      throw InvalidArgument("projector_bounds_check: sample outside |xi| <= delta0");
  parallel_for(static_cast<int>(xi_samples.size()), [&](int i) {
    ProjectorSample& t = rep.samples[i];
    t.xi = xi_samples[i];
    t.norm_xi = t.xi.norm();
    const CMat A = assemble_matrix(a, mu, t.xi, trunc);
    const ProjectorResult pr = spectral_projector_riesz(A, gap);
    t.contour_nodes = pr.nodes;
    t.F_minus_P = spectral_norm(pr.F - P);
    t.C1_bound = rep.C1 * t.norm_xi;
    t.AF_minus_qP = spectral_norm(A * pr.F - quad_form(g0, t.xi) * P);
    t.C2_bound = rep.C2 * std::pow(t.norm_xi, 3);
    const SpectralData sd = spectral_data(A, 1);
    t.riesz_vs_eig = spectral_norm(pr.F - sd.eigenvectors.col(0) * sd.eigenvectors.col(0).adjoint());
    t.pass1 = t.F_minus_P <= t.C1_bound + tol;
    t.pass2 = t.AF_minus_qP <= t.C2_bound + tol;
  });
  for (const auto& t : rep.samples) {
    rep.failures1 += !t.pass1;
    rep.failures2 += !t.pass2;
  }
  return rep;
}

std::vector<Vec> random_ball_samples(int dim, int n, double radius, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<Vec> out;
  for (int i = 0; i < n; ++i) {
    Vec v(dim);
    for (int k = 0; k < dim; ++k) v(k) = normal(rng);
    const double r = radius * std::pow(unif(rng), 1.0 / dim);
    out.push_back(r * v / v.norm());
  }
  return out;
}

namespace {

// eps^2 (A(xi) + eps^2)^{-1} f and diag(eps^2 / (q + eps^2)) f.
std::pair<CVec, CVec> fiber_solutions(const Kernel& a, const Modulation& mu, const Mat& g0, const Vec& xi,
                                      double eps, const Truncation& trunc, const CVec& f) {
  const double e2 = eps * eps;
  const CMat A = assemble_matrix(a, mu, xi, trunc);
  Eigen::LLT<CMat> llt(A + e2 * CMat::Identity(A.rows(), A.cols()));
  if (llt.info() != Eigen::Success) throw SolverError("fiber resolvent factorization failed");
  const CVec ue = e2 * llt.solve(f);
  const Vec q = q_on_basis(g0, xi, trunc);
  const CVec u0 = ((e2 / (q.array() + e2)).matrix().cast<cplx>()).cwiseProduct(f);
  return {ue, u0};
}

std::vector<std::pair<double, double>> graded_rule(double scale, int points) {
  // Panels [0, scale/4, scale/2, scale, 2 scale, ...] up to pi, mirrored.
  std::vector<double> edges{0.0};
  for (double e = 0.25 * scale; e < kPi; e *= 2.0) edges.push_back(e);
  edges.push_back(kPi);
  const GaussLegendreRule gl = gauss_legendre(points);
  std::vector<std::pair<double, double>> rule;
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    const double c = 0.5 * (edges[p] + edges[p + 1]);
    const double hw = 0.5 * (edges[p + 1] - edges[p]);
    for (std::size_t k = 0; k < gl.nodes.size(); ++k) {
      rule.emplace_back(c + hw * gl.nodes[k], hw * gl.weights[k]);
      rule.emplace_back(-(c + hw * gl.nodes[k]), hw * gl.weights[k]);
    }
  }
  return rule;
}

}  // namespace

SolvePairResult solve_pair(const Kernel& a, const Modulation& mu, const Mat& g0, const RhsSpec& rhs, double eps,
                           const Truncation& trunc, const ConstantChain* chain, int quad_points) {
  if (!(eps > 0.0)) throw InvalidArgument("solve_pair: eps must be positive");
  const int d = trunc.dim;
  SolvePairResult res;

  if (const auto* pw = std::get_if<PlaneWaves>(&rhs)) {
    if (pw->waves.empty()) throw InvalidArgument("solve_pair: no plane waves given");
    // Group waves by quasi-momentum: K = eps k = xi + 2 pi n with xi in [-pi, pi).
    std::map<std::vector<long long>, std::pair<Vec, CVec>> fibers;
    double f2 = 0.0, err2 = 0.0, ue2 = 0.0, u02 = 0.0;
    for (const auto& w : pw->waves) {
      if (w.k.size() != d) throw InvalidArgument("solve_pair: wave vector has the wrong dimension");
      const Vec K = eps * w.k;
      IVec n(d);
      Vec xi(d);
      for (int i = 0; i < d; ++i) {
        n(i) = static_cast<int>(std::floor((K(i) + kPi) / kTwoPi));
        xi(i) = K(i) - kTwoPi * n(i);
      }
      if (!trunc.contains(n)) throw InvalidArgument("solve_pair: plane wave frequency lies beyond the truncation");
      std::vector<long long> key(d);
      for (int i = 0; i < d; ++i) key[i] = std::llround(xi(i) * 1e12);
      auto& slot = fibers[key];
      if (slot.second.size() == 0) slot = {xi, CVec::Zero(trunc.size())};
      slot.second(trunc.offset(n)) += w.amplitude;
    }
    for (const auto& [key, fib] : fibers) {
      const auto& [xi, f] = fib;
      const auto [ue, u0] = fiber_solutions(a, mu, g0, xi, eps, trunc, f);
      f2 += f.squaredNorm();
      err2 += (ue - u0).squaredNorm();
      ue2 += ue.squaredNorm();
      u02 += u0.squaredNorm();
      const double cut = 1e-300;
      for (int o = 0; o < trunc.size(); ++o) {
        const Vec freq = (xi + kTwoPi * trunc.index(o).cast<double>()) / eps;
        if (std::abs(ue(o)) > cut) res.u_eps.push_back({freq, ue(o)});
        if (std::abs(u0(o)) > cut) res.u0.push_back({freq, u0(o)});
      }
    }
    res.rhs_norm = std::sqrt(f2);
    res.error_norm = std::sqrt(err2);
    res.u_eps_norm = std::sqrt(ue2);
    res.u0_norm = std::sqrt(u02);
  } else {
    const auto& bump = std::get<GaussianBump>(rhs);
    if (d > 2) throw InvalidArgument("solve_pair: Gaussian bump supports d <= 2");
    if (bump.center.size() != d) throw InvalidArgument("solve_pair: bump center has the wrong dimension");
    if (!(bump.width > 0.0)) throw InvalidArgument("solve_pair: bump width must be positive");
    const double s = bump.width;
    auto F_hat = [&](const Vec& k) {
      const double mag = bump.amplitude * std::pow(kTwoPi * s * s, 0.5 * d) * std::exp(-0.5 * s * s * k.squaredNorm());
      const double ph = -k.dot(bump.center);
      return cplx(mag * std::cos(ph), mag * std::sin(ph));
    };
    const auto rule1 = graded_rule(eps / s, quad_points > 0 ? quad_points : (d == 1 ? 8 : 4));
    std::vector<std::pair<Vec, double>> nodes;
    if (d == 1) {
      for (const auto& [x, w] : rule1) nodes.emplace_back(Vec::Constant(1, x), w);
    } else {
      for (const auto& [x, wx] : rule1)
        for (const auto& [y, wy] : rule1) {
          Vec xi(2);
          xi << x, y;
          nodes.emplace_back(xi, wx * wy);
        }
    }
    std::vector<std::array<double, 4>> parts(nodes.size());
    parallel_for(static_cast<int>(nodes.size()), [&](int i) {
      const Vec& xi = nodes[i].first;
      CVec f(trunc.size());
      for (int o = 0; o < trunc.size(); ++o) f(o) = F_hat((xi + kTwoPi * trunc.index(o).cast<double>()) / eps);
      const auto [ue, u0] = fiber_solutions(a, mu, g0, xi, eps, trunc, f);
      parts[i] = {f.squaredNorm(), (ue - u0).squaredNorm(), ue.squaredNorm(), u0.squaredNorm()};
    });
    std::array<double, 4> sum{0, 0, 0, 0};
    for (std::size_t i = 0; i < nodes.size(); ++i)
      for (int c = 0; c < 4; ++c) sum[c] += nodes[i].second * parts[i][c];
    // Plancherel with dk = eps^{-d} dxi.
    const double scale = 1.0 / (std::pow(kTwoPi, d) * std::pow(eps, d));
    res.rhs_norm = std::sqrt(scale * sum[0]);
    res.error_norm = std::sqrt(scale * sum[1]);
    res.u_eps_norm = std::sqrt(scale * sum[2]);
    res.u0_norm = std::sqrt(scale * sum[3]);
  }
  res.relative_error = res.rhs_norm > 0.0 ? res.error_norm / res.rhs_norm : 0.0;
  if (chain) res.bound = chain->certified.calC * eps * res.rhs_norm;
  return res;
}

}  // namespace nonloc
