#include "nonloc/constants.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>

namespace nonloc {

namespace {

constexpr double kGolden = 0.6180339887498949;

double golden_min(const std::function<double(double)>& f, double lo, double hi, double& best_x) {
  double a = lo, b = hi;
  double x1 = b - kGolden * (b - a), x2 = a + kGolden * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > 1e-12 * std::max(1.0, std::abs(b))) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kGolden * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kGolden * (b - a);
      f2 = f(x2);
    }
  }
  best_x = f1 <= f2 ? x1 : x2;
  return std::min(f1, f2);
}

// Unit direction from angle parameters: d = 2 uses one angle, d = 3 polar/azimuth.
Vec direction(int d, const Vec& angles) {
  Vec u(d);
  if (d == 1) {
    u(0) = 1.0;
  } else if (d == 2) {
    u << std::cos(angles(0)), std::sin(angles(0));
  } else {
    const double st = std::sin(angles(0));
    u << st * std::cos(angles(1)), st * std::sin(angles(1)), std::cos(angles(0));
  }
  return u;
}

struct AnnulusMin {
  double value = 0.0;
  double radius = 0.0;
  Vec angles;
  double dr = 0.0;
  double dang = 0.0;
};

AnnulusMin annulus_grid_min(const Kernel& a, double r, double R, const ArOptions& opt) {
  const int d = a.dimension();
  const long cap = d == 1 ? opt.max_radial_samples : std::min(opt.max_radial_samples, 2048);
  const long nr = std::clamp<long>(static_cast<long>(std::ceil(opt.samples_per_unit * (R - r))), 2, cap);
  const double dr = (R - r) / nr;

  std::vector<Vec> angles;
  double dang = 0.0;
  if (d == 1) {
    angles.emplace_back(Vec::Zero(1));
  } else if (d == 2) {
    // Â is even, so half the circle suffices.
    const int n = std::max(opt.angular_samples, 4);
    dang = kPi / n;
    for (int j = 0; j < n; ++j) angles.emplace_back(Vec::Constant(1, j * dang));
  } else {
    // Fibonacci points on the upper hemisphere.
    const int n = std::max(opt.angular_samples * 8, 16);
    dang = std::sqrt(kTwoPi / n);
    for (int j = 0; j < n; ++j) {
      const double z = (j + 0.5) / n;
      Vec ang(2);
      ang << std::acos(z), std::fmod(j * kPi * (3.0 - std::sqrt(5.0)), kTwoPi);
      angles.push_back(ang);
    }
  }

  AnnulusMin best;
  best.value = std::numeric_limits<double>::infinity();
  best.dr = dr;
  best.dang = dang;
  for (const auto& ang : angles) {
    const Vec u = direction(d, ang);
    for (long k = 0; k <= nr; ++k) {
      const double rho = r + k * dr;
      const double v = a.symbol(rho * u);
      if (v < best.value) {
        best.value = v;
        best.radius = rho;
        best.angles = ang;
      }
    }
  }
  return best;
}

// Compass search in (radius, angles) started from the grid minimiser.
AnnulusMin refine(const Kernel& a, double r, double R, AnnulusMin start) {
  const int d = a.dimension();
  if (d == 1) {
    double x = start.radius;
    auto f = [&](double y) { return a.symbol(Vec::Constant(1, y)); };
    const double v = golden_min(f, std::max(r, start.radius - start.dr), std::min(R, start.radius + start.dr), x);
    if (v < start.value) {
      start.value = v;
      start.radius = x;
    }
    return start;
  }
  const int np = d;  // radius plus d - 1 angles
  Vec p(np), step(np);
  p(0) = start.radius;
  p.tail(np - 1) = start.angles;
  step(0) = start.dr;
  step.tail(np - 1).setConstant(start.dang);
  auto f = [&](const Vec& q) {
    const double rho = std::clamp(q(0), r, R);
    return a.symbol(rho * direction(d, q.tail(np - 1)));
  };
  double fp = f(p);
  for (int it = 0; it < 10000 && step.maxCoeff() > 1e-13; ++it) {
    bool moved = false;
    for (int k = 0; k < np && !moved; ++k) {
      for (double s : {1.0, -1.0}) {
        Vec q = p;
        q(k) += s * step(k);
        if (k == 0) q(0) = std::clamp(q(0), r, R);
        const double fq = f(q);
        if (fq < fp) {
          p = q;
          fp = fq;
          moved = true;
          break;
        }
      }
    }
    if (!moved) step *= 0.5;
  }
  if (fp < start.value) {
    start.value = fp;
    start.radius = std::clamp(p(0), r, R);
    start.angles = p.tail(np - 1);
  }
  return start;
}

double kappa(int dm1) {
  switch (dm1) {
    case 0: return 1.0;
    case 1: return 2.0;
    case 2: return kPi;
    default: return std::pow(kPi, 0.5 * dm1) / std::tgamma(0.5 * dm1 + 1.0);
  }
}

}  // namespace

double big_M(const Kernel& a) {
  Eigen::SelfAdjointEigenSolver<Mat> es(a.moments().second, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

ArResult A_r(const Kernel& a, double r, const ArOptions& opt) {
  if (!(r > 0.0) || !std::isfinite(r)) throw InvalidArgument("A_r: r must be positive");
  ArResult res;
  res.r = r;
  double R = 2.0 * r;
  AnnulusMin m;
  for (;;) {
    m = annulus_grid_min(a, r, R, opt);
    if (a.l1_norm() - a.fourier_tail_bound(R) >= m.value) break;
    if (R > 1e6 * std::max(1.0, r)) {
      res.tail_certified = false;
      res.warning = "tail bound did not dominate the annulus minimum; outer radius capped";
      break;
    }
    R *= 2.0;
  }
  m = refine(a, r, R, m);
  res.value = m.value;
  res.outer_radius = R;
  res.argmin = m.radius * direction(a.dimension(), m.angles);
  return res;
}

GapChain gap_chain(int d, double mu_minus, double mu_plus, double M1, double M2, double M3, double C_a,
                   double d0) {
  GapChain g;
  const double two_d = std::ldexp(1.0, d);
  g.d0 = d0;
  g.delta0 = std::min(1.0, d0 / (3.0 * two_d * M1 * mu_plus));
  g.C1 = 6.0 * (kPi + 2.0) / kPi * two_d / d0 * mu_plus * M1;
  g.C2 = (kPi + 2.0) / (2.0 * kPi) *
         (mu_plus * M3 + mu_plus * mu_plus / d0 * (3.0 * M2 + M3) * (12.0 * M1 + 3.0 * M2 + M3) +
          std::pow(mu_plus, 3) / (d0 * d0) * std::pow(6.0 * M1 + 3.0 * M2 + M3, 3));
  const double lc = mu_minus * C_a;
  g.S = 2.0 * g.C1 / std::sqrt(lc) + g.C2 / std::pow(lc, 1.5) + 1.0 / std::sqrt(2.0 * d0 / 3.0);
  g.calC = 2.0 / (std::sqrt(lc) * g.delta0) + g.S;
  return g;
}

ConstantChain threshold_chain(const Kernel& a, const Modulation& mu, std::optional<double> measured_gap,
                              const ArOptions& opt) {
  if (a.dimension() != mu.dimension()) throw InvalidArgument("kernel and modulation dimensions disagree");
  ConstantChain c;
  const int d = a.dimension();
  c.dimension = d;
  c.mu_minus = mu.lower();
  c.mu_plus = mu.upper();
  c.M1 = a.moments().m1;
  c.M2 = a.moments().m2;
  c.M3 = a.moments().m3;
  c.l1 = a.l1_norm();
  c.big_M = big_M(a);
  const ArResult api = A_r(a, kPi, opt);
  c.A_pi = api.value;
  c.r_a = 1.5 * c.big_M / c.M3;
  const ArResult ara = A_r(a, c.r_a, opt);
  c.A_ra = ara.value;
  for (const auto* w : {&api.warning, &ara.warning})
    if (!w->empty()) c.warnings.push_back(*w);
  c.C_a = std::min({0.25 * c.big_M, c.A_ra / (kPi * kPi * d), c.A_pi / (kPi * kPi * d)});
  c.certified = gap_chain(d, c.mu_minus, c.mu_plus, c.M1, c.M2, c.M3, c.C_a, c.mu_minus * c.A_pi);
  if (measured_gap) {
    if (!(*measured_gap > 0.0)) throw GapTooSmall("measured gap at xi = 0 is not positive");
    c.empirical = gap_chain(d, c.mu_minus, c.mu_plus, c.M1, c.M2, c.M3, c.C_a, *measured_gap);
  }
  return c;
}

double delta0(const Kernel& a, const Modulation& mu, const ArOptions& opt) {
  const double api = A_r(a, kPi, opt).value;
  const double two_d = std::ldexp(1.0, a.dimension());
  return std::min(1.0, mu.lower() * api / (3.0 * two_d * a.moments().m1 * mu.upper()));
}

bool SandwichBounds::all_pass() const {
  return M_pass && tail_mass_pass &&
         std::all_of(A_checks.begin(), A_checks.end(), [](const SandwichCheck& s) { return s.pass; });
}

SandwichBounds sandwich_bounds(const Kernel& a, const std::vector<double>& radii, const ArOptions& opt) {
  const double l2 = a.l2_norm();  // throws L2NormUnavailable
  const int d = a.dimension();
  const double l1 = a.l1_norm();
  SandwichBounds b;
  b.kappa = kappa(d - 1);
  b.rho0 = 2.0 * std::cbrt(a.moments().m3) / std::cbrt(l1);
  b.r0 = std::pow(0.375 * l1, 2) / (2.0 * b.kappa * std::pow(b.rho0, d - 1) * l2 * l2);
  b.N_a = (2.0 / kPi + 8.0) * b.kappa * std::pow(b.rho0, d);
  const double ratio_sq = std::pow(0.375 * l1 / l2, 2);
  b.tau0 = ratio_sq > kPi * b.N_a ? 0.5 : std::min(0.5, 1.0 - std::cos(ratio_sq / b.N_a));

  b.big_M = big_M(a);
  b.M_lower = 0.5 * l1 * b.r0 * b.r0;
  b.M_upper = a.moments().m2;
  b.M_pass = b.M_lower <= b.big_M && b.big_M <= b.M_upper;
  b.tail_mass_within = a.mass_within(b.rho0);
  b.tail_mass_pass = b.tail_mass_within >= 0.875 * l1;
  for (double r : radii) {
    SandwichCheck s;
    s.r = r;
    s.lower = std::min(0.125 * l1 * b.r0 * b.r0 * r * r, 0.5 * l1 * b.tau0);
    s.value = A_r(a, r, opt).value;
    s.upper = 2.0 * l1;
    s.pass = s.lower <= s.value && s.value <= s.upper;
    b.A_checks.push_back(s);
  }
  return b;
}

}  // namespace nonloc
