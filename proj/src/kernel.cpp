#include "nonloc/kernel.hpp"

#include "nonloc/quadrature.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace nonloc {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Integral of h over the unit sphere S^{d-1} (counting measure for d = 1).
double sphere_integral(int d, const std::function<double(const Vec&)>& h) {
  Vec theta(d);
  if (d == 1) {
    theta(0) = 1.0;
    double s = h(theta);
    theta(0) = -1.0;
    return s + h(theta);
  }
  if (d == 2) {
    constexpr int n = 512;
    double s = 0.0;
    for (int j = 0; j < n; ++j) {
      const double phi = kTwoPi * j / n;
      theta << std::cos(phi), std::sin(phi);
      s += h(theta);
    }
    return s * kTwoPi / n;
  }
  if (d == 3) {
    const GaussLegendreRule gl = gauss_legendre(64);
    constexpr int nphi = 128;
    double s = 0.0;
    for (std::size_t a = 0; a < gl.nodes.size(); ++a) {
      const double u = gl.nodes[a];
      const double st = std::sqrt(std::max(0.0, 1.0 - u * u));
      for (int j = 0; j < nphi; ++j) {
        const double phi = kTwoPi * j / nphi;
        theta << st * std::cos(phi), st * std::sin(phi), u;
        s += gl.weights[a] * h(theta) * kTwoPi / nphi;
      }
    }
    return s;
  }
  throw InvalidArgument("kernel dimension must be 1, 2 or 3");
}

double gaussian_norm_const(const Kernel::Gaussian& g) {
  double c = 1.0;
  for (double s : g.sigma) c /= std::sqrt(kTwoPi) * s;
  return c;
}

double gaussian_quad(const Kernel::Gaussian& g, const Vec& k) {
  double q = 0.0;
  for (Eigen::Index i = 0; i < k.size(); ++i) q += g.sigma[i] * g.sigma[i] * k(i) * k(i);
  return q;
}

double gaussian_inverse_quad(const Kernel::Gaussian& g, const Vec& theta) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < theta.size(); ++i) s += theta(i) * theta(i) / (g.sigma[i] * g.sigma[i]);
  return s;
}

// Ball: \int_0^R x^p cos(kx) dx (sine = false) or \int_0^R x^p sin(kx) dx (sine = true).
double ball_trig_integral(double radius, int p, bool sine, double k) {
  const double t = radius * k;
  if (std::abs(t) < 1.0) {
    double sum = 0.0;
    double kpow = sine ? k : 1.0;         // k^{2n} or k^{2n+1}
    double rpow = std::pow(radius, p + (sine ? 2 : 1));
    double fact = 1.0;                    // (2n)! or (2n+1)!
    for (int n = 0; n < 30; ++n) {
      const int m = 2 * n + (sine ? 1 : 0);
      if (n > 0) fact *= static_cast<double>(m) * (m - 1);
      const double term = ((n % 2) ? -1.0 : 1.0) * kpow * rpow / (fact * (m + p + 1));
      sum += term;
      if (std::abs(term) < 1e-18 * std::abs(sum)) break;
      kpow *= k * k;
      rpow *= radius * radius;
    }
    return sum;
  }
  const double s = std::sin(t), c = std::cos(t);
  const double r = radius;
  if (!sine) {
    switch (p) {
      case 0: return r * s / t;
      case 2: return r * r * r * ((t * t - 2.0) * s + 2.0 * t * c) / (t * t * t);
      default: break;
    }
  } else {
    switch (p) {
      case 1: return r * r * (s - t * c) / (t * t);
      case 3:
        return r * r * r * r * ((3.0 * t * t - 6.0) * s - (t * t * t - 6.0 * t) * c) /
               (t * t * t * t);
      default: break;
    }
  }
  throw InvalidArgument("ball_trig_integral: unsupported power");
}

// Sampled profile helpers ---------------------------------------------------

double sampled_value(const Kernel::Sampled& s, double x) {
  x = std::abs(x);
  const int n = static_cast<int>(s.samples.size()) - 1;
  const double h = s.support / n;
  if (x > s.support) return 0.0;
  if (x == s.support) return 0.5 * s.samples.back();
  const int j = std::min(static_cast<int>(x / h), n - 1);
  const double t = (x - j * h) / h;
  return (1.0 - t) * s.samples[j] + t * s.samples[j + 1];
}

// \int_0^L f(x) a(x) dx by per-segment adaptive quadrature.
double sampled_integral(const Kernel::Sampled& s, const std::function<double(double)>& f,
                        double upper) {
  const int n = static_cast<int>(s.samples.size()) - 1;
  const double h = s.support / n;
  upper = std::min(upper, s.support);
  double scale = 0.0;
  for (double v : s.samples) scale = std::max(scale, v);
  double total = 0.0;
  for (int j = 0; j < n; ++j) {
    const double a = j * h;
    if (a >= upper) break;
    const double b = std::min((j + 1) * h, upper);
    const double a0 = s.samples[j];
    const double a1 = s.samples[j + 1];
    auto integrand = [&](double x) { return f(x) * (a0 + (a1 - a0) * (x - a) / h); };
    total += integrate_adaptive(integrand, a, b, 1e-13, 1e-16 * scale * h).value;
  }
  return total;
}

}  // namespace

Kernel::Kernel(int dimension, std::variant<Gaussian, Ball, Sampled> family)
    : dimension_(dimension), family_(std::move(family)) {}

Kernel Kernel::gaussian(int dimension, std::vector<double> sigma, double mass) {
  if (dimension < 1 || dimension > 3) throw InvalidArgument("gaussian kernel: dimension must be 1, 2 or 3");
  if (sigma.size() == 1 && dimension > 1) sigma.assign(dimension, sigma[0]);
  if (static_cast<int>(sigma.size()) != dimension)
    throw InvalidArgument("gaussian kernel: sigma must have one entry or one per dimension");
  for (double s : sigma)
    if (!(s > 0.0) || !std::isfinite(s)) throw InvalidArgument("gaussian kernel: sigma must be positive");
  if (!(mass > 0.0) || !std::isfinite(mass)) throw InvalidArgument("gaussian kernel: mass must be positive");
  Kernel k(dimension, Gaussian{std::move(sigma), mass});
  k.finalize();
  return k;
}

Kernel Kernel::ball(double radius, double mass) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw InvalidArgument("ball kernel: radius must be positive");
  if (!(mass > 0.0) || !std::isfinite(mass)) throw InvalidArgument("ball kernel: mass must be positive");
  Kernel k(1, Ball{radius, mass});
  k.finalize();
  return k;
}

Kernel Kernel::sampled(double support, std::vector<double> samples, bool l2_data) {
  if (!(support > 0.0) || !std::isfinite(support)) throw InvalidArgument("sampled kernel: support must be positive");
  if (samples.size() < 2) throw InvalidArgument("sampled kernel: need at least two samples");
  for (double v : samples)
    if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument("sampled kernel: samples must be finite and nonnegative");
  if (std::all_of(samples.begin(), samples.end(), [](double v) { return v == 0.0; }))
    throw InvalidArgument("sampled kernel: profile vanishes identically");
  Kernel k(1, Sampled{support, std::move(samples), l2_data});
  k.finalize();
  return k;
}

std::string Kernel::family_name() const {
  return std::visit(overloaded{[](const Gaussian&) { return std::string("gaussian"); },
                               [](const Ball&) { return std::string("ball"); },
                               [](const Sampled&) { return std::string("sampled"); }},
                    family_);
}

void Kernel::finalize() {
  const int d = dimension_;
  moments_.second = Mat::Zero(d, d);
  std::visit(
      overloaded{
          [&](const Gaussian& g) {
            l1_ = g.mass;
            double l2sq = g.mass * g.mass;
            for (double s : g.sigma) l2sq /= 2.0 * s * std::sqrt(kPi);
            l2_ = std::sqrt(l2sq);
            const double c = g.mass * gaussian_norm_const(g);
            auto radial_moment = [&](int k) {
              const double e = 0.5 * (k + d);
              const double ang = sphere_integral(d, [&](const Vec& th) {
                return std::pow(gaussian_inverse_quad(g, th), -e);
              });
              return c * std::tgamma(e) * std::pow(2.0, e - 1.0) * ang;
            };
            moments_.m1 = radial_moment(1);
            moments_.m2 = radial_moment(2);
            moments_.m3 = radial_moment(3);
            for (int i = 0; i < d; ++i) moments_.second(i, i) = g.mass * g.sigma[i] * g.sigma[i];
          },
          [&](const Ball& b) {
            const double amp = b.mass / (2.0 * b.radius);
            l1_ = b.mass;
            l2_ = std::sqrt(amp * amp * 2.0 * b.radius);
            moments_.m1 = 2.0 * amp * std::pow(b.radius, 2) / 2.0;
            moments_.m2 = 2.0 * amp * std::pow(b.radius, 3) / 3.0;
            moments_.m3 = 2.0 * amp * std::pow(b.radius, 4) / 4.0;
            moments_.second(0, 0) = moments_.m2;
          },
          [&](const Sampled& s) {
            // Piecewise-linear profile: Gauss-Legendre with 8 nodes per segment is exact
            // for the polynomial integrands x^k a(x), k <= 3, and a(x)^2.
            const GaussLegendreRule gl = gauss_legendre(8);
            const int n = static_cast<int>(s.samples.size()) - 1;
            const double h = s.support / n;
            double m[4] = {0, 0, 0, 0};
            double sq = 0.0;
            for (int j = 0; j < n; ++j) {
              for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
                const double t = 0.5 * (gl.nodes[q] + 1.0);
                const double x = (j + t) * h;
                const double a = (1.0 - t) * s.samples[j] + t * s.samples[j + 1];
                const double w = 0.5 * gl.weights[q] * h;
                double xp = 1.0;
                for (int p = 0; p < 4; ++p) {
                  m[p] += 2.0 * w * xp * a;
                  xp *= x;
                }
                sq += 2.0 * w * a * a;
              }
            }
            l1_ = m[0];
            if (s.l2_data) l2_ = std::sqrt(sq);
            moments_.m1 = m[1];
            moments_.m2 = m[2];
            moments_.m3 = m[3];
            moments_.second(0, 0) = m[2];
          }},
      family_);

  Eigen::SelfAdjointEigenSolver<Mat> es(moments_.second, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < 1e-12 * moments_.m2)
    throw InvalidArgument("kernel support is degenerate: second-moment matrix is singular");
}

double Kernel::value(const Vec& z) const {
  return std::visit(
      overloaded{[&](const Gaussian& g) {
                   return g.mass * gaussian_norm_const(g) *
                          std::exp(-0.5 * gaussian_inverse_quad(g, z));
                 },
                 [&](const Ball& b) {
                   const double amp = b.mass / (2.0 * b.radius);
                   const double r = std::abs(z(0));
                   if (std::abs(r - b.radius) <= 1e-12 * b.radius) return 0.5 * amp;
                   return r < b.radius ? amp : 0.0;
                 },
                 [&](const Sampled& s) { return sampled_value(s, z(0)); }},
      family_);
}

double Kernel::fourier(const Vec& k) const {
  return std::visit(
      overloaded{[&](const Gaussian& g) { return g.mass * std::exp(-0.5 * gaussian_quad(g, k)); },
                 [&](const Ball& b) {
                   const double amp = b.mass / (2.0 * b.radius);
                   return 2.0 * amp * ball_trig_integral(b.radius, 0, false, k(0));
                 },
                 [&](const Sampled& s) {
                   const double kk = k(0);
                   return 2.0 * sampled_integral(s, [kk](double x) { return std::cos(kk * x); }, s.support);
                 }},
      family_);
}

Vec Kernel::fourier_gradient(const Vec& k) const {
  Vec grad(dimension_);
  std::visit(overloaded{[&](const Gaussian& g) {
                          const double a = g.mass * std::exp(-0.5 * gaussian_quad(g, k));
                          for (int i = 0; i < dimension_; ++i) grad(i) = -g.sigma[i] * g.sigma[i] * k(i) * a;
                        },
                        [&](const Ball& b) {
                          const double amp = b.mass / (2.0 * b.radius);
                          grad(0) = -2.0 * amp * ball_trig_integral(b.radius, 1, true, k(0));
                        },
                        [&](const Sampled& s) {
                          const double kk = k(0);
                          grad(0) = -2.0 * sampled_integral(
                                               s, [kk](double x) { return x * std::sin(kk * x); }, s.support);
                        }},
             family_);
  return grad;
}

Mat Kernel::fourier_hessian(const Vec& k) const {
  Mat hess(dimension_, dimension_);
  std::visit(overloaded{[&](const Gaussian& g) {
                          const double a = g.mass * std::exp(-0.5 * gaussian_quad(g, k));
                          for (int i = 0; i < dimension_; ++i) {
                            const double si = g.sigma[i] * g.sigma[i];
                            for (int j = 0; j < dimension_; ++j) {
                              const double sj = g.sigma[j] * g.sigma[j];
                              hess(i, j) = (si * k(i) * sj * k(j) - (i == j ? si : 0.0)) * a;
                            }
                          }
                        },
                        [&](const Ball& b) {
                          const double amp = b.mass / (2.0 * b.radius);
                          hess(0, 0) = -2.0 * amp * ball_trig_integral(b.radius, 2, false, k(0));
                        },
                        [&](const Sampled& s) {
                          const double kk = k(0);
                          hess(0, 0) = -2.0 * sampled_integral(
                                                  s, [kk](double x) { return x * x * std::cos(kk * x); },
                                                  s.support);
                        }},
             family_);
  return hess;
}

double Kernel::symbol(const Vec& y) const {
  return std::visit(
      overloaded{[&](const Gaussian& g) { return -g.mass * std::expm1(-0.5 * gaussian_quad(g, y)); },
                 [&](const Ball& b) {
                   // 1 - sin(t)/t = 2 \int_0^1 sin^2(t u / 2) du, with series near 0.
                   const double t = b.radius * y(0);
                   if (std::abs(t) < 1e-2) {
                     const double t2 = t * t;
                     return b.mass * t2 / 6.0 * (1.0 - t2 / 20.0 * (1.0 - t2 / 42.0));
                   }
                   return b.mass * (1.0 - std::sin(t) / t);
                 },
                 [&](const Sampled& s) {
                   const double kk = y(0);
                   return 4.0 * sampled_integral(
                                    s, [kk](double x) { return std::pow(std::sin(0.5 * kk * x), 2); },
                                    s.support);
                 }},
      family_);
}

double Kernel::fourier_tail_bound(double radius) const {
  if (radius <= 0.0) return l1_;
  return std::visit(
      overloaded{[&](const Gaussian& g) {
                   const double smin = *std::min_element(g.sigma.begin(), g.sigma.end());
                   return g.mass * std::exp(-0.5 * smin * smin * radius * radius);
                 },
                 [&](const Ball& b) { return std::min(b.mass, b.mass / (b.radius * radius)); },
                 [&](const Sampled& s) {
                   // Integration by parts: |\hat a(k)| <= 2 (a(L) + TV(a)) / |k|.
                   double tv = 0.0;
                   for (std::size_t j = 0; j + 1 < s.samples.size(); ++j)
                     tv += std::abs(s.samples[j + 1] - s.samples[j]);
                   return std::min(l1_, 2.0 * (s.samples.back() + tv) / radius);
                 }},
      family_);
}

double Kernel::l2_norm() const {
  if (!l2_) throw L2NormUnavailable("kernel '" + family_name() + "' carries no L2 data");
  return *l2_;
}

double Kernel::mass_within(double radius) const {
  if (radius <= 0.0) return 0.0;
  return l1_ - mass_outside(radius);
}

double Kernel::mass_outside(double radius) const {
  if (radius <= 0.0) return l1_;
  const int d = dimension_;
  return std::visit(
      overloaded{[&](const Gaussian& g) {
                   const double c = g.mass * gaussian_norm_const(g);
                   const double e = 0.5 * d;
                   const double ang = sphere_integral(d, [&](const Vec& th) {
                     const double s = gaussian_inverse_quad(g, th);
                     return std::pow(s, -e) * boost::math::gamma_q(e, 0.5 * radius * radius * s);
                   });
                   return c * std::tgamma(e) * std::pow(2.0, e - 1.0) * ang;
                 },
                 [&](const Ball& b) {
                   return b.mass * std::max(0.0, 1.0 - radius / b.radius);
                 },
                 [&](const Sampled& s) {
                   if (radius >= s.support) return 0.0;
                   return l1_ - 2.0 * sampled_integral(s, [](double) { return 1.0; }, radius);
                 }},
      family_);
}

}  // namespace nonloc
