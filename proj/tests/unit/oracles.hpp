#pragma once

// Independent reference computations used by the tests. Deliberately simple:
// composite Simpson rules and brute-force grids, no shared code with the library.

#include <cmath>
#include <functional>

namespace oracle_ref {

inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

inline double gauss_pdf(double z, double s) { return std::exp(-0.5 * z * z / (s * s)) / (std::sqrt(2.0 * M_PI) * s); }

// \hat a(k) = \int a(z) cos(k z) dz for an even 1-d profile supported in [-L, L].
inline double fourier_even(const std::function<double(double)>& a, double k, double L, int n = 20000) {
  return 2.0 * simpson([&](double z) { return a(z) * std::cos(k * z); }, 0.0, L, n);
}

// Brute-force minimum of f on [lo, hi] by a fine grid then bisection on the bracket.
inline double grid_min(const std::function<double(double)>& f, double lo, double hi, int n, double* where = nullptr) {
  double best = f(lo), bx = lo;
  const double h = (hi - lo) / n;
  for (int i = 1; i <= n; ++i) {
    const double x = lo + i * h, v = f(x);
    if (v < best) best = v, bx = x;
  }
  double a = std::max(lo, bx - h), b = std::min(hi, bx + h);
  for (int it = 0; it < 200; ++it) {
    const double m1 = a + (b - a) / 3, m2 = b - (b - a) / 3;
    if (f(m1) < f(m2)) b = m2; else a = m1;
  }
  const double x = 0.5 * (a + b);
  if (f(x) < best) best = f(x), bx = x;
  if (where) *where = bx;
  return best;
}

}  // namespace oracle_ref
