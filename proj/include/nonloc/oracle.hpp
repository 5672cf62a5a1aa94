#pragma once

#include "nonloc/kernel.hpp"
#include "nonloc/modulation.hpp"
#include "nonloc/truncation.hpp"

namespace nonloc {

/// Uniform grid x = j / G on the unit cell and the lattice cut-off L of the
/// periodized kernel sum over |n|_inf <= L.
struct CellGrid {
  int G = 64;
  int L = 1;
  int dim = 1;
  long points() const;
  Vec point(long flat) const;
};

/// Smallest L with mass_outside(L - 1) <= 1e-10 ||a||_1, unless L > 0 is given.
CellGrid make_cell_grid(const Kernel& a, int G, int L = 0);

/// Trapezoid-rule evaluation of
///   (A(xi) u)(x) = \int a(x - y) mu(x, y) (u(x) - e^{-i<xi, x - y>} u(y)) dy
/// for a periodic grid function u (flat index with coordinate 0 fastest).
/// O(G^{2d}) by design.
CVec apply_fiber_realspace(const Kernel& a, const Modulation& mu, const Vec& xi, const CVec& u, const CellGrid& grid);

struct FormValues {
  double direct = 0.0;       // Re <A(xi) u, u>
  double direct_imag = 0.0;  // Im <A(xi) u, u>, zero up to rounding
  double symmetrized = 0.0;  // 1/2 \int\int a mu |e^{i<xi,x>} u(x) - e^{i<xi,y>} u(y)|^2
};
FormValues quadratic_form_check(const Kernel& a, const Modulation& mu, const Vec& xi, const CVec& u,
                                const CellGrid& grid);

/// Samples of sum_n c_n e^{2 pi i <n, x>} on the grid.
CVec synthesize(const CVec& coeffs, const Truncation& trunc, const CellGrid& grid);

/// Random coefficients supported on |n|_inf <= band (normal real and imaginary parts).
CVec random_trig_coefficients(const Truncation& trunc, int band, unsigned seed);

/// Galerkin action A(xi) c synthesized on the grid against the real-space
/// oracle applied to the synthesized c. The test function uses modes up to
/// N - spread so the Galerkin product is exact. Returns ||diff|| / ||oracle||
/// in the discrete l2 norm.
double galerkin_vs_realspace(const Kernel& a, const Modulation& mu, const Vec& xi, const Truncation& trunc,
                             const CellGrid& grid, unsigned seed);

}  // namespace nonloc
