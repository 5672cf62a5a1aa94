#include "doctest.h"

#include "nonloc/fiber.hpp"
#include "nonloc/oracle.hpp"

#include <random>

using namespace nonloc;
using doctest::Approx;

namespace {
Vec v1(double x) { return Vec::Constant(1, x); }
}  // namespace

TEST_SUITE("oracle") {

TEST_CASE("cell grid and lattice cut-off") {
  const Kernel g = Kernel::gaussian(1, {0.3});
  const CellGrid c = make_cell_grid(g, 64);
  CHECK(g.mass_outside(c.L - 1) <= 1e-10 * g.l1_norm());
  CHECK(c.points() == 64);
  CHECK(make_cell_grid(g, 64, 8).L == 8);
  CHECK_THROWS_AS(make_cell_grid(g, 8), InvalidArgument);
  CHECK(make_cell_grid(Kernel::ball(0.25), 64).L == 2);
}

TEST_CASE("constants are annihilated at xi = 0") {
  const Kernel g = Kernel::gaussian(1, {0.3});
  const Modulation mu = Modulation::cosine_product(1, 0.5);
  const CellGrid c = make_cell_grid(g, 64);
  const CVec u = CVec::Constant(64, cplx(2.0, -1.0));
  CHECK(apply_fiber_realspace(g, mu, v1(0.0), u, c).norm() <= 1e-13);
  const FormValues f = quadratic_form_check(g, mu, v1(0.0), u, c);
  CHECK(std::abs(f.direct) <= 1e-13);
  CHECK(std::abs(f.symmetrized) <= 1e-13);
}

TEST_CASE("plane waves are eigenfunctions for mu = 1") {
  const Kernel g = Kernel::gaussian(1, {0.3});
  const Modulation one = Modulation::constant(1, 1.0);
  const CellGrid c = make_cell_grid(g, 128);
  const double xi = 0.7;
  for (int n : {0, 1, -3}) {
    CVec u(c.points());
    for (long i = 0; i < c.points(); ++i) u(i) = std::exp(cplx(0.0, 2 * kPi * n * c.point(i)(0)));
    const CVec out = apply_fiber_realspace(g, one, v1(xi), u, c);
    const double sym = g.symbol(v1(xi + 2 * kPi * n));
    CHECK((out - sym * u).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("Galerkin action agrees with real-space quadrature") {
  const Kernel g = Kernel::gaussian(1, {0.3});
  const Modulation mu = Modulation::cosine_product(1, 0.5);
  const Truncation t(8, 1);
  const CellGrid c = make_cell_grid(g, 512, 8);
  for (double xi : {0.0, 0.5, -2.7}) CHECK(galerkin_vs_realspace(g, mu, v1(xi), t, c, 21) <= 1e-6);
  // Ball: the grid is aligned with the jumps at +-R, first-order accurate.
  const Kernel b = Kernel::ball(0.25);
  const CellGrid cb = make_cell_grid(b, 512);
  for (double xi : {0.0, 1.1}) CHECK(galerkin_vs_realspace(b, mu, v1(xi), t, cb, 22) <= 1e-3);
  const Kernel g2 = Kernel::gaussian(2, {0.3});
  const Modulation mu2 = Modulation::cosine_product(2, 0.25);
  CHECK(galerkin_vs_realspace(g2, mu2, Vec::Constant(2, 0.3), Truncation(4, 2), make_cell_grid(g2, 24), 5) <= 1e-4);
}

TEST_CASE("symmetrized quadratic form identity") {
  const Kernel g = Kernel::gaussian(1, {0.3});
  const Modulation mu = Modulation::cosine_product(1, 0.5);
  const Truncation t(8, 1);
  const CellGrid c = make_cell_grid(g, 64);
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> U(-kPi, kPi);
  unsigned seed = 100;
  for (int k = 0; k < 5; ++k) {
    const Vec xi = v1(U(rng));
    for (int i = 0; i < 20; ++i) {
      const CVec u = synthesize(random_trig_coefficients(t, 6, seed++), t, c);
      const FormValues f = quadratic_form_check(g, mu, xi, u, c);
      CHECK(f.symmetrized >= 0.0);
      CHECK(std::abs(f.direct_imag) <= 1e-10 * f.symmetrized);
      CHECK(std::abs(f.direct - f.symmetrized) <= 1e-6 * f.symmetrized);
    }
  }
}

TEST_CASE("form comparison with the homogeneous operator") {
  const Kernel g = Kernel::gaussian(1, {0.3});
  const Modulation mu = Modulation::cosine_product(1, 0.5);
  const Modulation one = Modulation::constant(1, 1.0);
  const Truncation t(8, 1);
  const CellGrid c = make_cell_grid(g, 64);
  for (unsigned seed = 1; seed <= 5; ++seed) {
    const CVec u = synthesize(random_trig_coefficients(t, 6, seed), t, c);
    const double f = quadratic_form_check(g, mu, v1(0.4), u, c).symmetrized;
    const double f1 = quadratic_form_check(g, one, v1(0.4), u, c).symmetrized;
    CHECK(f >= mu.lower() * f1);
    CHECK(f <= mu.upper() * f1);
  }
}

TEST_CASE("input validation") {
  const Kernel g = Kernel::gaussian(1, {0.3});
  const Modulation one = Modulation::constant(1, 1.0);
  const CellGrid c = make_cell_grid(g, 32);
  CHECK_THROWS_AS(apply_fiber_realspace(g, one, v1(0.0), CVec::Zero(31), c), InvalidArgument);
  CHECK_THROWS_AS(apply_fiber_realspace(g, one, Vec::Zero(2), CVec::Zero(32), c), InvalidArgument);
}

}  // TEST_SUITE
