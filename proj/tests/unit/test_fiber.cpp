#include "doctest.h"

#include "nonloc/constants.hpp"
#include "nonloc/fiber.hpp"
#include "nonloc/oracle.hpp"

#include <Eigen/Eigenvalues>

#include <random>

using namespace nonloc;
using doctest::Approx;

namespace {

Vec v1(double x) { return Vec::Constant(1, x); }

double min_eig(const CMat& M) {
  Eigen::SelfAdjointEigenSolver<CMat> es(M, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

struct Standard {
  Kernel a = Kernel::gaussian(1, {0.3});
  Modulation mu = Modulation::cosine_product(1, 0.5);
};

}  // namespace

TEST_SUITE("fiber") {

TEST_CASE("truncation index bijection") {
  for (int d = 1; d <= 3; ++d) {
    const Truncation t(2, d);
    CHECK(t.size() == static_cast<int>(std::pow(5, d)));
    for (int o = 0; o < t.size(); ++o) CHECK(t.offset(t.index(o)) == o);
    CHECK(t.index(t.zero_offset()).isZero());
  }
  CHECK_THROWS_AS(Truncation(0, 1), InvalidArgument);
}

TEST_CASE("homogeneous modulation gives the diagonal symbol") {
  const Kernel a = Kernel::gaussian(1, {1.0});
  const Modulation one = Modulation::constant(1, 1.0);
  const Truncation t(2, 1);
  const CMat A0 = assemble_matrix(a, one, v1(0.0), t);
  CHECK(A0(2, 2) == cplx(0.0, 0.0));
  for (int o = 0; o < 5; ++o) {
    const double n = t.index(o)(0);
    CHECK(A0(o, o).real() == Approx(1.0 - std::exp(-0.5 * std::pow(2 * kPi * n, 2))).epsilon(1e-15));
  }
  CHECK((A0 - CMat(A0.diagonal().asDiagonal())).norm() == 0.0);
  const double xi = 0.83;
  const CMat A = assemble_matrix(a, one, v1(xi), Truncation(4, 1));
  for (int o = 0; o < 9; ++o) {
    const double k = xi + 2 * kPi * (o - 4);
    CHECK(A(o, o).real() == Approx(1.0 - std::exp(-0.5 * k * k)).epsilon(1e-14));
  }
  CHECK((assemble_unmodulated(a, v1(xi), Truncation(4, 1)) - A).norm() < 1e-15);
}

TEST_CASE("assembled matrices are Hermitian with A = P - B") {
  Standard s;
  const Truncation t(8, 1);
  for (double xi : {0.0, 0.5, -2.9}) {
    const FiberOperator f = assemble(s.a, s.mu, v1(xi), t);
    CHECK((f.A - f.A.adjoint()).norm() <= 1e-12 * f.A.norm());
    CHECK((f.A - (f.P - f.B)).norm() <= 1e-14 * f.A.norm());
  }
  const FiberOperator f0 = assemble(s.a, s.mu, v1(0.0), t);
  CHECK(f0.A.col(t.zero_offset()).norm() <= 1e-14);
  const Modulation mu2 = Modulation::cosine_product(2, 0.25);
  const CMat A2 = assemble_matrix(Kernel::gaussian(2, {0.3}), mu2, Vec::Constant(2, 0.4), Truncation(3, 2));
  CHECK((A2 - A2.adjoint()).norm() <= 1e-12 * A2.norm());
}

TEST_CASE("assembly matches the real-space oracle") {
  Standard s;
  const Truncation t(8, 1);
  const CellGrid grid = make_cell_grid(s.a, 512);
  CHECK(galerkin_vs_realspace(s.a, s.mu, v1(0.5), t, grid, 7) <= 1e-6);
  const Kernel a2 = Kernel::gaussian(2, {0.3});
  const Modulation mu2 = Modulation::cosine_product(2, 0.25);
  CHECK(galerkin_vs_realspace(a2, mu2, Vec::Constant(2, -0.6), Truncation(4, 2), make_cell_grid(a2, 24), 3) <= 1e-4);
}

TEST_CASE("truncation below the modulation bandwidth is rejected") {
  auto iv = [](int a) { return IVec::Constant(1, a); };
  const Modulation mu = Modulation::from_terms(1, {{iv(0), iv(0), 1.0}, {iv(3), iv(-3), 0.1}, {iv(-3), iv(3), 0.1}});
  CHECK_THROWS_AS(assemble_matrix(Kernel::gaussian(1, {0.3}), mu, v1(0.0), Truncation(2, 1)), InvalidArgument);
}

TEST_CASE("derivatives at zero") {
  Standard s;
  const Truncation t(8, 1);
  const FiberDerivatives der = assemble_derivatives(s.a, s.mu, t);
  CHECK((der.dA[0] - der.dA[0].adjoint()).norm() <= 1e-13);
  CHECK((der.d2A[0][0] - der.d2A[0][0].adjoint()).norm() <= 1e-13);
  // Central differences converge at second order.
  const CMat A0 = assemble_matrix(s.a, s.mu, v1(0.0), t);
  double err[2];
  const double hs[2] = {1e-2, 1e-3};
  for (int i = 0; i < 2; ++i) {
    const double h = hs[i];
    const CMat fd = (assemble_matrix(s.a, s.mu, v1(h), t) - assemble_matrix(s.a, s.mu, v1(-h), t)) / (2 * h);
    err[i] = (fd - der.dA[0]).norm();
  }
  CHECK(std::log10(err[0] / err[1]) >= 1.9);
  const double h = 1e-3;
  const CMat fd2 = (assemble_matrix(s.a, s.mu, v1(h), t) - 2.0 * A0 + assemble_matrix(s.a, s.mu, v1(-h), t)) / (h * h);
  CHECK((fd2 - der.d2A[0][0]).norm() <= 1e-5 * der.d2A[0][0].norm());

  // Homogeneous case: diagonal with entries -d\hat a(2 pi n), zero at n = 0.
  const Kernel g = Kernel::gaussian(1, {1.0});
  const Modulation one = Modulation::constant(1, 1.0);
  const FiberDerivatives d1 = assemble_derivatives(g, one, Truncation(3, 1));
  for (int o = 0; o < 7; ++o) {
    const double k = 2 * kPi * (o - 3);
    CHECK(d1.dA[0](o, o).real() == Approx(k * std::exp(-0.5 * k * k)).epsilon(1e-13));
  }
  CHECK(std::abs(d1.dA[0](3, 3)) == 0.0);
  CHECK(d1.d2A[0][0](3, 3).real() == Approx(1.0).epsilon(1e-14));
}

TEST_CASE("second derivative against the constant mode gives the second moment") {
  const Kernel g = Kernel::gaussian(2, {0.4, 0.7});
  const Truncation t(2, 2);
  const FiberDerivatives der = assemble_derivatives(g, Modulation::constant(2, 1.0), t);
  const int z = t.zero_offset();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(der.d2A[i][j](z, z).real() == Approx(g.moments().second(i, j)).epsilon(1e-13));
}

TEST_CASE("spectral data") {
  Standard s;
  const Truncation t(16, 1);
  const CMat A0 = assemble_matrix(s.a, s.mu, v1(0.0), t);
  const SpectralData sd = spectral_data(A0, 2);
  CHECK(std::abs(sd.eigenvalues(0)) <= 1e-10 * A0.norm());
  CHECK(std::abs(sd.eigenvectors(t.zero_offset(), 0)) == Approx(1.0).epsilon(1e-12));
  CHECK(sd.max_residual <= 1e-10);
  const Kernel g = Kernel::gaussian(1, {1.0});
  for (double xi : {0.3, 1.7, -3.0}) {
    const SpectralData h = spectral_data(assemble_matrix(g, Modulation::constant(1, 1.0), v1(xi), t), 1);
    CHECK(h.eigenvalues(0) == Approx(1.0 - std::exp(-0.5 * xi * xi)).epsilon(1e-12));
  }
}

TEST_CASE("Riesz projector") {
  Standard s;
  const Truncation t(16, 1);
  const double gap = spectral_data(assemble_matrix(s.a, s.mu, v1(0.0), t), 2).gap();
  const CMat A0 = assemble_matrix(s.a, s.mu, v1(0.0), t);
  const ProjectorResult p0 = spectral_projector_riesz(A0, gap);
  CMat P = CMat::Zero(t.size(), t.size());
  P(t.zero_offset(), t.zero_offset()) = 1.0;
  CHECK((p0.F - P).norm() <= 1e-8);
  const double d0 = delta0(s.a, s.mu);
  for (double xi : {0.3 * d0, -0.8 * d0, d0}) {
    const CMat A = assemble_matrix(s.a, s.mu, v1(xi), t);
    const ProjectorResult p = spectral_projector_riesz(A, gap);
    const SpectralData sd = spectral_data(A, 1);
    const CMat Fe = sd.eigenvectors.col(0) * sd.eigenvectors.col(0).adjoint();
    CHECK((p.F - Fe).norm() <= 1e-8);
    CHECK(p.idempotency <= 1e-8);
    CHECK(p.hermiticity <= 1e-10);
    CHECK(p.trace == Approx(1.0).epsilon(1e-8));
  }
  // At the zone edge the two lowest homogeneous bands cross.
  const Kernel g = Kernel::gaussian(1, {1.0});
  const Modulation one = Modulation::constant(1, 1.0);
  const double g1 = spectral_data(assemble_matrix(g, one, v1(0.0), t), 2).gap();
  CHECK_THROWS_AS(spectral_projector_riesz(assemble_matrix(g, one, v1(kPi), t), g1), GapTooSmall);
}

TEST_CASE("contour rule integrates z^k exactly around the stadium") {
  const ContourRule r = stadium_contour(1.0, 64);
  cplx len = 0.0, first = 0.0, inv = 0.0;
  for (std::size_t i = 0; i < r.z.size(); ++i) {
    len += r.dz[i];
    first += r.z[i] * r.dz[i];
    inv += r.dz[i] / (r.z[i] - 1.0 / 6.0);
  }
  CHECK(std::abs(len) < 1e-14);
  CHECK(std::abs(first) < 1e-14);
  CHECK(inv.imag() == Approx(2 * kPi).epsilon(1e-10));
}

TEST_CASE("fiber resolvent") {
  const Kernel g = Kernel::gaussian(1, {1.0});
  const Truncation t(4, 1);
  const double eps2 = 0.01;
  const double xi = 0.4;
  const CMat R = fiber_resolvent(assemble_matrix(g, Modulation::constant(1, 1.0), v1(xi), t), eps2);
  for (int o = 0; o < t.size(); ++o) {
    const double k = xi + 2 * kPi * (o - 4);
    CHECK(R(o, o).real() == Approx(1.0 / (1.0 - std::exp(-0.5 * k * k) + eps2)).epsilon(1e-12));
  }
  Standard s;
  const CMat R0 = fiber_resolvent(assemble_matrix(s.a, s.mu, v1(0.0), Truncation(8, 1)), eps2);
  CHECK(R0(8, 8).real() == Approx(1.0 / eps2).epsilon(1e-12));
  CHECK(R0.col(8).norm() == Approx(1.0 / eps2).epsilon(1e-12));
}

TEST_CASE("resolvent restricted to the band is bounded by the quadratic lower bound") {
  Standard s;
  const Truncation t(16, 1);
  const ConstantChain c = threshold_chain(s.a, s.mu);
  const double gap = spectral_data(assemble_matrix(s.a, s.mu, v1(0.0), t), 2).gap();
  for (double xi : {0.01, 0.04, c.certified.delta0})
    for (double eps : {0.1, 0.01}) {
      const CMat A = assemble_matrix(s.a, s.mu, v1(xi), t);
      const CMat F = spectral_projector_riesz(A, gap).F;
      const double lhs = spectral_norm(eps * eps * fiber_resolvent(A, eps * eps) * F);
      CHECK(lhs <= eps * eps / (c.mu_minus * c.C_a * xi * xi + eps * eps) + 1e-10);
    }
}

TEST_CASE("Hadamard remainder") {
  Standard s;
  const Truncation t(8, 1);
  const CMat A0 = assemble_matrix(s.a, s.mu, v1(0.0), t);
  const FiberDerivatives der = assemble_derivatives(s.a, s.mu, t);
  CHECK(hadamard_remainder(A0, A0, der, v1(0.0)) == 0.0);
  const double mu_p = s.mu.upper(), M3 = s.a.moments().m3;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    const double xi = U(rng);
    CHECK(hadamard_remainder(assemble_matrix(s.a, s.mu, v1(xi), t), A0, der, v1(xi)) <=
          std::pow(std::abs(xi), 3) * mu_p * M3 / 6.0);
  }
  // Diagonal case against the scalar Taylor remainder.
  const Kernel g = Kernel::gaussian(1, {1.0});
  const Modulation one = Modulation::constant(1, 1.0);
  const Truncation t3(3, 1);
  const CMat G0 = assemble_matrix(g, one, v1(0.0), t3);
  const FiberDerivatives gd = assemble_derivatives(g, one, t3);
  const double xi = 0.37;
  double expect = 0.0;
  for (int n = -3; n <= 3; ++n) {
    const double k = 2 * kPi * n;
    const double f0 = std::exp(-0.5 * k * k);
    const double taylor = (1 - f0) + xi * k * f0 + 0.5 * xi * xi * (1 - k * k) * f0;
    expect = std::max(expect, std::abs(1.0 - std::exp(-0.5 * (k + xi) * (k + xi)) - taylor));
  }
  CHECK(hadamard_remainder(assemble_matrix(g, one, v1(xi), t3), G0, gd, v1(xi)) == Approx(expect).epsilon(1e-12));
}

TEST_CASE("form comparison with the homogeneous fiber") {
  Standard s;
  const Truncation t(8, 1);
  for (double xi : {0.0, 0.9, -2.2, kPi}) {
    const CMat A = assemble_matrix(s.a, s.mu, v1(xi), t);
    const CMat A0 = assemble_unmodulated(s.a, v1(xi), t);
    CHECK(min_eig(A - s.mu.lower() * A0) >= -1e-10);
    CHECK(min_eig(s.mu.upper() * A0 - A) >= -1e-10);
  }
}

TEST_CASE("Lipschitz continuity and Schur bound") {
  Standard s;
  const Truncation t(8, 1);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> U(-kPi, kPi);
  const double L = s.mu.upper() * 2.0 * s.a.moments().m1;
  for (int i = 0; i < 50; ++i) {
    const double x = U(rng), y = U(rng);
    const double lhs = spectral_norm(assemble_matrix(s.a, s.mu, v1(x), t) - assemble_matrix(s.a, s.mu, v1(y), t));
    CHECK(lhs <= L * std::abs(x - y) + 1e-13);
    const FiberOperator f = assemble(s.a, s.mu, v1(x), t);
    CHECK(spectral_norm(f.B) <= 2.0 * s.mu.upper() * s.a.l1_norm());
  }
}

TEST_CASE("band bounds on a grid") {
  Standard s;
  const Truncation t(16, 1);
  const ConstantChain c = threshold_chain(s.a, s.mu);
  for (int i = 0; i < 257; ++i) {
    const double xi = -kPi + 2 * kPi * i / 256.0;
    const SpectralData sd = spectral_data(assemble_matrix(s.a, s.mu, v1(xi), t), 2);
    CHECK(sd.eigenvalues(0) >= c.mu_minus * c.C_a * xi * xi - 1e-14);
    CHECK(sd.eigenvalues(1) >= c.mu_minus * c.A_pi - 1e-14);
  }
}

TEST_CASE("gap persists inside delta0") {
  Standard s;
  const Truncation t(16, 1);
  const double gap = spectral_data(assemble_matrix(s.a, s.mu, v1(0.0), t), 2).gap();
  const double d0 = delta0(s.a, s.mu);
  for (int i = -10; i <= 10; ++i) {
    const SpectralData sd = spectral_data(assemble_matrix(s.a, s.mu, v1(d0 * i / 10.0), t), 2);
    CHECK(sd.eigenvalues(0) <= gap / 3.0);
    CHECK(sd.eigenvalues(1) >= 2.0 * gap / 3.0);
  }
}

TEST_CASE("potential range lies within the Schur bound") {
  Standard s;
  const auto [lo, hi] = potential_range(s.a, s.mu, 256);
  CHECK(lo >= s.mu.lower() * s.a.l1_norm() - 1e-12);
  CHECK(hi <= s.mu.upper() * s.a.l1_norm() + 1e-12);
  const auto [l1, h1] = potential_range(s.a, Modulation::constant(1, 1.0), 64);
  CHECK(l1 == Approx(1.0));
  CHECK(h1 == Approx(1.0));
}

}  // TEST_SUITE
