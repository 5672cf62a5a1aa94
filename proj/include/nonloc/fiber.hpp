#pragma once

#include "nonloc/kernel.hpp"
#include "nonloc/modulation.hpp"
#include "nonloc/truncation.hpp"

#include <vector>

namespace nonloc {

/// Galerkin matrices of the fiber operator A(xi) = P - B(xi) in the cell
/// Fourier basis. See docs/conventions.md for the entry formulas.
struct FiberOperator {
  Vec xi;
  Truncation trunc;
  CMat A;
  CMat P;  // multiplication by p(x), a Toeplitz matrix independent of xi
  CMat B;
};

/// d_i A(0) and d_i d_j A(0).
struct FiberDerivatives {
  std::vector<CMat> dA;
  std::vector<std::vector<CMat>> d2A;
};

/// Throws InvalidArgument when trunc.N is below the modulation bandwidth or
/// the dimensions disagree.
FiberOperator assemble(const Kernel& a, const Modulation& mu, const Vec& xi, const Truncation& trunc);

/// Just the matrix A(xi); skips the separate P and B blocks.
CMat assemble_matrix(const Kernel& a, const Modulation& mu, const Vec& xi, const Truncation& trunc);

/// Same matrix for the unit modulation, i.e. diag(Â(xi + 2 pi n)).
CMat assemble_unmodulated(const Kernel& a, const Vec& xi, const Truncation& trunc);

FiberDerivatives assemble_derivatives(const Kernel& a, const Modulation& mu, const Truncation& trunc);

struct SpectralData {
  Vec eigenvalues;    // ascending, lowest `count`
  CMat eigenvectors;  // columns
  double max_residual = 0.0;  // max ||A v - lambda v|| / ||A||
  double gap() const { return eigenvalues.size() > 1 ? eigenvalues(1) - eigenvalues(0) : 0.0; }
};

/// Lowest `count` eigenpairs. The lowest eigenvalue is clamped at zero once
/// the residual check has passed, since the operator is nonnegative.
SpectralData spectral_data(const CMat& A, int count);
inline SpectralData spectral_data(const FiberOperator& f, int count) { return spectral_data(f.A, count); }

/// Closed stadium around [0, gap/3] at distance gap/6, counterclockwise.
/// Each of its four smooth pieces carries nodes/4 Gauss-Legendre points.
struct ContourRule {
  std::vector<cplx> z;
  std::vector<cplx> dz;  // quadrature weight times dz/dt
};
ContourRule stadium_contour(double gap, int nodes);

struct ProjectorResult {
  CMat F;
  int nodes = 0;
  double idempotency = 0.0;  // ||F^2 - F||
  double hermiticity = 0.0;  // ||F - F^*||
  double trace = 0.0;
};

/// Riesz projector -(2 pi i)^{-1} \oint (A - zeta)^{-1} dzeta over the stadium
/// built from `gap` (the measured gap at xi = 0). Nodes start at
/// `contour_nodes` and double until ||F^2 - F|| < 1e-8.
/// Throws GapTooSmall unless exactly one eigenvalue lies in [0, gap/3] and
/// none in (gap/3, 2 gap/3).
ProjectorResult spectral_projector_riesz(const CMat& A, double gap, int contour_nodes = 64,
                                         int max_nodes = 4096);

/// (A + shift I)^{-1} via Cholesky.
CMat fiber_resolvent(const CMat& A, double shift);

/// ||A(xi) - A(0) - sum xi_i dA_i - 1/2 sum xi_i xi_j d2A_ij||.
double hadamard_remainder(const CMat& A_xi, const CMat& A_0, const FiberDerivatives& der, const Vec& xi);

/// Spectral norm; the Hermitian variant uses eigenvalues.
double spectral_norm(const CMat& M);
double spectral_norm_hermitian(const CMat& M);

/// Range of the potential p(x) = \int a(x - y) mu(x, y) dy sampled on a grid
/// with `grid_per_dim` points per axis.
std::pair<double, double> potential_range(const Kernel& a, const Modulation& mu, int grid_per_dim);

}  // namespace nonloc
