#pragma once

#include "nonloc/fiber.hpp"

#include <string>
#include <vector>

namespace nonloc {

/// Fourier coefficients of the cell correctors v_j and right-hand sides w_j.
struct CorrectorSolution {
  std::vector<CVec> v;
  std::vector<CVec> w;
  std::vector<double> residual;       // ||A(0) v_j - w_j|| / ||w_j||
  std::vector<double> reality_defect; // max_n |v_j(-n) - conj v_j(n)|
};

/// w_j = -i dA_j 1, the coefficient vector of the cell-problem source.
CVec rhs_w(const FiberDerivatives& der, const Truncation& trunc, int j);
CVec rhs_w(const Kernel& a, const Modulation& mu, const Truncation& trunc, int j);

/// v_j = P^perp A(0)^{-1} P^perp w_j, solved on the complement of the
/// constant mode. Throws SolverError if that block is not positive definite.
CorrectorSolution solve_cell(const CMat& A0, const FiberDerivatives& der, const Truncation& trunc);
CorrectorSolution solve_cell(const Kernel& a, const Modulation& mu, const Truncation& trunc);

enum class EffectiveMethod { Corrector, Hessian, Contour };
std::string method_name(EffectiveMethod m);

/// g0 with entries g_ij / 2, plus the bookkeeping of how it was obtained.
struct EffectiveMatrix {
  Mat g0;
  EffectiveMethod method = EffectiveMethod::Corrector;
  int N = 0;
  double symmetry_defect = 0.0;   // max |g0_ij - g0_ji| before symmetrisation
  double imaginary_part = 0.0;    // max |Im g_ij|
  double min_eigenvalue = 0.0;
  // Hessian method
  double step = 0.0;
  double richardson_change = 0.0;  // |D(h/2) - D(h)| in max norm
  // Contour method
  int contour_nodes = 0;
  double G0_residual = 0.0;   // ||G_0|| / ||A(0)||
  double Gi_residual = 0.0;   // max_i ||G_i|| / ||A(0)||
  double Gij_offP = 0.0;      // max ||G_ij - g_ij P|| relative to |g_ij|
  double route_residual = 0.0; // quadrature vs analytic reduction, max abs
  double dA_compression = 0.0; // max_i |(dA_i)_{00}|
  // Corrector method
  double max_corrector_residual = 0.0;
  std::vector<std::string> warnings;
};

EffectiveMatrix effective_matrix_corrector(const Kernel& a, const Modulation& mu, const Truncation& trunc);

/// Central second differences of the lowest eigenvalue with steps h and h/2
/// and one Richardson step. Throws GapTooSmall when h sqrt(d) > delta0.
/// Pass delta0 <= 0 to have it computed.
EffectiveMatrix effective_matrix_hessian(const Kernel& a, const Modulation& mu, const Truncation& trunc,
                                         double h = 1e-2, double delta0 = -1.0);

/// Contour-integral representation at xi = 0 on the stadium built from the
/// measured gap. Nodes start at `contour_nodes` and double until
/// ||G_0|| <= 1e-10 ||A(0)||.
EffectiveMatrix effective_matrix_contour(const Kernel& a, const Modulation& mu, const Truncation& trunc,
                                         int contour_nodes = 64, int max_nodes = 4096);

/// ||x - y||_F / max(||x||_F, ||y||_F).
double relative_distance(const Mat& x, const Mat& y);

/// Relative Frobenius change of g0 (corrector method) between N and 2N.
double truncation_convergence(const Kernel& a, const Modulation& mu, const Truncation& trunc);

}  // namespace nonloc
