#pragma once

#include "nonloc/constants.hpp"
#include "nonloc/fiber.hpp"

#include <string>
#include <variant>
#include <vector>

namespace nonloc {

/// Eigendecomposition of A(xi) together with q(xi + 2 pi n) on the basis,
/// reused for every epsilon at that fiber.
struct FiberSpectrum {
  Vec xi;
  Vec eigenvalues;
  CMat eigenvectors;
  Vec q_diag;  // <g0 (xi + 2 pi n), xi + 2 pi n>
};

FiberSpectrum fiber_spectrum(const Kernel& a, const Modulation& mu, const Mat& g0, const Vec& xi,
                             const Truncation& trunc);

/// || eps^2 (A(xi) + eps^2)^{-1} - diag(eps^2 / (q(xi + 2 pi n) + eps^2)) ||.
double fiber_discrepancy(const FiberSpectrum& s, double eps);
double fiber_discrepancy(const Kernel& a, const Modulation& mu, const Mat& g0, const Vec& xi, double eps,
                         const Truncation& trunc);

struct SweepOptions {
  int grid_per_dim = 0;        // 0: 257 for d = 1, 33 for d >= 2
  int local_radial = 0;        // 0: 25 for d = 1, 12 for d >= 2
  int local_directions = 0;    // 0: 1 for d = 1, 8 for d = 2, 16 for d = 3
  bool refine = true;
  bool truncation_check = true;  // re-evaluate each argmax at 2N
  int fit_points = 5;
};

struct SweepRow {
  double eps = 0.0;
  double D = 0.0;
  double ratio = 0.0;          // D / eps
  double certified_bound = 0.0; // calC * eps
  double grid_slack = 0.0;
  double truncation_slack = 0.0;
  Vec argmax;
  bool bound_pass = false;      // D <= calC eps + slack
};

struct SweepResult {
  std::vector<SweepRow> rows;  // in the order of eps_list
  double slope = 0.0;
  double slope_residual = 0.0;  // RMS residual of the log-log fit
  int fit_points = 0;
  double calC = 0.0;
  int fibers_evaluated = 0;
  /// max/min of D/eps over the k smallest eps.
  double ratio_spread(int k) const;
  std::string csv() const;
};

/// eps_list must have at least 3 entries, strictly decreasing.
SweepResult discrepancy_sweep(const Kernel& a, const Modulation& mu, const Mat& g0, const std::vector<double>& eps_list,
                              const Truncation& trunc, const ConstantChain& chain, const SweepOptions& opt = {});

/// Check of the two-term split behind the rate: on fibers with |xi| <= delta0,
///   D <= t_A + t_high with t_A = ||eps^2 R - eps^2 (q(xi) + eps^2)^{-1} P|| <= S eps,
/// and on |xi| > delta0, ||eps^2 R|| <= eps^2 / (mu_- C(a) |xi|^2 + eps^2).
struct ProofRouteReport {
  int inner_samples = 0;
  int outer_samples = 0;
  int split_failures = 0;  // D > t_A + t_high
  int S_failures = 0;      // t_A > S eps
  int outer_failures = 0;
  double max_tA_over_S_eps = 0.0;
  bool pass() const { return split_failures == 0 && S_failures == 0 && outer_failures == 0; }
};
ProofRouteReport proof_route_check(const Kernel& a, const Modulation& mu, const Mat& g0, const std::vector<double>& eps_list,
                                   const std::vector<Vec>& xi_samples, const Truncation& trunc,
                                   const ConstantChain& chain);

struct ProjectorSample {
  Vec xi;
  double norm_xi = 0.0;
  double F_minus_P = 0.0;
  double C1_bound = 0.0;
  double AF_minus_qP = 0.0;
  double C2_bound = 0.0;
  double riesz_vs_eig = 0.0;  // ||F_riesz - v v^*||
  int contour_nodes = 0;
  bool pass1 = false;
  bool pass2 = false;
};

struct ProjectorBoundsReport {
  std::vector<ProjectorSample> samples;
  double C1 = 0.0, C2 = 0.0, delta0 = 0.0;
  int failures1 = 0, failures2 = 0;
  bool pass() const { return failures1 == 0 && failures2 == 0; }
};

/// ||F(xi) - P|| <= C1 |xi| and ||A(xi) F(xi) - <g0 xi, xi> P|| <= C2 |xi|^3.
/// C1_scale and C2_scale multiply the constants (for negative controls).
/// Samples with |xi| > delta0 are rejected with InvalidArgument.
ProjectorBoundsReport projector_bounds_check(const Kernel& a, const Modulation& mu, const Mat& g0, const Truncation& trunc,
                                const std::vector<Vec>& xi_samples, const ConstantChain& chain,
                                double C1_scale = 1.0, double C2_scale = 1.0);

/// n uniformly random points in the ball |xi| <= radius (deterministic seed).
std::vector<Vec> random_ball_samples(int dim, int n, double radius, unsigned seed);

// Right-hand sides for solve_pair.
struct PlaneWave {
  Vec k;
  cplx amplitude;
};
struct PlaneWaves {
  std::vector<PlaneWave> waves;
};
struct GaussianBump {
  Vec center;
  double width = 1.0;
  double amplitude = 1.0;
};
using RhsSpec = std::variant<PlaneWaves, GaussianBump>;

struct SolvePairResult {
  double error_norm = 0.0;  // ||u_eps - u_0||
  double relative_error = 0.0;
  double rhs_norm = 0.0;
  double u_eps_norm = 0.0;
  double u0_norm = 0.0;
  double bound = 0.0;  // calC eps ||F|| when a chain is supplied
  // Plane waves only: amplitudes of u_eps on the frequencies (xi + 2 pi m) / eps
  // and of u_0 on the input frequencies.
  std::vector<PlaneWave> u_eps;
  std::vector<PlaneWave> u0;
};

/// Solves (A_eps + I) u_eps = F and (A0 + I) u_0 = F fiberwise. Plane waves use
/// the mean-square norm; the bump uses L2(R^d) with Gauss-Legendre quadrature
/// on panels graded toward xi = 0 (d <= 2). quad_points is the number of
/// nodes per panel (0: 8 for d = 1, 4 for d = 2).
SolvePairResult solve_pair(const Kernel& a, const Modulation& mu, const Mat& g0, const RhsSpec& rhs, double eps,
                           const Truncation& trunc, const ConstantChain* chain = nullptr, int quad_points = 0);

}  // namespace nonloc
