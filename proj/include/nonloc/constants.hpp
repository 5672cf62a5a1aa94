#pragma once

#include "nonloc/kernel.hpp"
#include "nonloc/modulation.hpp"

#include <optional>
#include <string>
#include <vector>

namespace nonloc {

/// Smallest eigenvalue of the second-moment matrix.
double big_M(const Kernel& a);

struct ArOptions {
  double samples_per_unit = 2048.0;  // radial grid density
  int angular_samples = 256;         // directions in [0, pi) for d = 2; hemisphere points for d = 3
  int max_radial_samples = 1 << 16;
};

struct ArResult {
  double value = 0.0;
  Vec argmin;
  double r = 0.0;
  double outer_radius = 0.0;    // R*: outside it the tail bound dominates
  bool tail_certified = true;   // false if R* hit its cap
  std::string warning;
};

/// min over |y| >= r of Â(y): dense grid on r <= |y| <= R* plus local
/// refinement. R* doubles until |a|_1 - tail(R*) >= the annulus minimum.
ArResult A_r(const Kernel& a, double r, const ArOptions& opt = {});

/// Constants that depend on the gap d0.
struct GapChain {
  double d0 = 0.0;
  double delta0 = 0.0;
  double C1 = 0.0;
  double C2 = 0.0;
  double S = 0.0;
  double calC = 0.0;
};

struct ConstantChain {
  int dimension = 1;
  double mu_minus = 0.0, mu_plus = 0.0;
  double M1 = 0.0, M2 = 0.0, M3 = 0.0;
  double l1 = 0.0;
  double big_M = 0.0;
  double A_pi = 0.0;
  double r_a = 0.0;
  double A_ra = 0.0;
  double C_a = 0.0;
  GapChain certified;                 // d0 = mu_- A_pi
  std::optional<GapChain> empirical;  // d0 = measured lambda_2(0) - lambda_1(0)
  std::vector<std::string> warnings;
};

/// Pure evaluation of delta0, C1, C2, S and calC for a given d0.
GapChain gap_chain(int d, double mu_minus, double mu_plus, double M1, double M2, double M3, double C_a,
                   double d0);

ConstantChain threshold_chain(const Kernel& a, const Modulation& mu,
                              std::optional<double> measured_gap = std::nullopt,
                              const ArOptions& opt = {});

/// delta0 = min{1, mu_- A_pi / (3 2^d M1 mu_+)}.
double delta0(const Kernel& a, const Modulation& mu, const ArOptions& opt = {});

struct SandwichCheck {
  double r = 0.0;
  double lower = 0.0;   // min{1/8 |a|_1 r0^2 r^2, 1/2 |a|_1 tau0}
  double value = 0.0;   // A_r
  double upper = 0.0;   // 2 |a|_1
  bool pass = false;
};

struct SandwichBounds {
  double rho0 = 0.0;
  double r0 = 0.0;
  double tau0 = 0.0;
  double N_a = 0.0;
  double kappa = 0.0;  // volume of the unit ball in R^{d-1}
  double big_M = 0.0;
  double M_lower = 0.0;  // 1/2 |a|_1 r0^2
  double M_upper = 0.0;  // M2
  bool M_pass = false;
  double tail_mass_within = 0.0;  // \int_{|z| <= rho0} a
  bool tail_mass_pass = false;    // >= 7/8 |a|_1
  std::vector<SandwichCheck> A_checks;
  bool all_pass() const;
};

/// Throws L2NormUnavailable for kernels without L2 data.
SandwichBounds sandwich_bounds(const Kernel& a, const std::vector<double>& radii = {0.1, 1.0, kPi, 10.0},
                               const ArOptions& opt = {});

}  // namespace nonloc
