#pragma once

#include "nonloc/kernel.hpp"
#include "nonloc/modulation.hpp"

#include <string>
#include <vector>

namespace nonloc {

/// Raised for malformed or inconsistent run configurations (CLI exit code 2).
class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

struct KernelConfig {
  std::string family = "gaussian";  // gaussian | ball | sampled
  int dimension = 1;
  std::vector<double> sigma{0.3};   // gaussian: one width, or one per axis
  double mass = 1.0;
  double radius = 1.0;              // ball
  double support = 1.0;             // sampled
  std::vector<double> samples;      // sampled
  bool l2_data = true;              // sampled
};

struct CosProductConfig {
  double amplitude = 0.0;
  int axis = 0;
};

/// mu = mean + sum_k A_k cos(2 pi x_k) cos(2 pi y_k) + sum of explicit terms.
struct ModulationConfig {
  double mean = 1.0;
  std::vector<CosProductConfig> cos_products;
  std::vector<ModulationTerm> terms;
  int certify_grid = 0;
};

struct EffectiveConfig {
  std::vector<std::string> methods{"corrector", "hessian", "contour"};
  double agreement_tol = 1e-6;
  double hessian_step = 1e-2;
  int contour_nodes = 64;
  int max_contour_nodes = 4096;
};

struct ConstantsConfig {
  double samples_per_unit = 2048.0;
  int angular_samples = 256;
  std::vector<double> sandwich_radii{0.1, 1.0, kPi, 10.0};
};

struct SweepConfig {
  std::vector<double> eps;     // empty: 2^-3..2^-9 (d = 1), 2^-2..2^-6 (d >= 2)
  int grid_per_dim = 0;
  int local_radial = 0;
  int local_directions = 0;
  bool refine = true;
  bool truncation_check = true;
  int fit_points = 5;
  double slope_min = 0.9;
  double slope_max = 1.1;
  int spread_points = 4;
  double spread_max = 3.0;
};

struct ProjectorBoundsConfig {
  int samples = 50;
  unsigned seed = 1;
};

struct OracleConfig {
  bool enabled = true;
  int grid = 0;        // 0: 512, 32, 12 for d = 1, 2, 3
  int form_grid = 0;   // 0: 128, 16, 8
  int lattice = 0;     // 0: chosen from the kernel tail
  int truncation = 0;  // 0: min(N, 8)
  double tol = 0.0;    // 0: 1e-6 for the Gaussian, 1e-3 otherwise
  std::vector<Vec> xi; // empty: three fixed points
  unsigned seed = 1;
};

struct DispersionConfig {
  int points = 0;      // per dimension over [-xi_max, xi_max]; 0: 257, 33, 9 for d = 1, 2, 3
  double xi_max = kPi;
  int fit_rows = 10;
  double fit_slope_min = 2.7;
};

struct RunConfig {
  KernelConfig kernel;
  ModulationConfig modulation;
  int N = 0;  // 0: 32, 8, 4 for d = 1, 2, 3
  EffectiveConfig effective;
  ConstantsConfig constants;
  SweepConfig sweep;
  ProjectorBoundsConfig projector_bounds;
  OracleConfig oracle;
  DispersionConfig dispersion;

  Kernel make_kernel() const;
  Modulation make_modulation() const;
  int truncation() const;
  std::vector<double> eps_list() const;  // strictly decreasing
};

/// Strict parse: unknown keys, wrong types and out-of-range values throw ConfigError.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

}  // namespace nonloc
