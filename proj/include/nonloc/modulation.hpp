#pragma once

#include "nonloc/types.hpp"

#include <vector>

namespace nonloc {

/// One Fourier coefficient c_{p,q} of mu(x, y) = sum c_{p,q} e^{2 pi i (<p,x> + <q,y>)}.
struct ModulationTerm {
  IVec p;
  IVec q;
  cplx c;
};

/// Certified enclosure of the modulation range: lower <= mu(x, y) <= upper for all (x, y).
struct CertifiedBounds {
  double lower = 1.0;
  double upper = 1.0;
  double grid_min = 1.0;
  double grid_max = 1.0;
  double margin = 0.0;  // Lipschitz constant times the grid-cell diagonal
  int grid_per_dim = 0;
};

/// Bi-periodic symmetric coefficient mu(x, y), a real trigonometric polynomial
/// on the torus T^d x T^d. Immutable; construction validates reality
/// (c_{-p,-q} = conj c_{p,q}), symmetry (c_{p,q} = c_{q,p}) and certifies
/// 0 < mu_- <= mu <= mu_+.
class Modulation {
 public:
  /// Duplicate (p, q) entries are summed. grid_per_dim = 0 selects the default
  /// certification grid (512, 64, 16 points for d = 1, 2, 3).
  static Modulation from_terms(int dimension, std::vector<ModulationTerm> terms, int grid_per_dim = 0);
  static Modulation constant(int dimension, double value);
  /// 1 + amplitude * cos(2 pi x_axis) cos(2 pi y_axis).
  static Modulation cosine_product(int dimension, double amplitude, int axis = 0, int grid_per_dim = 0);

  int dimension() const { return dimension_; }
  const std::vector<ModulationTerm>& terms() const { return terms_; }

  /// Largest |p|_inf, |q|_inf over the coefficients.
  int bandwidth() const { return bandwidth_; }
  /// Largest |p + q|_inf: how far the fiber matrices spread from the diagonal.
  int diagonal_spread() const { return spread_; }

  double evaluate(const Vec& x, const Vec& y) const;

  double lower() const { return bounds_.lower; }
  double upper() const { return bounds_.upper; }
  const CertifiedBounds& bounds() const { return bounds_; }

  /// Coefficient-wise Lipschitz constant 2 pi sum |c| (|p| + |q|).
  double lipschitz_constant() const;

  /// c * mu, with certified bounds scaled accordingly.
  Modulation scaled(double factor) const;

  /// Cell average \int\int mu; equals c_{0,0}.
  double mean() const;

 private:
  Modulation() = default;
  int dimension_ = 1;
  std::vector<ModulationTerm> terms_;
  int bandwidth_ = 0;
  int spread_ = 0;
  CertifiedBounds bounds_;
};

/// Grid minimum/maximum widened by the Lipschitz margin. Throws
/// NonPositiveLowerBound when the certified lower bound is not positive and
/// InvalidArgument when grid_per_dim < 4 * bandwidth + 1.
CertifiedBounds certify_bounds(const Modulation& mu, int grid_per_dim);

inline double modulation_eval(const Modulation& mu, const Vec& x, const Vec& y) { return mu.evaluate(x, y); }

}  // namespace nonloc
