#pragma once

#include "nonloc/types.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace nonloc {

/// Absolute moments M_k = \int |z|^k a(z) dz and the second-moment matrix
/// \int z z^T a(z) dz.
struct Moments {
  double m1 = 0.0;
  double m2 = 0.0;
  double m3 = 0.0;
  Mat second;
};

/// Convolution kernel a(z): nonnegative, even, integrable, with finite first
/// three absolute moments.
///
/// Fourier convention: \hat a(k) = \int a(z) e^{-i<k,z>} dz (angular
/// frequency). Because a is even, \hat a is real and even.
///
/// Families:
///  - gaussian: product Gaussian with per-axis widths sigma_i and total mass;
///  - ball: 1-d indicator of [-R, R] scaled to the given mass;
///  - sampled: 1-d even profile given by equispaced samples on [0, support],
///    linearly interpolated, zero outside. Fourier data by adaptive quadrature.
class Kernel {
 public:
  struct Gaussian {
    std::vector<double> sigma;
    double mass = 1.0;
  };
  struct Ball {
    double radius = 1.0;
    double mass = 1.0;
  };
  struct Sampled {
    double support = 1.0;
    std::vector<double> samples;
    bool l2_data = true;
  };

  static Kernel gaussian(int dimension, std::vector<double> sigma, double mass = 1.0);
  static Kernel ball(double radius, double mass = 1.0);
  static Kernel sampled(double support, std::vector<double> samples, bool l2_data = true);

  int dimension() const { return dimension_; }
  std::string family_name() const;
  const std::variant<Gaussian, Ball, Sampled>& family() const { return family_; }

  /// Pointwise value a(z). At a jump of the profile the mean of the one-sided
  /// limits is returned.
  double value(const Vec& z) const;

  double fourier(const Vec& k) const;
  Vec fourier_gradient(const Vec& k) const;
  Mat fourier_hessian(const Vec& k) const;

  /// Â(y) = \hat a(0) - \hat a(y), evaluated without cancellation near 0.
  double symbol(const Vec& y) const;

  /// Upper bound on sup_{|k| >= radius} |\hat a(k)|, nonincreasing in radius.
  double fourier_tail_bound(double radius) const;

  /// Uniform bound on third directional derivatives of Â: |D^3 Â(y)[v,v,v]| <= M3 |v|^3.
  double third_derivative_bound() const { return moments_.m3; }

  double l1_norm() const { return l1_; }
  /// Throws L2NormUnavailable when the kernel carries no L2 data.
  double l2_norm() const;
  bool has_l2_norm() const { return l2_.has_value(); }

  const Moments& moments() const { return moments_; }

  /// \int_{|z| <= radius} a(z) dz.
  double mass_within(double radius) const;
  /// \int_{|z| > radius} a(z) dz, computed without cancellation where possible.
  double mass_outside(double radius) const;

 private:
  Kernel(int dimension, std::variant<Gaussian, Ball, Sampled> family);
  void finalize();

  int dimension_ = 1;
  std::variant<Gaussian, Ball, Sampled> family_;
  double l1_ = 0.0;
  std::optional<double> l2_;
  Moments moments_;
};

/// Free-function spellings of the core kernel queries.
inline double kernel_fourier(const Kernel& a, const Vec& k) { return a.fourier(k); }
inline double symbol_A_hat(const Kernel& a, const Vec& y) { return a.symbol(y); }
inline const Moments& moments(const Kernel& a) { return a.moments(); }

}  // namespace nonloc
