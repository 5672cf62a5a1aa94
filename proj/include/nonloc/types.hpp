#pragma once

#include <Eigen/Dense>

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace nonloc {

using cplx = std::complex<double>;
using Vec = Eigen::VectorXd;
using IVec = Eigen::VectorXi;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid input data: kernel parameters, modulation coefficients, truncation.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The certified lower bound of the modulation is not positive.
class NonPositiveLowerBound : public Error {
 public:
  explicit NonPositiveLowerBound(double certified_lower)
      : Error("modulation lower bound is not positive (certified mu_- = " +
              std::to_string(certified_lower) + ")"),
        certified_lower_(certified_lower) {}
  double certified_lower() const { return certified_lower_; }

 private:
  double certified_lower_;
};

/// An isolated lowest eigenvalue could not be confirmed at the requested
/// quasi-momentum.
class GapTooSmall : public Error {
 public:
  using Error::Error;
};

/// Adaptive quadrature or contour quadrature failed to reach its tolerance.
class QuadratureError : public Error {
 public:
  QuadratureError(const std::string& what, double achieved)
      : Error(what + " (achieved error estimate " + std::to_string(achieved) + ")"),
        achieved_(achieved) {}
  double achieved() const { return achieved_; }

 private:
  double achieved_;
};

/// The kernel has no finite L2 norm on record.
class L2NormUnavailable : public Error {
 public:
  using Error::Error;
};

/// A dense eigensolve or factorization did not succeed.
class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace nonloc
