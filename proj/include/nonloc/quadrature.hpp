#pragma once

#include "nonloc/types.hpp"

#include <functional>
#include <vector>

namespace nonloc {

struct GaussLegendreRule {
  std::vector<double> nodes;    // on [-1, 1], ascending
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1] (Newton iteration on P_n).
GaussLegendreRule gauss_legendre(int n);

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
};

/// Adaptive Gauss-Kronrod integration of f over [a, b].
/// Throws QuadratureError when the error estimate exceeds
/// max(abs_tol, rel_tol * |value|).
QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                    double rel_tol = 1e-12, double abs_tol = 1e-15,
                                    int max_depth = 30);

}  // namespace nonloc
