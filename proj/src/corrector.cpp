#include "nonloc/corrector.hpp"

#include "nonloc/constants.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>

namespace nonloc {

namespace {

// Principal submatrix of A with row and column z removed.
CMat drop_index(const CMat& A, int z) {
  const int m = static_cast<int>(A.rows());
  CMat out(m - 1, m - 1);
  for (int i = 0, ii = 0; i < m; ++i) {
    if (i == z) continue;
    for (int j = 0, jj = 0; j < m; ++j) {
      if (j == z) continue;
      out(ii, jj++) = A(i, j);
    }
    ++ii;
  }
  return out;
}

CVec drop_index(const CVec& v, int z) {
  CVec out(v.size() - 1);
  for (int i = 0, ii = 0; i < v.size(); ++i)
    if (i != z) out(ii++) = v(i);
  return out;
}

CVec insert_zero(const CVec& v, int z) {
  CVec out(v.size() + 1);
  for (int i = 0, ii = 0; i < out.size(); ++i) out(i) = i == z ? cplx(0.0) : v(ii++);
  return out;
}

// P^perp A^{-1} P^perp as a full m x m matrix.
CMat reduced_inverse(const CMat& A0, int z) {
  Eigen::LLT<CMat> llt(drop_index(A0, z));
  if (llt.info() != Eigen::Success) throw SolverError("A(0) is not positive definite off the constant mode");
  const CMat inv = llt.solve(CMat::Identity(A0.rows() - 1, A0.rows() - 1));
  const int m = static_cast<int>(A0.rows());
  CMat out = CMat::Zero(m, m);
  for (int i = 0, ii = 0; i < m; ++i) {
    if (i == z) continue;
    for (int j = 0, jj = 0; j < m; ++j) {
      if (j == z) continue;
      out(i, j) = inv(ii, jj++);
    }
    ++ii;
  }
  return out;
}

void finalize(EffectiveMatrix& e, const Eigen::MatrixXcd& g) {
  e.imaginary_part = g.imag().cwiseAbs().maxCoeff();
  const Mat half = 0.5 * g.real();
  e.symmetry_defect = (half - half.transpose()).cwiseAbs().maxCoeff();
  e.g0 = 0.5 * (half + half.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(e.g0, Eigen::EigenvaluesOnly);
  e.min_eigenvalue = es.eigenvalues()(0);
  if (e.min_eigenvalue <= 0.0) e.warnings.push_back("effective matrix is not positive definite");
}

double lowest_eigenvalue(const CMat& A) {
  Eigen::SelfAdjointEigenSolver<CMat> es(A, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw SolverError("Hermitian eigensolver did not converge");
  return es.eigenvalues()(0);
}

double measured_gap(const CMat& A0) {
  Eigen::SelfAdjointEigenSolver<CMat> es(A0, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(1) - std::max(es.eigenvalues()(0), 0.0);
}

}  // namespace

std::string method_name(EffectiveMethod m) {
  switch (m) {
    case EffectiveMethod::Corrector: return "corrector";
    case EffectiveMethod::Hessian: return "hessian";
    case EffectiveMethod::Contour: return "contour";
  }
  return "unknown";
}

CVec rhs_w(const FiberDerivatives& der, const Truncation& trunc, int j) {
  if (j < 0 || j >= trunc.dim) throw InvalidArgument("rhs_w: direction out of range");
  return cplx(0.0, -1.0) * der.dA[j].col(trunc.zero_offset());
}

CVec rhs_w(const Kernel& a, const Modulation& mu, const Truncation& trunc, int j) {
  return rhs_w(assemble_derivatives(a, mu, trunc), trunc, j);
}

CorrectorSolution solve_cell(const CMat& A0, const FiberDerivatives& der, const Truncation& trunc) {
  const int z = trunc.zero_offset();
  const int m = trunc.size();
  Eigen::LLT<CMat> llt(drop_index(A0, z));
  if (llt.info() != Eigen::Success) throw SolverError("A(0) is not positive definite off the constant mode");
  CorrectorSolution sol;
  for (int j = 0; j < trunc.dim; ++j) {
    CVec w = rhs_w(der, trunc, j);
    CVec v = insert_zero(llt.solve(drop_index(w, z)), z);
    CVec r = A0 * v - w;
    r(z) = 0.0;  // the equation holds modulo constants
    const double wn = w.norm();
    sol.residual.push_back(wn > 0.0 ? r.norm() / wn : r.norm());
    double defect = 0.0;
    for (int o = 0; o < m; ++o) {
      const int mirror = trunc.offset(-trunc.index(o));
      defect = std::max(defect, std::abs(v(mirror) - std::conj(v(o))));
    }
    sol.reality_defect.push_back(defect);
    sol.v.push_back(std::move(v));
    sol.w.push_back(std::move(w));
  }
  return sol;
}

CorrectorSolution solve_cell(const Kernel& a, const Modulation& mu, const Truncation& trunc) {
  const CMat A0 = assemble_matrix(a, mu, Vec::Zero(trunc.dim), trunc);
  return solve_cell(A0, assemble_derivatives(a, mu, trunc), trunc);
}

EffectiveMatrix effective_matrix_corrector(const Kernel& a, const Modulation& mu, const Truncation& trunc) {
  const int d = trunc.dim;
  const int z = trunc.zero_offset();
  const CMat A0 = assemble_matrix(a, mu, Vec::Zero(d), trunc);
  const FiberDerivatives der = assemble_derivatives(a, mu, trunc);
  const CorrectorSolution sol = solve_cell(A0, der, trunc);

  Eigen::MatrixXcd g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      g(i, j) = der.d2A[i][j](z, z) - sol.w[i].dot(sol.v[j]) - sol.w[j].dot(sol.v[i]);

  EffectiveMatrix e;
  e.method = EffectiveMethod::Corrector;
  e.N = trunc.N;
  e.max_corrector_residual = *std::max_element(sol.residual.begin(), sol.residual.end());
  if (e.max_corrector_residual > 1e-10) e.warnings.push_back("cell-equation residual above 1e-10");
  finalize(e, g);
  return e;
}

EffectiveMatrix effective_matrix_hessian(const Kernel& a, const Modulation& mu, const Truncation& trunc,
                                         double h, double delta0_value) {
  const int d = trunc.dim;
  if (!(h > 0.0)) throw InvalidArgument("hessian method: step must be positive");
  const double d0 = delta0_value > 0.0 ? delta0_value : delta0(a, mu);
  if (h * std::sqrt(static_cast<double>(d)) > d0)
    throw GapTooSmall("hessian step h sqrt(d) exceeds delta0 = " + std::to_string(d0));

  auto lambda = [&](const Vec& xi) { return lowest_eigenvalue(assemble_matrix(a, mu, xi, trunc)); };
  const double l0 = lambda(Vec::Zero(d));
  auto second_differences = [&](double s) {
    Mat D(d, d);
    for (int i = 0; i < d; ++i) {
      Vec e = Vec::Zero(d);
      e(i) = s;
      D(i, i) = (lambda(e) - 2.0 * l0 + lambda(-e)) / (s * s);
      for (int j = 0; j < i; ++j) {
        Vec f = Vec::Zero(d);
        f(j) = s;
        D(i, j) = D(j, i) = (lambda(e + f) - lambda(e - f) - lambda(f - e) + lambda(-e - f)) / (4.0 * s * s);
      }
    }
    return D;
  };
  const Mat Dh = second_differences(h);
  const Mat Dh2 = second_differences(0.5 * h);
  // lambda is even in xi, so the stencil error expands in even powers of h.
  const Mat g = (4.0 * Dh2 - Dh) / 3.0;

  EffectiveMatrix e;
  e.method = EffectiveMethod::Hessian;
  e.N = trunc.N;
  e.step = h;
  e.richardson_change = (Dh2 - Dh).cwiseAbs().maxCoeff();
  finalize(e, g.cast<cplx>());
  return e;
}

EffectiveMatrix effective_matrix_contour(const Kernel& a, const Modulation& mu, const Truncation& trunc,
                                         int contour_nodes, int max_nodes) {
  const int d = trunc.dim;
  const int m = trunc.size();
  const int z0 = trunc.zero_offset();
  const CMat A0 = assemble_matrix(a, mu, Vec::Zero(d), trunc);
  const FiberDerivatives der = assemble_derivatives(a, mu, trunc);
  const double gap = measured_gap(A0);
  if (!(gap > 0.0)) throw GapTooSmall("no spectral gap at xi = 0");
  const double normA = spectral_norm_hermitian(A0);
  const CMat I = CMat::Identity(m, m);
  const cplx two_pi_i(0.0, kTwoPi);

  EffectiveMatrix e;
  e.method = EffectiveMethod::Contour;
  e.N = trunc.N;

  CMat G0;
  std::vector<CMat> Gi;
  std::vector<std::vector<CMat>> Gij;
  for (int nodes = std::max(contour_nodes, 16); nodes <= max_nodes; nodes *= 2) {
    const ContourRule rule = stadium_contour(gap, nodes);
    G0 = CMat::Zero(m, m);
    Gi.assign(d, CMat::Zero(m, m));
    Gij.assign(d, std::vector<CMat>(d, CMat::Zero(m, m)));
    // Every integrand F satisfies F(conj z) = F(z)^*, and the stadium is
    // symmetric about the real axis with mirrored weights -conj(dz); the lower
    // half therefore contributes -M^* for each upper-half term M.
    auto add = [](CMat& acc, const CMat& M, double imz) {
      if (imz > 0.0) acc += M - M.adjoint();
      else if (imz == 0.0) acc += M;
    };
    for (std::size_t k = 0; k < rule.z.size(); ++k) {
      const double imz = rule.z[k].imag();
      if (imz < 0.0) continue;
      const cplx zdz = rule.z[k] * rule.dz[k];
      const CMat R = Eigen::PartialPivLU<CMat>(A0 - rule.z[k] * I).inverse();
      add(G0, zdz * R, imz);
      std::vector<CMat> X(d), Y(d);
      for (int i = 0; i < d; ++i) {
        Y[i] = der.dA[i] * R;
        X[i] = R * Y[i];
        add(Gi[i], zdz * X[i], imz);
      }
      for (int i = 0; i < d; ++i) {
        for (int j = i; j < d; ++j) {
          const CMat T = R * der.d2A[i][j] * R - X[i] * Y[j] - X[j] * Y[i];
          add(Gij[i][j], zdz * T, imz);
        }
      }
    }
    G0 /= -two_pi_i;
    for (int i = 0; i < d; ++i) {
      Gi[i] /= two_pi_i;
      for (int j = i; j < d; ++j) {
        Gij[i][j] /= two_pi_i;
        Gij[j][i] = Gij[i][j];
      }
    }
    e.contour_nodes = static_cast<int>(rule.z.size());
    e.G0_residual = spectral_norm(G0) / normA;
    if (e.G0_residual <= 1e-10) break;
  }
  if (e.G0_residual > 1e-10)
    throw QuadratureError("contour quadrature did not reach ||G_0|| <= 1e-10 ||A||", e.G0_residual);

  Eigen::MatrixXcd g(d, d);
  CMat P = CMat::Zero(m, m);
  P(z0, z0) = 1.0;
  for (int i = 0; i < d; ++i) {
    e.Gi_residual = std::max(e.Gi_residual, spectral_norm(Gi[i]) / normA);
    e.dA_compression = std::max(e.dA_compression, std::abs(der.dA[i](z0, z0)));
    for (int j = 0; j < d; ++j) {
      g(i, j) = Gij[i][j](z0, z0);
      const double scale = std::max(std::abs(g(i, j)), 1e-300);
      e.Gij_offP = std::max(e.Gij_offP, spectral_norm(Gij[i][j] - g(i, j) * P) / scale);
    }
  }

  // Analytic reduction: P d_ij A P - P d_i A R_perp d_j A P - (i <-> j).
  const CMat Rperp = reduced_inverse(A0, z0);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      const cplx analytic = der.d2A[i][j](z0, z0) -
                            (der.dA[i].row(z0) * Rperp * der.dA[j].col(z0))(0) -
                            (der.dA[j].row(z0) * Rperp * der.dA[i].col(z0))(0);
      e.route_residual = std::max(e.route_residual, std::abs(analytic - g(i, j)));
    }
  }
  if (e.Gi_residual > 1e-10) e.warnings.push_back("G_i quadrature residual above 1e-10");
  finalize(e, g);
  return e;
}

double relative_distance(const Mat& x, const Mat& y) {
  const double scale = std::max(x.norm(), y.norm());
  return scale > 0.0 ? (x - y).norm() / scale : 0.0;
}

double truncation_convergence(const Kernel& a, const Modulation& mu, const Truncation& trunc) {
  const Mat g1 = effective_matrix_corrector(a, mu, trunc).g0;
  const Mat g2 = effective_matrix_corrector(a, mu, Truncation(2 * trunc.N, trunc.dim)).g0;
  return relative_distance(g1, g2);
}

}  // namespace nonloc
