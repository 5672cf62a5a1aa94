#include "nonloc/fiber.hpp"

#include "nonloc/quadrature.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace nonloc {

namespace {

void check_compatible(const Kernel& a, const Modulation& mu, const Truncation& trunc) {
  if (a.dimension() != mu.dimension() || a.dimension() != trunc.dim)
    throw InvalidArgument("kernel, modulation and truncation dimensions disagree");
  if (trunc.N < mu.bandwidth())
    throw InvalidArgument("truncation N = " + std::to_string(trunc.N) +
                          " is below the modulation bandwidth " + std::to_string(mu.bandwidth()));
}

// Values f(j) on the box |j|_inf <= R, stored with the Truncation layout.
template <class F>
std::vector<typename std::invoke_result_t<F, const IVec&>> tabulate(int dim, int R, F&& f) {
  const Truncation box(std::max(R, 1), dim);
  std::vector<typename std::invoke_result_t<F, const IVec&>> out;
  out.reserve(box.size());
  for (int o = 0; o < box.size(); ++o) out.push_back(f(box.index(o)));
  return out;
}

// Adds c * entry(term, j, n) at (m, n) with m = n + p + q, j = q + n.
template <class Entry, class Out>
void scatter(const Modulation& mu, const Truncation& trunc, Entry&& entry, Out&& out) {
  const int m = trunc.size();
  std::vector<IVec> idx(m);
  for (int o = 0; o < m; ++o) idx[o] = trunc.index(o);
  for (std::size_t t = 0; t < mu.terms().size(); ++t) {
    const auto& term = mu.terms()[t];
    const IVec s = term.p + term.q;
    for (int col = 0; col < m; ++col) {
      const IVec row_idx = idx[col] + s;
      if (!trunc.contains(row_idx)) continue;
      out(trunc.offset(row_idx), col, term.c, entry(t, term.q + idx[col], idx[col]));
    }
  }
}

}  // namespace

CMat assemble_matrix(const Kernel& a, const Modulation& mu, const Vec& xi, const Truncation& trunc) {
  return assemble(a, mu, xi, trunc).A;
}

FiberOperator assemble(const Kernel& a, const Modulation& mu, const Vec& xi, const Truncation& trunc) {
  check_compatible(a, mu, trunc);
  if (xi.size() != trunc.dim) throw InvalidArgument("assemble: xi has the wrong dimension");
  const int d = trunc.dim;
  const int R = trunc.N + mu.bandwidth();
  const Truncation box(R, d);
  const auto shifted = tabulate(d, R, [&](const IVec& j) { return a.fourier(xi + kTwoPi * j.cast<double>()); });
  const auto lattice = tabulate(d, R, [&](const IVec& j) { return a.fourier(kTwoPi * j.cast<double>()); });
  const auto symbols = tabulate(d, trunc.N, [&](const IVec& n) { return a.symbol(xi + kTwoPi * n.cast<double>()); });

  const int m = trunc.size();
  FiberOperator f{xi, trunc, CMat::Zero(m, m), CMat::Zero(m, m), CMat::Zero(m, m)};
  struct Parts {
    double p, b, diff;
  };
  scatter(
      mu, trunc,
      [&](std::size_t t, const IVec& j, const IVec& n) {
        const IVec& q = mu.terms()[t].q;
        const double pv = lattice[box.offset(q)];
        const double bv = shifted[box.offset(j)];
        // With q = 0 the difference is Â(xi + 2 pi n); take it without cancellation.
        const double diff = (q.array() == 0).all() ? symbols[trunc.offset(n)] : pv - bv;
        return Parts{pv, bv, diff};
      },
      [&](int row, int col, cplx c, const Parts& v) {
        f.P(row, col) += c * v.p;
        f.B(row, col) += c * v.b;
        f.A(row, col) += c * v.diff;
      });
  return f;
}

CMat assemble_unmodulated(const Kernel& a, const Vec& xi, const Truncation& trunc) {
  const int m = trunc.size();
  CMat A = CMat::Zero(m, m);
  for (int o = 0; o < m; ++o) A(o, o) = a.symbol(xi + kTwoPi * trunc.index(o).cast<double>());
  return A;
}

FiberDerivatives assemble_derivatives(const Kernel& a, const Modulation& mu, const Truncation& trunc) {
  check_compatible(a, mu, trunc);
  const int d = trunc.dim;
  const int m = trunc.size();
  const int R = trunc.N + mu.bandwidth();
  const Truncation box(R, d);
  const auto grads = tabulate(d, R, [&](const IVec& j) { return a.fourier_gradient(kTwoPi * j.cast<double>()); });
  const auto hess = tabulate(d, R, [&](const IVec& j) { return a.fourier_hessian(kTwoPi * j.cast<double>()); });

  FiberDerivatives der;
  der.dA.assign(d, CMat::Zero(m, m));
  der.d2A.assign(d, std::vector<CMat>(d, CMat::Zero(m, m)));
  // P does not depend on xi, so d^alpha A = -d^alpha B.
  scatter(
      mu, trunc, [&](std::size_t, const IVec& j, const IVec&) { return box.offset(j); },
      [&](int row, int col, cplx c, int j) {
        for (int i = 0; i < d; ++i) {
          der.dA[i](row, col) -= c * grads[j](i);
          for (int k = 0; k < d; ++k) der.d2A[i][k](row, col) -= c * hess[j](i, k);
        }
      });
  return der;
}

SpectralData spectral_data(const CMat& A, int count) {
  if (count < 1 || count > A.rows()) throw InvalidArgument("spectral_data: count out of range");
  Eigen::SelfAdjointEigenSolver<CMat> es(A);
  if (es.info() != Eigen::Success) throw SolverError("Hermitian eigensolver did not converge");
  SpectralData s;
  s.eigenvalues = es.eigenvalues().head(count);
  s.eigenvectors = es.eigenvectors().leftCols(count);
  const double scale = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
  for (int k = 0; k < count; ++k) {
    const double r = (A * s.eigenvectors.col(k) - s.eigenvalues(k) * s.eigenvectors.col(k)).norm() / scale;
    s.max_residual = std::max(s.max_residual, r);
  }
  if (s.max_residual > 1e-10) throw SolverError("eigenpair residual above 1e-10 relative");
  s.eigenvalues(0) = std::max(s.eigenvalues(0), 0.0);
  return s;
}

ContourRule stadium_contour(double gap, int nodes) {
  if (!(gap > 0.0)) throw GapTooSmall("stadium contour needs a positive gap");
  const int per_piece = std::max(nodes / 4, 1);
  const GaussLegendreRule gl = gauss_legendre(per_piece);
  const double len = gap / 3.0;
  const double rho = gap / 6.0;
  ContourRule rule;
  rule.z.reserve(4 * per_piece);
  rule.dz.reserve(4 * per_piece);
  for (int piece = 0; piece < 4; ++piece) {
    for (int k = 0; k < per_piece; ++k) {
      const double t = gl.nodes[k];
      const double w = gl.weights[k];
      switch (piece) {
        case 0: {  // right half circle, theta from -pi/2 to pi/2
          const double th = 0.5 * kPi * t;
          const cplx e(std::cos(th), std::sin(th));
          rule.z.push_back(len + rho * e);
          rule.dz.push_back(w * 0.5 * kPi * cplx(0.0, 1.0) * rho * e);
          break;
        }
        case 1: {  // top segment, right to left
          rule.z.push_back(cplx(0.5 * len * (1.0 - t), rho));
          rule.dz.push_back(w * cplx(-0.5 * len, 0.0));
          break;
        }
        case 2: {  // left half circle, theta from pi/2 to 3 pi/2
          const double th = kPi + 0.5 * kPi * t;
          const cplx e(std::cos(th), std::sin(th));
          rule.z.push_back(rho * e);
          rule.dz.push_back(w * 0.5 * kPi * cplx(0.0, 1.0) * rho * e);
          break;
        }
        default: {  // bottom segment, left to right
          rule.z.push_back(cplx(0.5 * len * (1.0 + t), -rho));
          rule.dz.push_back(w * cplx(0.5 * len, 0.0));
          break;
        }
      }
    }
  }
  return rule;
}

ProjectorResult spectral_projector_riesz(const CMat& A, double gap, int contour_nodes, int max_nodes) {
  if (!(gap > 0.0)) throw GapTooSmall("Riesz projector needs a positive gap at xi = 0");
  Eigen::SelfAdjointEigenSolver<CMat> es(A, Eigen::EigenvaluesOnly);
  const double tol = 1e-12 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  int inside = 0, forbidden = 0;
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
    const double l = es.eigenvalues()(k);
    if (l >= -tol && l <= gap / 3.0) ++inside;
    else if (l > gap / 3.0 && l < 2.0 * gap / 3.0) ++forbidden;
  }
  if (inside != 1 || forbidden != 0)
    throw GapTooSmall("no isolated lowest eigenvalue in [0, d0/3]: " + std::to_string(inside) +
                      " inside, " + std::to_string(forbidden) + " in (d0/3, 2 d0/3)");

  const Eigen::Index m = A.rows();
  const CMat I = CMat::Identity(m, m);
  ProjectorResult res;
  for (int nodes = std::max(contour_nodes, 4); nodes <= max_nodes; nodes *= 2) {
    const ContourRule rule = stadium_contour(gap, nodes);
    CMat sum = CMat::Zero(m, m);
    for (std::size_t k = 0; k < rule.z.size(); ++k) {
      Eigen::PartialPivLU<CMat> lu(A - rule.z[k] * I);
      sum += rule.dz[k] * lu.inverse();
    }
    res.F = sum / cplx(0.0, -kTwoPi);
    res.nodes = static_cast<int>(rule.z.size());
    res.idempotency = spectral_norm(res.F * res.F - res.F);
    if (res.idempotency < 1e-8) break;
  }
  if (res.idempotency >= 1e-8)
    throw QuadratureError("Riesz projector quadrature did not reach idempotency 1e-8", res.idempotency);
  res.hermiticity = spectral_norm(res.F - res.F.adjoint());
  res.trace = res.F.trace().real();
  return res;
}

CMat fiber_resolvent(const CMat& A, double shift) {
  if (!(shift > 0.0)) throw InvalidArgument("fiber_resolvent: shift must be positive");
  const Eigen::Index m = A.rows();
  Eigen::LLT<CMat> llt(A + shift * CMat::Identity(m, m));
  if (llt.info() != Eigen::Success) throw SolverError("fiber_resolvent: matrix is not positive definite");
  return llt.solve(CMat::Identity(m, m));
}

double hadamard_remainder(const CMat& A_xi, const CMat& A_0, const FiberDerivatives& der, const Vec& xi) {
  CMat r = A_xi - A_0;
  const int d = static_cast<int>(xi.size());
  for (int i = 0; i < d; ++i) {
    r -= xi(i) * der.dA[i];
    for (int j = 0; j < d; ++j) r -= 0.5 * xi(i) * xi(j) * der.d2A[i][j];
  }
  return spectral_norm(r);
}

double spectral_norm(const CMat& M) {
  if (M.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMat> svd(M);
  return svd.singularValues()(0);
}

double spectral_norm_hermitian(const CMat& M) {
  if (M.size() == 0) return 0.0;
  const CMat H = 0.5 * (M + M.adjoint());
  Eigen::SelfAdjointEigenSolver<CMat> es(H, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

std::pair<double, double> potential_range(const Kernel& a, const Modulation& mu, int grid_per_dim) {
  const int d = mu.dimension();
  // p_hat_k = sum_{p + q = k} c_{p,q} \hat a(2 pi q)
  std::vector<std::pair<IVec, cplx>> coeffs;
  for (const auto& t : mu.terms()) coeffs.emplace_back(t.p + t.q, t.c * a.fourier(kTwoPi * t.q.cast<double>()));
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  long total = 1;
  for (int k = 0; k < d; ++k) total *= grid_per_dim;
  Vec x(d);
  for (long flat = 0; flat < total; ++flat) {
    long r = flat;
    for (int k = 0; k < d; ++k) {
      x(k) = static_cast<double>(r % grid_per_dim) / grid_per_dim;
      r /= grid_per_dim;
    }
    double v = 0.0;
    for (const auto& [k, c] : coeffs) {
      const double ph = kTwoPi * k.cast<double>().dot(x);
      v += (c * cplx(std::cos(ph), std::sin(ph))).real();
    }
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return {lo, hi};
}

}  // namespace nonloc
