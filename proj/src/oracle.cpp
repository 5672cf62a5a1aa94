#include "nonloc/oracle.hpp"

#include "nonloc/fiber.hpp"
#include "nonloc/parallel.hpp"

#include <cmath>
#include <random>

namespace nonloc {

long CellGrid::points() const {
  long p = 1;
  for (int k = 0; k < dim; ++k) p *= G;
  return p;
}

Vec CellGrid::point(long flat) const {
  Vec x(dim);
  for (int k = 0; k < dim; ++k) {
    x(k) = static_cast<double>(flat % G) / G;
    flat /= G;
  }
  return x;
}

CellGrid make_cell_grid(const Kernel& a, int G, int L) {
  if (G < 16) throw InvalidArgument("cell grid: G must be at least 16");
  CellGrid g;
  g.G = G;
  g.dim = a.dimension();
  if (L > 0) {
    g.L = L;
    return g;
  }
  g.L = 1;
  while (a.mass_outside(g.L - 1) > 1e-10 * a.l1_norm()) {
    if (++g.L > 64) throw InvalidArgument("cell grid: kernel tail too heavy for the lattice cut-off");
  }
  return g;
}

namespace {

// Lattice shifts n with |n|_inf <= L.
std::vector<Vec> lattice(int d, int L) {
  const int side = 2 * L + 1;
  long total = 1;
  for (int k = 0; k < d; ++k) total *= side;
  std::vector<Vec> out;
  for (long f = 0; f < total; ++f) {
    long r = f;
    Vec n(d);
    for (int k = 0; k < d; ++k) {
      n(k) = static_cast<double>(r % side - L);
      r /= side;
    }
    out.push_back(n);
  }
  return out;
}

// Flat index of (x - y) mod grid.
long diff_index(long i, long j, const CellGrid& g) {
  long out = 0, stride = 1;
  for (int k = 0; k < g.dim; ++k) {
    const long a = i % g.G, b = j % g.G;
    out += ((a - b + g.G) % g.G) * stride;
    i /= g.G;
    j /= g.G;
    stride *= g.G;
  }
  return out;
}

void check_sizes(const Kernel& a, const Modulation& mu, const Vec& xi, const CVec& u, const CellGrid& grid) {
  if (a.dimension() != grid.dim || mu.dimension() != grid.dim || xi.size() != grid.dim)
    throw InvalidArgument("oracle: dimensions disagree");
  if (u.size() != grid.points()) throw InvalidArgument("oracle: grid function has the wrong length");
}

}  // namespace

CVec apply_fiber_realspace(const Kernel& a, const Modulation& mu, const Vec& xi, const CVec& u, const CellGrid& grid) {
  check_sizes(a, mu, xi, u, grid);
  const long P = grid.points();
  const auto shifts = lattice(grid.dim, grid.L);
  // Periodized kernel sums at z = (x - y) mod 1:
  //   s0(z) = sum_n a(z + n),  s1(z) = sum_n a(z + n) e^{-i<xi, z + n>}.
  std::vector<double> s0(P, 0.0);
  std::vector<cplx> s1(P, 0.0);
  parallel_for(static_cast<int>(P), [&](int t) {
    const Vec z = grid.point(t);
    for (const Vec& n : shifts) {
      const Vec w = z + n;
      const double v = a.value(w);
      if (v == 0.0) continue;
      s0[t] += v;
      s1[t] += v * std::exp(cplx(0.0, -xi.dot(w)));
    }
  });
  // x - y on the grid equals z - m for an integer m; the phase of s1 already
  // runs over all lattice shifts, so only the fractional part matters.
  const double w = 1.0 / static_cast<double>(P);
  CVec out(P);
  parallel_for(static_cast<int>(P), [&](int i) {
    const Vec x = grid.point(i);
    cplx acc = 0.0;
    for (long j = 0; j < P; ++j) {
      const long t = diff_index(i, j, grid);
      if (s0[t] == 0.0) continue;
      const double m = mu.evaluate(x, grid.point(j));
      acc += m * (s0[t] * u(i) - s1[t] * u(j));
    }
    out(i) = w * acc;
  });
  return out;
}

FormValues quadratic_form_check(const Kernel& a, const Modulation& mu, const Vec& xi, const CVec& u,
                                const CellGrid& grid) {
  check_sizes(a, mu, xi, u, grid);
  const CVec Au = apply_fiber_realspace(a, mu, xi, u, grid);
  const long P = grid.points();
  const double w = 1.0 / static_cast<double>(P);
  FormValues f;
  const cplx direct = w * u.dot(Au);  // conjugates u
  f.direct = direct.real();
  f.direct_imag = direct.imag();

  // Naive double sum over x, y in the cell and the lattice shift n.
  const auto shifts = lattice(grid.dim, grid.L);
  std::vector<double> row(P, 0.0);
  parallel_for(static_cast<int>(P), [&](int i) {
    const Vec x = grid.point(i);
    const cplx ex = std::exp(cplx(0.0, xi.dot(x))) * u(i);
    double acc = 0.0;
    for (long j = 0; j < P; ++j) {
      const Vec y = grid.point(j);
      const double m = mu.evaluate(x, y);
      for (const Vec& n : shifts) {
        const double v = a.value(x - y - n);
        if (v == 0.0) continue;
        acc += v * m * std::norm(ex - std::exp(cplx(0.0, xi.dot(y + n))) * u(j));
      }
    }
    row[i] = acc;
  });
  double total = 0.0;
  for (double r : row) total += r;
  f.symmetrized = 0.5 * w * w * total;
  return f;
}

CVec synthesize(const CVec& coeffs, const Truncation& trunc, const CellGrid& grid) {
  if (coeffs.size() != trunc.size() || trunc.dim != grid.dim) throw InvalidArgument("synthesize: size mismatch");
  const long P = grid.points();
  CVec out(P);
  for (long i = 0; i < P; ++i) {
    const Vec x = grid.point(i);
    cplx acc = 0.0;
    for (int o = 0; o < trunc.size(); ++o)
      if (coeffs(o) != 0.0) acc += coeffs(o) * std::exp(cplx(0.0, kTwoPi * trunc.index(o).cast<double>().dot(x)));
    out(i) = acc;
  }
  return out;
}

CVec random_trig_coefficients(const Truncation& trunc, int band, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  CVec c = CVec::Zero(trunc.size());
  for (int o = 0; o < trunc.size(); ++o) {
    const double re = normal(rng), im = normal(rng);
    if ((trunc.index(o).array().abs() <= band).all()) c(o) = cplx(re, im);
  }
  return c;
}

double galerkin_vs_realspace(const Kernel& a, const Modulation& mu, const Vec& xi, const Truncation& trunc,
                             const CellGrid& grid, unsigned seed) {
  const int band = trunc.N - mu.diagonal_spread();
  if (band < 0) throw InvalidArgument("oracle: truncation too small for the modulation spread");
  const CVec c = random_trig_coefficients(trunc, band, seed);
  const CVec galerkin = synthesize(assemble_matrix(a, mu, xi, trunc) * c, trunc, grid);
  const CVec oracle = apply_fiber_realspace(a, mu, xi, synthesize(c, trunc, grid), grid);
  return (galerkin - oracle).norm() / oracle.norm();
}

}  // namespace nonloc
