#include "nonloc/modulation.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace nonloc {

namespace {

using Key = std::vector<int>;

Key make_key(const IVec& p, const IVec& q) {
  Key k(p.size() + q.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) k[i] = p(i);
  for (Eigen::Index i = 0; i < q.size(); ++i) k[p.size() + i] = q(i);
  return k;
}

int default_grid(int d) {
  switch (d) {
    case 1: return 512;
    case 2: return 64;
    default: return 16;
  }
}

}  // namespace

Modulation Modulation::from_terms(int dimension, std::vector<ModulationTerm> terms, int grid_per_dim) {
  if (dimension < 1 || dimension > 3) throw InvalidArgument("modulation: dimension must be 1, 2 or 3");
  std::map<Key, cplx> merged;
  double scale = 0.0;
  for (const auto& t : terms) {
    if (t.p.size() != dimension || t.q.size() != dimension)
      throw InvalidArgument("modulation: index vectors must have the modulation dimension");
    if (!std::isfinite(t.c.real()) || !std::isfinite(t.c.imag()))
      throw InvalidArgument("modulation: coefficients must be finite");
    merged[make_key(t.p, t.q)] += t.c;
  }
  for (const auto& [k, c] : merged) scale = std::max(scale, std::abs(c));
  if (scale == 0.0) throw InvalidArgument("modulation: all coefficients vanish");

  const double tol = 1e-14 * scale;
  Modulation mu;
  mu.dimension_ = dimension;
  for (const auto& [key, c] : merged) {
    if (std::abs(c) <= tol) continue;
    Key swapped(key.size()), negated(key.size());
    for (int i = 0; i < dimension; ++i) {
      swapped[i] = key[dimension + i];
      swapped[dimension + i] = key[i];
    }
    for (std::size_t i = 0; i < key.size(); ++i) negated[i] = -key[i];
    auto it_s = merged.find(swapped);
    if (it_s == merged.end() || std::abs(it_s->second - c) > tol)
      throw InvalidArgument("modulation is not symmetric: c_{p,q} != c_{q,p}");
    auto it_n = merged.find(negated);
    if (it_n == merged.end() || std::abs(it_n->second - std::conj(c)) > tol)
      throw InvalidArgument("modulation is not real: c_{-p,-q} != conj(c_{p,q})");
    ModulationTerm t{IVec(dimension), IVec(dimension), c};
    for (int i = 0; i < dimension; ++i) {
      t.p(i) = key[i];
      t.q(i) = key[dimension + i];
      mu.bandwidth_ = std::max({mu.bandwidth_, std::abs(key[i]), std::abs(key[dimension + i])});
      mu.spread_ = std::max(mu.spread_, std::abs(key[i] + key[dimension + i]));
    }
    mu.terms_.push_back(std::move(t));
  }
  mu.bounds_ = certify_bounds(mu, grid_per_dim > 0 ? grid_per_dim : std::max(default_grid(dimension), 4 * mu.bandwidth_ + 1));
  return mu;
}

Modulation Modulation::constant(int dimension, double value) {
  if (!(value > 0.0)) throw NonPositiveLowerBound(value);
  return from_terms(dimension, {ModulationTerm{IVec::Zero(dimension), IVec::Zero(dimension), cplx(value, 0.0)}});
}

Modulation Modulation::cosine_product(int dimension, double amplitude, int axis, int grid_per_dim) {
  if (axis < 0 || axis >= dimension) throw InvalidArgument("cosine_product: axis out of range");
  std::vector<ModulationTerm> terms;
  terms.push_back({IVec::Zero(dimension), IVec::Zero(dimension), cplx(1.0, 0.0)});
  for (int sp : {-1, 1}) {
    for (int sq : {-1, 1}) {
      ModulationTerm t{IVec::Zero(dimension), IVec::Zero(dimension), cplx(0.25 * amplitude, 0.0)};
      t.p(axis) = sp;
      t.q(axis) = sq;
      terms.push_back(t);
    }
  }
  return from_terms(dimension, std::move(terms), grid_per_dim);
}

double Modulation::evaluate(const Vec& x, const Vec& y) const {
  cplx sum = 0.0;
  double scale = 0.0;
  for (const auto& t : terms_) {
    const double phase = kTwoPi * (t.p.cast<double>().dot(x) + t.q.cast<double>().dot(y));
    sum += t.c * cplx(std::cos(phase), std::sin(phase));
    scale += std::abs(t.c);
  }
  if (std::abs(sum.imag()) > 1e-12 * std::max(1.0, scale))
    throw Error("modulation evaluated to a non-real value");
  return sum.real();
}

double Modulation::lipschitz_constant() const {
  double l = 0.0;
  for (const auto& t : terms_) l += std::abs(t.c) * (t.p.cast<double>().norm() + t.q.cast<double>().norm());
  return kTwoPi * l;
}

Modulation Modulation::scaled(double factor) const {
  if (!(factor > 0.0)) throw InvalidArgument("modulation: scale factor must be positive");
  Modulation mu = *this;
  for (auto& t : mu.terms_) t.c *= factor;
  mu.bounds_.lower *= factor;
  mu.bounds_.upper *= factor;
  mu.bounds_.grid_min *= factor;
  mu.bounds_.grid_max *= factor;
  mu.bounds_.margin *= factor;
  return mu;
}

double Modulation::mean() const {
  for (const auto& t : terms_)
    if ((t.p.array() == 0).all() && (t.q.array() == 0).all()) return t.c.real();
  return 0.0;
}

CertifiedBounds certify_bounds(const Modulation& mu, int grid_per_dim) {
  const int d = mu.dimension();
  if (grid_per_dim < 4 * mu.bandwidth() + 1)
    throw InvalidArgument("certify_bounds: grid_per_dim must be at least 4 * bandwidth + 1");
  const int g = grid_per_dim;
  const int dims = 2 * d;

  // Per-term, per-coordinate phase tables e^{2 pi i k j / g}.
  const auto& terms = mu.terms();
  std::vector<std::vector<cplx>> tables(terms.size() * dims, std::vector<cplx>(g));
  for (std::size_t t = 0; t < terms.size(); ++t) {
    for (int c = 0; c < dims; ++c) {
      const int k = c < d ? terms[t].p(c) : terms[t].q(c - d);
      for (int j = 0; j < g; ++j) {
        const double ph = kTwoPi * static_cast<double>((static_cast<long>(k) * j) % g) / g;
        tables[t * dims + c][j] = cplx(std::cos(ph), std::sin(ph));
      }
    }
  }

  long total = 1;
  for (int c = 0; c < dims; ++c) total *= g;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  std::vector<int> idx(dims, 0);
  for (long flat = 0; flat < total; ++flat) {
    long r = flat;
    for (int c = 0; c < dims; ++c) {
      idx[c] = static_cast<int>(r % g);
      r /= g;
    }
    double v = 0.0;
    for (std::size_t t = 0; t < terms.size(); ++t) {
      cplx ph = terms[t].c;
      for (int c = 0; c < dims; ++c) ph *= tables[t * dims + c][idx[c]];
      v += ph.real();
    }
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }

  CertifiedBounds b;
  b.grid_per_dim = g;
  b.grid_min = lo;
  b.grid_max = hi;
  b.margin = mu.lipschitz_constant() * std::sqrt(static_cast<double>(dims)) / g;
  b.lower = lo - b.margin;
  b.upper = hi + b.margin;
  if (!(b.lower > 0.0)) throw NonPositiveLowerBound(b.lower);
  return b;
}

}  // namespace nonloc
