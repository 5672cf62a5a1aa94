#pragma once

#include "nonloc/types.hpp"

namespace nonloc {

/// Cell Fourier basis e^{2 pi i <n, x>}, |n|_inf <= N.
///
/// Flat offset of n is sum_k (n_k + N) (2N + 1)^k: coordinate 0 varies
/// fastest. The constant mode n = 0 therefore sits at offset (m - 1) / 2.
struct Truncation {
  int N = 1;
  int dim = 1;

  Truncation() = default;
  Truncation(int n, int d) : N(n), dim(d) {
    if (n < 1) throw InvalidArgument("truncation: N must be at least 1");
    if (d < 1 || d > 3) throw InvalidArgument("truncation: dimension must be 1, 2 or 3");
  }

  int side() const { return 2 * N + 1; }
  int size() const {
    int m = 1;
    for (int k = 0; k < dim; ++k) m *= side();
    return m;
  }
  int zero_offset() const { return (size() - 1) / 2; }

  bool contains(const IVec& n) const { return (n.array().abs() <= N).all(); }

  int offset(const IVec& n) const {
    int off = 0, stride = 1;
    for (int k = 0; k < dim; ++k) {
      off += (n(k) + N) * stride;
      stride *= side();
    }
    return off;
  }

  IVec index(int offset) const {
    IVec n(dim);
    for (int k = 0; k < dim; ++k) {
      n(k) = offset % side() - N;
      offset /= side();
    }
    return n;
  }
};

}  // namespace nonloc
