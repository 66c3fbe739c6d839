#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "nfbm/errors.hpp"

namespace nfbm {

/// Dense real vector in double precision. Images and product-space iterates
/// are flattened row-major into this type.
using Vec = std::vector<double>;

using Rng = std::mt19937_64;

inline void check_dim(const Vec& a, const Vec& b, const char* where) {
  if (a.size() != b.size()) throw dimension_error(a.size(), b.size(), where);
}

inline double dot(const Vec& a, const Vec& b) {
  check_dim(a, b, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

inline bool all_finite(const Vec& a) {
  for (double v : a)
    if (!std::isfinite(v)) return false;
  return true;
}

/// y += c * x
inline void axpy(double c, const Vec& x, Vec& y) {
  check_dim(x, y, "axpy");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += c * x[i];
}

inline Vec sub(const Vec& a, const Vec& b) {
  check_dim(a, b, "sub");
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

inline Vec add(const Vec& a, const Vec& b) {
  check_dim(a, b, "add");
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

inline Vec scaled(double c, const Vec& a) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = c * a[i];
  return r;
}

/// a*x + b*y, evaluated as a*x[i] + b*y[i] elementwise.
inline Vec lincomb(double a, const Vec& x, double b, const Vec& y) {
  check_dim(x, y, "lincomb");
  Vec r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) r[i] = a * x[i] + b * y[i];
  return r;
}

inline double max_abs(const Vec& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

inline Vec random_uniform(Rng& rng, std::size_t dim, double lo = -1.0,
                          double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  Vec r(dim);
  for (auto& v : r) v = d(rng);
  return r;
}

/// Relative change between successive iterates; the floor keeps the
/// quotient defined when the current iterate is (near) zero.
inline double relative_error(const Vec& next, const Vec& curr) {
  const double denom =
      std::max(norm2(curr), std::numeric_limits<double>::epsilon());
  return norm2(sub(next, curr)) / denom;
}

}  // namespace nfbm
