#include "nfbm/linops.hpp"

#include <memory>

namespace nfbm {

Metric Metric::identity() {
  Metric m;
  m.apply = [](const Vec& x) { return x; };
  m.apply_inv = [](const Vec& x) { return x; };
  m.strong_monotonicity_lb = 1.0;
  return m;
}

Metric Metric::diagonal(Vec d) {
  double lb = std::numeric_limits<double>::infinity();
  for (double v : d) lb = std::min(lb, v);
  if (!(lb > 0.0)) throw metric_error("diagonal metric needs positive entries");
  Metric m;
  auto dd = std::make_shared<Vec>(std::move(d));
  m.apply = [dd](const Vec& x) {
    check_dim(x, *dd, "Metric::diagonal");
    Vec r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) r[i] = (*dd)[i] * x[i];
    return r;
  };
  m.apply_inv = [dd](const Vec& x) {
    check_dim(x, *dd, "Metric::diagonal inverse");
    Vec r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) r[i] = x[i] / (*dd)[i];
    return r;
  };
  m.strong_monotonicity_lb = lb;
  return m;
}

double inner_s(const Metric& m, const Vec& x, const Vec& y) {
  check_dim(x, y, "inner_s");
  return dot(m.apply(x), y);
}

namespace {

double checked_sqrt(double q, double scale, const char* what) {
  if (q < -1e-12 * std::max(1.0, scale))
    throw metric_error(std::string(what) +
                       ": negative quadratic form, metric is not monotone");
  return std::sqrt(std::max(q, 0.0));
}

}  // namespace

double norm_s(const Metric& m, const Vec& x) {
  const double q = inner_s(m, x, x);
  return checked_sqrt(q, dot(x, x), "norm_s");
}

double norm_s_inv(const Metric& m, const Vec& x) {
  if (!m.apply_inv) throw metric_error("norm_s_inv: metric has no inverse");
  const double q = dot(m.apply_inv(x), x);
  return checked_sqrt(q, dot(x, x), "norm_s_inv");
}

double estimate_lipschitz_s(const std::function<Vec(const Vec&)>& T,
                            const Metric& m, std::size_t dim,
                            std::uint64_t seed, int trials) {
  if (trials < 1) throw parameter_error("estimate_lipschitz_s: trials >= 1");
  Rng rng(seed);
  double best = 0.0;
  for (int t = 0; t < trials; ++t) {
    Vec x = random_uniform(rng, dim);
    Vec y = random_uniform(rng, dim);
    double den = norm_s(m, sub(x, y));
    while (den == 0.0) {  // degenerate pair, resample
      y = random_uniform(rng, dim);
      den = norm_s(m, sub(x, y));
    }
    const double num = norm_s_inv(m, sub(T(x), T(y)));
    best = std::max(best, num / den);
  }
  return best;
}

PowerIterationResult power_iteration(const LinOp& L, std::uint64_t seed,
                                     int max_iters, double tol) {
  if (max_iters < 1) throw parameter_error("power_iteration: max_iters >= 1");
  if (!(tol > 0.0)) throw parameter_error("power_iteration: tol > 0");
  Rng rng(seed);
  Vec q = random_uniform(rng, static_cast<std::size_t>(L.domain_dim));
  double qn = norm2(q);
  while (qn == 0.0) {
    q = random_uniform(rng, static_cast<std::size_t>(L.domain_dim));
    qn = norm2(q);
  }
  for (auto& v : q) v /= qn;

  PowerIterationResult res;
  double prev = -1.0;
  for (int k = 1; k <= max_iters; ++k) {
    Vec z = L.adjoint_apply(L.apply(q));
    const double rayleigh = dot(q, z);  // eigenvalue estimate for L* L
    res.value = std::sqrt(std::max(rayleigh, 0.0));
    res.iterations = k;
    const double zn = norm2(z);
    if (zn == 0.0) {  // L annihilates the current vector: norm estimate 0
      res.converged = true;
      return res;
    }
    if (prev >= 0.0 &&
        std::abs(res.value - prev) <= tol * std::max(res.value, 1e-300)) {
      res.converged = true;
      return res;
    }
    prev = res.value;
    for (std::size_t i = 0; i < q.size(); ++i) q[i] = z[i] / zn;
  }
  res.converged = false;
  return res;
}

double self_adjoint_defect(const Metric& m, std::size_t dim,
                           std::uint64_t seed, int pairs) {
  Rng rng(seed);
  double worst = 0.0;
  for (int t = 0; t < pairs; ++t) {
    Vec x = random_uniform(rng, dim);
    Vec y = random_uniform(rng, dim);
    const double a = dot(m.apply(x), y);
    const double b = dot(x, m.apply(y));
    worst = std::max(worst, std::abs(a - b) / (1.0 + std::abs(a)));
  }
  return worst;
}

double monotonicity_ratio(const Metric& m, std::size_t dim,
                          std::uint64_t seed, int samples) {
  Rng rng(seed);
  double worst = std::numeric_limits<double>::infinity();
  for (int t = 0; t < samples; ++t) {
    Vec x = random_uniform(rng, dim);
    worst = std::min(worst, dot(m.apply(x), x) / dot(x, x));
  }
  return worst;
}

double adjoint_defect(const LinOp& L, std::uint64_t seed, int pairs) {
  Rng rng(seed);
  double worst = 0.0;
  for (int t = 0; t < pairs; ++t) {
    Vec x = random_uniform(rng, static_cast<std::size_t>(L.domain_dim));
    Vec u = random_uniform(rng, static_cast<std::size_t>(L.range_dim));
    const double a = dot(L.apply(x), u);
    const double b = dot(x, L.adjoint_apply(u));
    const double scale = std::max({1.0, std::abs(a), std::abs(b)});
    worst = std::max(worst, std::abs(a - b) / scale);
  }
  return worst;
}

double inverse_defect(const Metric& m, std::size_t dim, std::uint64_t seed,
                      int samples) {
  if (!m.apply_inv) throw metric_error("inverse_defect: metric has no inverse");
  Rng rng(seed);
  double worst = 0.0;
  for (int t = 0; t < samples; ++t) {
    Vec x = random_uniform(rng, dim);
    const double nx = norm2(x);
    worst = std::max(worst, norm2(sub(m.apply_inv(m.apply(x)), x)) / nx);
    worst = std::max(worst, norm2(sub(m.apply(m.apply_inv(x)), x)) / nx);
  }
  return worst;
}

}  // namespace nfbm
