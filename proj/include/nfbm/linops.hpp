#pragma once

#include <functional>
#include <optional>

#include "nfbm/vec.hpp"

namespace nfbm {

/// Self-adjoint strongly monotone linear operator S together with its
/// inverse. The inverse is supplied explicitly by each instance; it may be
/// absent for metrics where no closed form is available, in which case the
/// S^{-1}-norm operations throw.
struct Metric {
  std::function<Vec(const Vec&)> apply;
  std::function<Vec(const Vec&)> apply_inv;
  double strong_monotonicity_lb = 1.0;

  static Metric identity();
  static Metric diagonal(Vec d);
};

/// Linear bounded operator with its adjoint. Dimensions are tracked so
/// random-vector probes and power iteration can build start vectors.
struct LinOp {
  std::function<Vec(const Vec&)> apply;
  std::function<Vec(const Vec&)> adjoint_apply;
  int domain_dim = 0;
  int range_dim = 0;
  std::optional<double> norm_estimate;
};

/// <x, y>_S = <S x, y>
double inner_s(const Metric& m, const Vec& x, const Vec& y);

double norm_s(const Metric& m, const Vec& x);

double norm_s_inv(const Metric& m, const Vec& x);

/// Sampling-based lower bound on the Lipschitz constant of T measured from
/// the S-norm into the S^{-1}-norm. A refuter for claimed constants, not a
/// prover: the true constant is at least the returned value.
double estimate_lipschitz_s(const std::function<Vec(const Vec&)>& T,
                            const Metric& m, std::size_t dim, std::uint64_t seed,
                            int trials);

struct PowerIterationResult {
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// Estimate of ||L|| = sqrt(lambda_max(L* L)) by power iteration on L* L.
/// Stops when successive estimates differ by less than tol relative; on
/// hitting max_iters the best estimate is returned with converged = false.
PowerIterationResult power_iteration(const LinOp& L, std::uint64_t seed,
                                     int max_iters, double tol);

// Numerical validators for the structural assumptions. Each returns the
// worst defect observed over seeded random probes; callers compare against
// their tolerance.

/// max over pairs of |<Sx,y> - <x,Sy>| / (1 + |<Sx,y>|)
double self_adjoint_defect(const Metric& m, std::size_t dim,
                           std::uint64_t seed, int pairs);

/// min over samples of <Sx,x> / <x,x>
double monotonicity_ratio(const Metric& m, std::size_t dim, std::uint64_t seed,
                          int samples);

/// max over pairs of |<Lx,u> - <x,L*u>| relative to the magnitudes involved
double adjoint_defect(const LinOp& L, std::uint64_t seed, int pairs);

/// max over samples of ||S^{-1}(S x) - x|| / ||x|| and the reverse order
double inverse_defect(const Metric& m, std::size_t dim, std::uint64_t seed,
                      int samples);

}  // namespace nfbm
