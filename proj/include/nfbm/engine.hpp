#pragma once

#include <functional>
#include <optional>

#include "nfbm/certify.hpp"
#include "nfbm/linops.hpp"
#include "nfbm/vec.hpp"

namespace nfbm {

/// Oracles defining one problem instance for the generic engine.
///
///   warped_resolvent(n, v) = (M_n + A)^{-1} v
///   kernel(n, x)           = M_n x
///   cocoercive(x)          = C x
///
/// mu is the cocoercivity modulus of C, zeta(n) the Lipschitz constant of
/// T_n = gamma_n M_n - S in the S-geometry, and t_neg_monotone records
/// whether -T_n is monotone.
struct OperatorBundle {
  std::function<Vec(int, const Vec&)> warped_resolvent;
  std::function<Vec(int, const Vec&)> kernel;
  std::function<Vec(const Vec&)> cocoercive;
  Metric metric = Metric::identity();
  double mu = 1.0;
  ScalarSeq zeta = constant_seq(0.0);
  bool t_neg_monotone = false;
};

/// Per-iteration parameters. When restart_n0 is set, the inertial weight is
/// alpha(n) before the restart index and 0 from it on.
struct Schedule {
  ScalarSeq gamma = constant_seq(1.0);
  ScalarSeq alpha = constant_seq(0.0);
  ScalarSeq beta = constant_seq(0.0);
  ScalarSeq theta = constant_seq(0.0);
  double lambda = 1.0;
  std::optional<int> restart_n0;

  double alpha_at(int n) const {
    if (restart_n0 && n >= *restart_n0) return 0.0;
    return alpha(n);
  }

  static Schedule constant(double gamma, double alpha = 0.0, double beta = 0.0,
                           double theta = 0.0, double lambda = 1.0) {
    Schedule s;
    s.gamma = constant_seq(gamma);
    s.alpha = constant_seq(alpha);
    s.beta = constant_seq(beta);
    s.theta = constant_seq(theta);
    s.lambda = lambda;
    return s;
  }
};

/// State carried between iterations: x_n, x_{n-1}, the momentum vector u_n,
/// and the iteration index n. Transients live only inside a step.
struct IterateState {
  Vec x_curr;
  Vec x_prev;
  Vec u;
  int n = 0;
};

/// Transients of one inertial-relaxed step, needed by the Lyapunov monitor.
struct StepTransients {
  Vec y;
  Vec p;
};

enum class Variant { base, alg1, alg2 };

Variant variant_from_string(const std::string& name);

/// x_{n+1} = (M_n+A)^{-1}(M_n x_n - C x_n + u_n/gamma_n),
/// u_{n+1} = T_n x_{n+1} - T_n x_n.
IterateState step_base(const OperatorBundle& b, const Schedule& s,
                       const IterateState& st);

/// Inertial extrapolation, resolvent step, momentum update, relaxation.
IterateState step_inertial_relaxed(const OperatorBundle& b, const Schedule& s,
                                   const IterateState& st,
                                   StepTransients* transients = nullptr);

/// Double extrapolation (resolvent argument and cocoercive argument
/// separately) plus additional momentum through the metric.
IterateState step_double_inertial(const OperatorBundle& b, const Schedule& s,
                                  const IterateState& st,
                                  StepTransients* transients = nullptr);

struct LyapunovSample {
  double c_value = 0.0;
  double decrement_bound = 0.0;  // (eta_n - xi_{n+1}) * ||x_{n+1} - x_n||^2
};

/// Lyapunov value after an inertial-relaxed step from `before` to `after`,
/// measured against a known solution x_star. `transients` must come from the
/// same step.
LyapunovSample lyapunov_alg1(const OperatorBundle& b, const Schedule& s,
                             const IterateState& before,
                             const IterateState& after, const Vec& x_star,
                             const StepTransients& transients);

/// Double-inertial counterpart.
LyapunovSample lyapunov_alg2(const OperatorBundle& b, const Schedule& s,
                             const IterateState& before,
                             const IterateState& after, const Vec& x_star,
                             const StepTransients& transients);

struct StopRule {
  double tol = 1e-6;
  int max_iters = 10000;
};

struct RunRecord {
  int iterations = 0;
  bool converged = false;
  bool diverged = false;
  int last_finite_iteration = 0;
  double wall_time_s = 0.0;
  std::vector<double> rel_error;
  std::vector<double> lyapunov;  // filled when a monitor point was supplied
  Vec final_x;
  Vec final_x_prev;
  Vec final_u;
};

/// Drive one of the three recurrences until the relative error drops below
/// tol or the iteration budget is exhausted. Non-finite iterates stop the
/// run with the diverged flag set.
RunRecord run(const OperatorBundle& b, const Schedule& s, Variant variant,
              Vec x0, Vec x_minus1, Vec u0, const StopRule& stop,
              const std::optional<Vec>& monitor_x_star = std::nullopt);

}  // namespace nfbm
