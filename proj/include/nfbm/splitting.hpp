#pragma once

#include <functional>

#include "nfbm/engine.hpp"

namespace nfbm {

/// Forward-backward instance: one resolvent of A and one cocoercive
/// evaluation per iteration, no momentum.
struct FbInstance {
  std::function<Vec(double, const Vec&)> resolvent;  // J_{gamma A}
  std::function<Vec(const Vec&)> cocoercive;         // C
  double mu = 1.0;
  double gamma = 1.0;
};

/// y_n = x_n + alpha (x_n - x_{n-1}); p = J_{gamma A}(y_n - gamma C y_n);
/// x_{n+1} = (1-lambda) y_n + lambda p. The momentum vector stays zero.
IterateState fb_step_relaxed_inertial(const FbInstance& inst,
                                      const Schedule& s,
                                      const IterateState& st);

/// Double extrapolation: the cocoercive operator is evaluated at
/// z_n = x_n + beta (x_n - x_{n-1}) while the resolvent argument is built
/// from y_n.
IterateState fb_step_double(const FbInstance& inst, const Schedule& s,
                            const IterateState& st);

/// Engine embedding of the forward-backward instance
/// (gamma M = Id, S = Id, momentum identically zero).
OperatorBundle make_fb_bundle(const FbInstance& inst);

/// Forward-half-reflected-backward instance: splitting of A~ + B + C with
/// B Lipschitz (zeta_B) and C cocoercive (mu). The engine embedding uses
/// gamma M = Id - gamma B and S = Id, so the momentum operator is -gamma B
/// and the effective Lipschitz constant is gamma * zeta_B.
struct FhrbInstance {
  std::function<Vec(double, const Vec&)> resolvent_Atilde;  // J_{gamma A~}
  std::function<Vec(const Vec&)> B;  // empty means the zero operator
  double zeta_B = 0.0;
  bool b_monotone = true;
  std::function<Vec(const Vec&)> cocoercive;  // C; empty means zero
  double mu = 1.0;
  double gamma = 1.0;
};

/// Run state of the FHRB family. The caches hold the two points whose B
/// values the reflected term reuses: the previous extrapolation y_{n-1} and
/// the previous resolvent output p_n (equal to x_n when lambda = 1).
struct FhrbState {
  Vec x_curr;
  Vec x_prev;
  Vec y_prev;   // y_{n-1}; initialised to x_{-1}
  Vec p_prev;   // p_n; initialised to x_0
  int n = 0;
};

FhrbState fhrb_init(const Vec& x0, const Vec& x_minus1);

/// One step of the inertial-relaxed (alg1) or double-inertial (alg2) FHRB
/// recurrence. B is evaluated twice per iteration: once at the fresh
/// extrapolation and once at the new resolvent output.
FhrbState fhrb_step(const FhrbInstance& inst, const Schedule& s,
                    const FhrbState& st, Variant variant);

OperatorBundle make_fhrb_bundle(const FhrbInstance& inst);

/// Momentum vector the engine would carry for the given FHRB state, so
/// engine runs can start from identical conditions.
Vec fhrb_engine_momentum(const FhrbInstance& inst, const FhrbState& st);

/// Primal-dual instance with block-triangular resolvent on H x G. The
/// product metric is S(x,u) = (x - tau L* u, tau u / sigma - tau L x);
/// it is strongly monotone exactly when pd_kappa = 1 - sigma tau ||L||^2
/// is positive.
struct PdbtrInstance {
  std::function<Vec(double, const Vec&)> resolvent_A1;     // J_{tau A1}
  std::function<Vec(double, const Vec&)> resolvent_A2inv;  // J_{sigma A2^-1}
  std::function<Vec(const Vec&)> B;        // primal, monotone Lipschitz
  double zeta_B = 0.0;
  std::function<Vec(const Vec&)> C_tilde;  // primal, cocoercive
  double mu = 1.0;
  LinOp L;
  double sigma = 1.0;
  double tau = 1.0;
  // filled by make_pdbtr_instance
  double norm_L = 0.0;
  double pd_kappa = 0.0;
};

/// Validates the geometry (pd_kappa > 0) and fixes ||L|| by power iteration
/// when no estimate is attached to L.
PdbtrInstance make_pdbtr_instance(PdbtrInstance inst);

struct PdbtrState {
  Vec x;
  Vec v;
  Vec x_prev;
  Vec v_prev;
  Vec y_prev;   // primal extrapolation history
  Vec p_prev;   // previous primal resolvent output
  int n = 0;
};

PdbtrState pdbtr_init(const Vec& x0, const Vec& v0, const Vec& x_minus1,
                      const Vec& v_minus1);

/// One inertial-relaxed primal-dual step. The dual resolvent argument uses
/// the fresh primal output p_{n+1} in its reflection. With
/// printed_relaxation the convex combination is taken around (x_n, v_n)
/// instead of the extrapolated pair; the two coincide when alpha = 0.
PdbtrState pdbtr_step(const PdbtrInstance& inst, const Schedule& s,
                      const PdbtrState& st, bool printed_relaxation = false);

/// Product-space metric of the instance. apply_inv is materialised by dense
/// factorisation and only available for small problems (<= 4096 unknowns).
Metric pd_metric(const PdbtrInstance& inst);

/// Engine embedding on the flattened product space.
OperatorBundle make_pdbtr_bundle(const PdbtrInstance& inst);

Vec pd_concat(const Vec& x, const Vec& u);
std::pair<Vec, Vec> pd_split(const Vec& z, std::size_t primal_dim);

}  // namespace nfbm
