#include "nfbm/engine.hpp"

#include <chrono>
#include <cmath>

namespace nfbm {

Variant variant_from_string(const std::string& name) {
  if (name == "base") return Variant::base;
  if (name == "alg1") return Variant::alg1;
  if (name == "alg2") return Variant::alg2;
  throw parameter_error("unknown variant: " + name);
}

namespace {

void ensure_finite(const Vec& v, int n, const char* what) {
  if (!all_finite(v))
    throw divergence_error(static_cast<std::size_t>(n),
                           std::string("non-finite ") + what);
}

// Resolvent evaluation and momentum update shared by the base and the
// inertial-relaxed recurrences. Evaluated at the (possibly extrapolated)
// point y with the carried momentum u:
//
//   p  = (M_n+A)^{-1}(M_n y - C y + u/gamma)
//   u' = (gamma M_n - S) p - (gamma M_n - S) y
//
// The kernel value at y is computed once and reused for both lines so the
// base and inertial paths produce bit-identical arithmetic.
struct CoreResult {
  Vec p;
  Vec u_next;
};

CoreResult resolve_and_momentum(const OperatorBundle& b, int n, double gamma,
                                const Vec& y, const Vec& u) {
  const Vec ky = b.kernel(n, y);
  const Vec cy = b.cocoercive(y);
  Vec v(y.size());
  const double inv_gamma = 1.0 / gamma;
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = ky[i] - cy[i] + u[i] * inv_gamma;
  CoreResult r;
  r.p = b.warped_resolvent(n, v);
  ensure_finite(r.p, n, "resolvent output");
  const Vec kp = b.kernel(n, r.p);
  const Vec sp = b.metric.apply(r.p);
  const Vec sy = b.metric.apply(y);
  r.u_next.resize(y.size());
  for (std::size_t i = 0; i < y.size(); ++i)
    r.u_next[i] = (gamma * kp[i] - sp[i]) - (gamma * ky[i] - sy[i]);
  ensure_finite(r.u_next, n, "momentum");
  return r;
}

}  // namespace

IterateState step_base(const OperatorBundle& b, const Schedule& s,
                       const IterateState& st) {
  const int n = st.n;
  CoreResult r = resolve_and_momentum(b, n, s.gamma(n), st.x_curr, st.u);
  IterateState next;
  next.x_prev = st.x_curr;
  next.x_curr = std::move(r.p);
  next.u = std::move(r.u_next);
  next.n = n + 1;
  return next;
}

IterateState step_inertial_relaxed(const OperatorBundle& b, const Schedule& s,
                                   const IterateState& st,
                                   StepTransients* transients) {
  const int n = st.n;
  const double a = s.alpha_at(n);
  const double lam = s.lambda;
  if (!(lam > 0.0 && lam < 2.0))
    throw parameter_error("step_inertial_relaxed: lambda in (0,2)");
  Vec y(st.x_curr.size());
  for (std::size_t i = 0; i < y.size(); ++i)
    y[i] = st.x_curr[i] + a * (st.x_curr[i] - st.x_prev[i]);
  CoreResult r = resolve_and_momentum(b, n, s.gamma(n), y, st.u);
  IterateState next;
  next.x_prev = st.x_curr;
  next.x_curr = lincomb(1.0 - lam, y, lam, r.p);
  ensure_finite(next.x_curr, n, "iterate");
  next.u = std::move(r.u_next);
  next.n = n + 1;
  if (transients) {
    transients->y = std::move(y);
    transients->p = std::move(r.p);
  }
  return next;
}

IterateState step_double_inertial(const OperatorBundle& b, const Schedule& s,
                                  const IterateState& st,
                                  StepTransients* transients) {
  const int n = st.n;
  const double a = s.alpha_at(n);
  const double be = s.beta(n);
  const double th = s.theta(n);
  const double gamma = s.gamma(n);
  const std::size_t dim = st.x_curr.size();

  Vec delta = sub(st.x_curr, st.x_prev);
  Vec y(dim), z(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    y[i] = st.x_curr[i] + a * delta[i];
    z[i] = st.x_curr[i] + be * delta[i];
  }

  const Vec ky = b.kernel(n, y);
  const Vec cz = b.cocoercive(z);
  Vec v(dim);
  const double inv_gamma = 1.0 / gamma;
  for (std::size_t i = 0; i < dim; ++i)
    v[i] = ky[i] - cz[i] + st.u[i] * inv_gamma;
  if (th != 0.0) {
    const Vec sd = b.metric.apply(delta);
    for (std::size_t i = 0; i < dim; ++i) v[i] += th * sd[i] * inv_gamma;
  }

  IterateState next;
  next.x_curr = b.warped_resolvent(n, v);
  ensure_finite(next.x_curr, n, "resolvent output");

  const Vec kx = b.kernel(n, next.x_curr);
  const Vec sx = b.metric.apply(next.x_curr);
  const Vec sy = b.metric.apply(y);
  next.u.resize(dim);
  for (std::size_t i = 0; i < dim; ++i)
    next.u[i] = (gamma * kx[i] - sx[i]) - (gamma * ky[i] - sy[i]);
  ensure_finite(next.u, n, "momentum");

  next.x_prev = st.x_curr;
  next.n = n + 1;
  if (transients) {
    transients->y = std::move(y);
    transients->p = next.x_curr;
  }
  return next;
}

LyapunovSample lyapunov_alg1(const OperatorBundle& b, const Schedule& s,
                             const IterateState& before,
                             const IterateState& after, const Vec& x_star,
                             const StepTransients& transients) {
  const int n = before.n;
  const double lam = s.lambda;

  ProblemConstants pc;
  pc.mu = b.mu;
  pc.zeta = b.zeta;
  pc.gamma = s.gamma;
  pc.lambda = lam;
  pc.t_neg_monotone = b.t_neg_monotone;
  ScalarSeq alpha = [&s](int k) { return s.alpha_at(k); };
  const CoeffsAlg1 kn = coeffs_alg1(pc, alpha, n);
  const CoeffsAlg1 knext = coeffs_alg1(pc, alpha, n + 1);

  const Vec dxs = sub(after.x_curr, x_star);
  const Vec dprev = sub(before.x_curr, x_star);
  const Vec dstep = sub(after.x_curr, before.x_curr);
  const Vec dpy = sub(transients.p, transients.y);

  LyapunovSample out;
  out.c_value = inner_s(b.metric, dxs, dxs) -
                s.alpha_at(n) * inner_s(b.metric, dprev, dprev) +
                2.0 * lam * dot(after.u, dxs) +
                lam * (1.0 + std::abs(1.0 - lam)) * b.zeta(n) *
                    inner_s(b.metric, dpy, dpy) +
                knext.xi * dot(dstep, dstep);
  out.decrement_bound = (kn.eta - knext.xi) * dot(dstep, dstep);
  return out;
}

LyapunovSample lyapunov_alg2(const OperatorBundle& b, const Schedule& s,
                             const IterateState& before,
                             const IterateState& after, const Vec& x_star,
                             const StepTransients& transients) {
  const int n = before.n;

  ProblemConstants pc;
  pc.mu = b.mu;
  pc.zeta = b.zeta;
  pc.gamma = s.gamma;
  pc.lambda = 1.0;
  pc.t_neg_monotone = b.t_neg_monotone;
  ScalarSeq alpha = [&s](int k) { return s.alpha_at(k); };
  const CoeffsAlg2 kn = coeffs_alg2(pc, alpha, s.beta, s.theta, n);
  const CoeffsAlg2 knext = coeffs_alg2(pc, alpha, s.beta, s.theta, n + 1);

  const Vec dxs = sub(after.x_curr, x_star);
  const Vec dprev = sub(before.x_curr, x_star);
  const Vec dstep = sub(after.x_curr, before.x_curr);
  const Vec dxy = sub(after.x_curr, transients.y);

  LyapunovSample out;
  out.c_value = inner_s(b.metric, dxs, dxs) -
                kn.alpha_tilde * inner_s(b.metric, dprev, dprev) +
                2.0 * dot(after.u, dxs) +
                b.zeta(n) * inner_s(b.metric, dxy, dxy) +
                knext.xi * dot(dstep, dstep);
  out.decrement_bound = (kn.eta - knext.xi) * dot(dstep, dstep);
  return out;
}

RunRecord run(const OperatorBundle& b, const Schedule& s, Variant variant,
              Vec x0, Vec x_minus1, Vec u0, const StopRule& stop,
              const std::optional<Vec>& monitor_x_star) {
  if (!(stop.tol > 0.0)) throw parameter_error("run: tol > 0");
  if (stop.max_iters < 1) throw parameter_error("run: max_iters >= 1");

  RunRecord rec;
  IterateState st;
  st.x_curr = std::move(x0);
  st.x_prev = std::move(x_minus1);
  st.u = std::move(u0);
  st.n = 0;

  // The base recurrence is the alpha = 0, lambda = 1 member of the family;
  // its monitor uses those values regardless of what the schedule carries.
  Schedule s_mon = s;
  if (variant == Variant::base) {
    s_mon.alpha = constant_seq(0.0);
    s_mon.restart_n0.reset();
    s_mon.lambda = 1.0;
  }

  const auto t0 = std::chrono::steady_clock::now();
  for (int k = 0; k < stop.max_iters; ++k) {
    StepTransients tr;
    IterateState next;
    try {
      switch (variant) {
        case Variant::base:
          next = step_base(b, s, st);
          tr.y = st.x_curr;
          tr.p = next.x_curr;
          break;
        case Variant::alg1:
          next = step_inertial_relaxed(b, s, st, &tr);
          break;
        case Variant::alg2:
          next = step_double_inertial(b, s, st, &tr);
          break;
      }
    } catch (const divergence_error&) {
      rec.diverged = true;
      rec.last_finite_iteration = st.n;
      break;
    }
    rec.iterations = next.n;
    rec.rel_error.push_back(relative_error(next.x_curr, st.x_curr));
    if (monitor_x_star) {
      const LyapunovSample sample =
          variant == Variant::alg2
              ? lyapunov_alg2(b, s_mon, st, next, *monitor_x_star, tr)
              : lyapunov_alg1(b, s_mon, st, next, *monitor_x_star, tr);
      rec.lyapunov.push_back(sample.c_value);
    }
    st = std::move(next);
    if (rec.rel_error.back() < stop.tol) {
      rec.converged = true;
      break;
    }
  }
  const auto t1 = std::chrono::steady_clock::now();
  rec.wall_time_s = std::chrono::duration<double>(t1 - t0).count();
  if (!rec.diverged) rec.last_finite_iteration = st.n;
  rec.final_x = std::move(st.x_curr);
  rec.final_x_prev = std::move(st.x_prev);
  rec.final_u = std::move(st.u);
  return rec;
}

}  // namespace nfbm
