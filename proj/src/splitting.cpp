#include "nfbm/splitting.hpp"

#include <cmath>
#include <memory>
#include <utility>

namespace nfbm {

namespace {

Vec apply_or_zero(const std::function<Vec(const Vec&)>& f, const Vec& x) {
  if (f) return f(x);
  return Vec(x.size(), 0.0);
}

void ensure_finite_or_throw(const Vec& v, int n, const char* what) {
  if (!all_finite(v))
    throw divergence_error(static_cast<std::size_t>(n),
                           std::string("non-finite ") + what);
}

}  // namespace

// ---------------------------------------------------------------------------
// Forward-backward
// ---------------------------------------------------------------------------

IterateState fb_step_relaxed_inertial(const FbInstance& inst,
                                      const Schedule& s,
                                      const IterateState& st) {
  const int n = st.n;
  const double a = s.alpha_at(n);
  const double lam = s.lambda;
  Vec y(st.x_curr.size());
  for (std::size_t i = 0; i < y.size(); ++i)
    y[i] = st.x_curr[i] + a * (st.x_curr[i] - st.x_prev[i]);
  const Vec cy = apply_or_zero(inst.cocoercive, y);
  Vec arg(y.size());
  for (std::size_t i = 0; i < y.size(); ++i)
    arg[i] = y[i] - inst.gamma * cy[i];
  const Vec p = inst.resolvent(inst.gamma, arg);
  IterateState next;
  next.x_prev = st.x_curr;
  next.x_curr = lincomb(1.0 - lam, y, lam, p);
  ensure_finite_or_throw(next.x_curr, n, "iterate");
  next.u = Vec(y.size(), 0.0);
  next.n = n + 1;
  return next;
}

IterateState fb_step_double(const FbInstance& inst, const Schedule& s,
                            const IterateState& st) {
  const int n = st.n;
  const double a = s.alpha_at(n);
  const double be = s.beta(n);
  Vec y(st.x_curr.size()), z(st.x_curr.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = st.x_curr[i] - st.x_prev[i];
    y[i] = st.x_curr[i] + a * d;
    z[i] = st.x_curr[i] + be * d;
  }
  const Vec cz = apply_or_zero(inst.cocoercive, z);
  Vec arg(y.size());
  for (std::size_t i = 0; i < y.size(); ++i)
    arg[i] = y[i] - inst.gamma * cz[i];
  IterateState next;
  next.x_prev = st.x_curr;
  next.x_curr = inst.resolvent(inst.gamma, arg);
  ensure_finite_or_throw(next.x_curr, n, "iterate");
  next.u = Vec(y.size(), 0.0);
  next.n = n + 1;
  return next;
}

OperatorBundle make_fb_bundle(const FbInstance& inst) {
  OperatorBundle b;
  const double gamma = inst.gamma;
  b.warped_resolvent = [inst, gamma](int, const Vec& v) {
    return inst.resolvent(gamma, scaled(gamma, v));
  };
  b.kernel = [gamma](int, const Vec& x) { return scaled(1.0 / gamma, x); };
  b.cocoercive = [inst](const Vec& x) {
    return apply_or_zero(inst.cocoercive, x);
  };
  b.metric = Metric::identity();
  b.mu = inst.mu;
  b.zeta = constant_seq(0.0);
  b.t_neg_monotone = true;  // T = 0
  return b;
}

// ---------------------------------------------------------------------------
// Forward-half-reflected-backward
// ---------------------------------------------------------------------------

FhrbState fhrb_init(const Vec& x0, const Vec& x_minus1) {
  FhrbState st;
  st.x_curr = x0;
  st.x_prev = x_minus1;
  st.y_prev = x_minus1;  // y_{-1} := x_{-1}
  st.p_prev = x0;        // p_0  := x_0
  st.n = 0;
  return st;
}

FhrbState fhrb_step(const FhrbInstance& inst, const Schedule& s,
                    const FhrbState& st, Variant variant) {
  const int n = st.n;
  const double gamma = inst.gamma;
  const std::size_t dim = st.x_curr.size();
  const double a = s.alpha_at(n);

  FhrbState next;
  next.n = n + 1;
  next.x_prev = st.x_curr;

  Vec y(dim);
  for (std::size_t i = 0; i < dim; ++i)
    y[i] = st.x_curr[i] + a * (st.x_curr[i] - st.x_prev[i]);
  const Vec by = apply_or_zero(inst.B, y);
  const Vec b_yprev = apply_or_zero(inst.B, st.y_prev);

  if (variant == Variant::alg2) {
    const double be = s.beta(n);
    const double th = s.theta(n);
    Vec z(dim);
    for (std::size_t i = 0; i < dim; ++i)
      z[i] = st.x_curr[i] + be * (st.x_curr[i] - st.x_prev[i]);
    const Vec cz = apply_or_zero(inst.cocoercive, z);
    const Vec bx = apply_or_zero(inst.B, st.x_curr);  // anchor: x_n
    Vec arg(dim);
    for (std::size_t i = 0; i < dim; ++i)
      arg[i] = y[i] + th * (st.x_curr[i] - st.x_prev[i]) -
               gamma * (bx[i] + cz[i] + by[i] - b_yprev[i]);
    next.x_curr = inst.resolvent_Atilde(gamma, arg);
    ensure_finite_or_throw(next.x_curr, n, "iterate");
    next.p_prev = next.x_curr;
  } else {
    const double lam = variant == Variant::base ? 1.0 : s.lambda;
    const Vec cy = apply_or_zero(inst.cocoercive, y);
    const Vec bp = apply_or_zero(inst.B, st.p_prev);  // anchor: p_n
    Vec arg(dim);
    for (std::size_t i = 0; i < dim; ++i)
      arg[i] = y[i] - gamma * (bp[i] + cy[i] + by[i] - b_yprev[i]);
    const Vec p = inst.resolvent_Atilde(gamma, arg);
    next.x_curr = lincomb(1.0 - lam, y, lam, p);
    ensure_finite_or_throw(next.x_curr, n, "iterate");
    next.p_prev = p;
  }
  next.y_prev = std::move(y);
  return next;
}

OperatorBundle make_fhrb_bundle(const FhrbInstance& inst) {
  OperatorBundle b;
  const double gamma = inst.gamma;
  b.warped_resolvent = [inst, gamma](int, const Vec& v) {
    return inst.resolvent_Atilde(gamma, scaled(gamma, v));
  };
  b.kernel = [inst, gamma](int, const Vec& x) {
    // M x = x/gamma - B x
    const Vec bx = apply_or_zero(inst.B, x);
    Vec r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) r[i] = x[i] / gamma - bx[i];
    return r;
  };
  b.cocoercive = [inst](const Vec& x) {
    return apply_or_zero(inst.cocoercive, x);
  };
  b.metric = Metric::identity();
  b.mu = inst.mu;
  b.zeta = constant_seq(gamma * inst.zeta_B);
  b.t_neg_monotone = inst.b_monotone;  // -T = gamma B
  return b;
}

Vec fhrb_engine_momentum(const FhrbInstance& inst, const FhrbState& st) {
  // u_n = -gamma (B p_n - B y_{n-1})
  const Vec bp = apply_or_zero(inst.B, st.p_prev);
  const Vec byp = apply_or_zero(inst.B, st.y_prev);
  Vec u(bp.size());
  for (std::size_t i = 0; i < u.size(); ++i)
    u[i] = -inst.gamma * (bp[i] - byp[i]);
  return u;
}

// ---------------------------------------------------------------------------
// Primal-dual with block-triangular resolvent
// ---------------------------------------------------------------------------

namespace {

// Dense LU with partial pivoting; used once per instance to materialise the
// inverse of the product metric at toy scale.
struct DenseLu {
  int n = 0;
  std::vector<double> a;  // factored matrix, row-major
  std::vector<int> piv;

  static DenseLu factor(std::vector<double> m, int n) {
    DenseLu lu;
    lu.n = n;
    lu.a = std::move(m);
    lu.piv.resize(n);
    for (int k = 0; k < n; ++k) {
      int p = k;
      double best = std::abs(lu.a[k * n + k]);
      for (int i = k + 1; i < n; ++i) {
        const double v = std::abs(lu.a[i * n + k]);
        if (v > best) {
          best = v;
          p = i;
        }
      }
      if (best == 0.0) throw metric_error("singular product metric");
      lu.piv[k] = p;
      if (p != k)
        for (int j = 0; j < n; ++j)
          std::swap(lu.a[k * n + j], lu.a[p * n + j]);
      const double d = lu.a[k * n + k];
      for (int i = k + 1; i < n; ++i) {
        lu.a[i * n + k] /= d;
        const double f = lu.a[i * n + k];
        for (int j = k + 1; j < n; ++j) lu.a[i * n + j] -= f * lu.a[k * n + j];
      }
    }
    return lu;
  }

  Vec solve(Vec b) const {
    for (int k = 0; k < n; ++k) {
      if (piv[k] != k) std::swap(b[k], b[piv[k]]);
      for (int i = k + 1; i < n; ++i) b[i] -= a[i * n + k] * b[k];
    }
    for (int k = n - 1; k >= 0; --k) {
      b[k] /= a[k * n + k];
      for (int i = 0; i < k; ++i) b[i] -= a[i * n + k] * b[k];
    }
    return b;
  }
};

constexpr std::size_t kDenseInverseCap = 4096;

}  // namespace

PdbtrInstance make_pdbtr_instance(PdbtrInstance inst) {
  if (!(inst.sigma > 0.0 && inst.tau > 0.0))
    throw parameter_error("pdbtr: sigma and tau must be positive");
  inst.norm_L = inst.L.norm_estimate
                    ? *inst.L.norm_estimate
                    : power_iteration(inst.L, 1234, 10000, 1e-12).value;
  inst.pd_kappa = 1.0 - inst.sigma * inst.tau * inst.norm_L * inst.norm_L;
  // strict positivity with a roundoff floor, so the boundary
  // sigma = tau = 1/||L|| is rejected even when it lands at +2e-16
  if (!(inst.pd_kappa > 1e-12))
    throw metric_error(
        "pdbtr metric not strongly monotone: 1 - sigma*tau*||L||^2 = " +
        std::to_string(inst.pd_kappa));
  return inst;
}

PdbtrState pdbtr_init(const Vec& x0, const Vec& v0, const Vec& x_minus1,
                      const Vec& v_minus1) {
  PdbtrState st;
  st.x = x0;
  st.v = v0;
  st.x_prev = x_minus1;
  st.v_prev = v_minus1;
  st.y_prev = x_minus1;
  st.p_prev = x0;
  st.n = 0;
  return st;
}

PdbtrState pdbtr_step(const PdbtrInstance& inst, const Schedule& s,
                      const PdbtrState& st, bool printed_relaxation) {
  const int n = st.n;
  const double a = s.alpha_at(n);
  const double lam = s.lambda;
  const double tau = inst.tau;
  const double sigma = inst.sigma;
  const std::size_t np = st.x.size();
  const std::size_t nd = st.v.size();

  Vec y(np), w(nd);
  for (std::size_t i = 0; i < np; ++i)
    y[i] = st.x[i] + a * (st.x[i] - st.x_prev[i]);
  for (std::size_t i = 0; i < nd; ++i)
    w[i] = st.v[i] + a * (st.v[i] - st.v_prev[i]);

  const Vec by = apply_or_zero(inst.B, y);
  const Vec b_yprev = apply_or_zero(inst.B, st.y_prev);
  const Vec bp = apply_or_zero(inst.B, st.p_prev);
  const Vec cy = apply_or_zero(inst.C_tilde, y);
  const Vec ltw = inst.L.adjoint_apply(w);

  Vec arg1(np);
  for (std::size_t i = 0; i < np; ++i)
    arg1[i] = y[i] - tau * ltw[i] -
              tau * (bp[i] + by[i] - b_yprev[i] + cy[i]);
  const Vec p = inst.resolvent_A1(tau, arg1);
  ensure_finite_or_throw(p, n, "primal iterate");

  Vec refl(np);
  for (std::size_t i = 0; i < np; ++i) refl[i] = 2.0 * p[i] - y[i];
  const Vec lrefl = inst.L.apply(refl);
  Vec arg2(nd);
  for (std::size_t i = 0; i < nd; ++i) arg2[i] = w[i] + sigma * lrefl[i];
  const Vec q = inst.resolvent_A2inv(sigma, arg2);
  ensure_finite_or_throw(q, n, "dual iterate");

  PdbtrState next;
  next.n = n + 1;
  next.x_prev = st.x;
  next.v_prev = st.v;
  if (printed_relaxation) {
    next.x = lincomb(1.0 - lam, st.x, lam, p);
    next.v = lincomb(1.0 - lam, st.v, lam, q);
  } else {
    next.x = lincomb(1.0 - lam, y, lam, p);
    next.v = lincomb(1.0 - lam, w, lam, q);
  }
  next.y_prev = std::move(y);
  next.p_prev = p;
  return next;
}

Vec pd_concat(const Vec& x, const Vec& u) {
  Vec z;
  z.reserve(x.size() + u.size());
  z.insert(z.end(), x.begin(), x.end());
  z.insert(z.end(), u.begin(), u.end());
  return z;
}

std::pair<Vec, Vec> pd_split(const Vec& z, std::size_t primal_dim) {
  Vec x(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(primal_dim));
  Vec u(z.begin() + static_cast<std::ptrdiff_t>(primal_dim), z.end());
  return {std::move(x), std::move(u)};
}

Metric pd_metric(const PdbtrInstance& inst) {
  const std::size_t np = static_cast<std::size_t>(inst.L.domain_dim);
  const std::size_t nd = static_cast<std::size_t>(inst.L.range_dim);
  const double tau = inst.tau;
  const double sigma = inst.sigma;
  const LinOp L = inst.L;

  Metric m;
  m.apply = [np, nd, tau, sigma, L](const Vec& z) {
    if (z.size() != np + nd)
      throw dimension_error(z.size(), np + nd, "pd_metric");
    auto [x, u] = pd_split(z, np);
    const Vec ltu = L.adjoint_apply(u);
    const Vec lx = L.apply(x);
    Vec rx(np), ru(nd);
    for (std::size_t i = 0; i < np; ++i) rx[i] = x[i] - tau * ltu[i];
    for (std::size_t i = 0; i < nd; ++i)
      ru[i] = tau * u[i] / sigma - tau * lx[i];
    return pd_concat(rx, ru);
  };
  m.strong_monotonicity_lb = inst.pd_kappa * std::min(1.0, tau / sigma);

  if (np + nd <= kDenseInverseCap) {
    const std::size_t dim = np + nd;
    std::vector<double> mat(dim * dim);
    Vec e(dim, 0.0);
    for (std::size_t j = 0; j < dim; ++j) {
      e[j] = 1.0;
      const Vec col = m.apply(e);
      for (std::size_t i = 0; i < dim; ++i) mat[i * dim + j] = col[i];
      e[j] = 0.0;
    }
    auto lu = std::make_shared<DenseLu>(
        DenseLu::factor(std::move(mat), static_cast<int>(dim)));
    m.apply_inv = [lu](const Vec& z) { return lu->solve(z); };
  }
  return m;
}

OperatorBundle make_pdbtr_bundle(const PdbtrInstance& inst) {
  const std::size_t np = static_cast<std::size_t>(inst.L.domain_dim);
  const double tau = inst.tau;
  const double sigma = inst.sigma;

  OperatorBundle b;
  b.kernel = [inst, np, tau, sigma](int, const Vec& z) {
    // M(x,u) = (x/tau - Bx - L*u, u/sigma - Lx)
    auto [x, u] = pd_split(z, np);
    const Vec bx = apply_or_zero(inst.B, x);
    const Vec ltu = inst.L.adjoint_apply(u);
    const Vec lx = inst.L.apply(x);
    Vec rx(x.size()), ru(u.size());
    for (std::size_t i = 0; i < rx.size(); ++i)
      rx[i] = x[i] / tau - bx[i] - ltu[i];
    for (std::size_t i = 0; i < ru.size(); ++i) ru[i] = u[i] / sigma - lx[i];
    return pd_concat(rx, ru);
  };
  b.warped_resolvent = [inst, np, tau, sigma](int, const Vec& r) {
    // (M+A)^{-1} evaluates block-triangularly: the primal resolvent first,
    // then the dual resolvent fed with the fresh primal point.
    auto [r1, r2] = pd_split(r, np);
    const Vec p = inst.resolvent_A1(tau, scaled(tau, r1));
    const Vec lp = inst.L.apply(p);
    Vec arg2(r2.size());
    for (std::size_t i = 0; i < arg2.size(); ++i)
      arg2[i] = sigma * r2[i] + 2.0 * sigma * lp[i];
    const Vec q = inst.resolvent_A2inv(sigma, arg2);
    return pd_concat(p, q);
  };
  b.cocoercive = [inst, np](const Vec& z) {
    auto [x, u] = pd_split(z, np);
    Vec cx = apply_or_zero(inst.C_tilde, x);
    return pd_concat(cx, Vec(u.size(), 0.0));
  };
  b.metric = pd_metric(inst);
  b.mu = inst.mu * inst.pd_kappa;
  b.zeta = constant_seq(inst.tau * inst.zeta_B / inst.pd_kappa);
  b.t_neg_monotone = true;  // -T = (tau B ., 0) with B monotone
  return b;
}

}  // namespace nfbm
