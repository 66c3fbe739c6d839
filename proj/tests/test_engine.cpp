#include <doctest.h>

#include <cmath>
#include <random>

#include "nfbm/engine.hpp"
#include "nfbm/splitting.hpp"

using namespace nfbm;

namespace {

// Random skew + diagonal-quadratic FHRB instance on a box; the seeded
// matrices make the reduction checks reproducible.
struct RandomFhrb {
  FhrbInstance inst;
  int dim;
  std::vector<double> W;  // skew
  Vec q;                  // diagonal SPD part
  Vec c;
};

RandomFhrb make_random_fhrb(unsigned seed, int dim, double gamma_frac = 0.5) {
  RandomFhrb r;
  r.dim = dim;
  Rng rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  r.W.assign(static_cast<std::size_t>(dim) * dim, 0.0);
  for (int i = 0; i < dim; ++i)
    for (int j = i + 1; j < dim; ++j) {
      const double v = 0.4 * u(rng);
      r.W[i * dim + j] = v;
      r.W[j * dim + i] = -v;
    }
  r.q = random_uniform(rng, dim, 0.3, 1.5);
  r.c = random_uniform(rng, dim, -1.0, 1.0);

  LinOp w_op;
  w_op.domain_dim = w_op.range_dim = dim;
  auto wmat = r.W;
  w_op.apply = [wmat, dim](const Vec& x) {
    Vec out(dim, 0.0);
    for (int i = 0; i < dim; ++i) {
      double s = 0.0;
      for (int j = 0; j < dim; ++j) s += wmat[i * dim + j] * x[j];
      out[i] = s;
    }
    return out;
  };
  w_op.adjoint_apply = [apply = w_op.apply](const Vec& x) {
    return scaled(-1.0, apply(x));
  };
  const double zeta_b = power_iteration(w_op, seed + 1, 20000, 1e-13).value;
  double qmax = 0.0;
  for (double v : r.q) qmax = std::max(qmax, v);

  r.inst.gamma = gamma_frac * 2.0 / (qmax * (4.0 * zeta_b / qmax + 1.0));
  r.inst.mu = 1.0 / qmax;
  r.inst.zeta_B = zeta_b;
  r.inst.b_monotone = true;
  r.inst.resolvent_Atilde = [](double, const Vec& v) {
    Vec out = v;
    for (auto& x : out) x = std::min(3.0, std::max(-3.0, x));
    return out;
  };
  r.inst.B = w_op.apply;
  auto q = r.q;
  auto c = r.c;
  r.inst.cocoercive = [q, c](const Vec& x) {
    Vec out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = q[i] * x[i] + c[i];
    return out;
  };
  return r;
}

}  // namespace

TEST_CASE("one-dimensional hand-evaluated inertial step") {
  // A = 0, C = identity, gamma M = Id, gamma = 1, alpha = 0.1, lambda = 1,
  // from x_1 = x_0 = 1 with zero momentum
  OperatorBundle b;
  b.warped_resolvent = [](int, const Vec& v) { return v; };
  b.kernel = [](int, const Vec& x) { return x; };
  b.cocoercive = [](const Vec& x) { return x; };
  b.mu = 1.0;
  Schedule s = Schedule::constant(1.0, 0.1, 0.0, 0.0, 1.0);
  IterateState st{{1.0}, {1.0}, {0.0}, 0};
  StepTransients tr;
  const IterateState next = step_inertial_relaxed(b, s, st, &tr);
  CHECK(tr.y[0] == doctest::Approx(1.0));
  CHECK(tr.p[0] == doctest::Approx(0.0));
  CHECK(next.x_curr[0] == doctest::Approx(0.0));
  CHECK(next.u[0] == doctest::Approx(0.0));
  CHECK(next.n == 1);
}

TEST_CASE("reductions to the base recurrence are exact") {
  const RandomFhrb rf = make_random_fhrb(101, 20);
  const OperatorBundle bundle = make_fhrb_bundle(rf.inst);
  Rng rng(55);
  const Vec x0 = random_uniform(rng, 20);
  const Vec xm1 = random_uniform(rng, 20);
  const Vec u0 = random_uniform(rng, 20, -0.1, 0.1);

  Schedule s_base = Schedule::constant(rf.inst.gamma);
  Schedule s_zero = Schedule::constant(rf.inst.gamma, 0.0, 0.0, 0.0, 1.0);

  IterateState a{x0, xm1, u0, 0}, b{x0, xm1, u0, 0}, c{x0, xm1, u0, 0};
  for (int k = 0; k < 50; ++k) {
    a = step_base(bundle, s_base, a);
    b = step_inertial_relaxed(bundle, s_zero, b);
    c = step_double_inertial(bundle, s_zero, c);
    // alg1 at alpha=0, lambda=1 follows the identical arithmetic path
    CHECK(a.x_curr == b.x_curr);
    CHECK(a.u == b.u);
    CHECK(a.x_curr == c.x_curr);
    CHECK(a.u == c.u);
  }
}

TEST_CASE("fixed points are stationary for every variant") {
  // box-constrained instance with interior solution x*: B x* + C x* = 0
  const int dim = 5;
  RandomFhrb rf = make_random_fhrb(77, dim);
  Rng rng(78);
  const Vec xstar = random_uniform(rng, dim, -0.5, 0.5);
  // retarget the affine part so that (W + Q) x* + c = 0
  Vec shift(dim, 0.0);
  for (int i = 0; i < dim; ++i) {
    double s = rf.q[i] * xstar[i];
    for (int j = 0; j < dim; ++j) s += rf.W[i * dim + j] * xstar[j];
    shift[i] = -s;
  }
  auto q = rf.q;
  rf.inst.cocoercive = [q, shift](const Vec& x) {
    Vec out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
      out[i] = q[i] * x[i] + shift[i];
    return out;
  };
  const OperatorBundle bundle = make_fhrb_bundle(rf.inst);
  const double scale = norm2(xstar);

  Schedule s = Schedule::constant(rf.inst.gamma, 0.15, 0.1, 0.05, 1.2);
  for (Variant v : {Variant::base, Variant::alg1, Variant::alg2}) {
    Schedule sv = s;
    if (v == Variant::alg2) sv.lambda = 1.0;
    IterateState st{xstar, xstar, Vec(dim, 0.0), 0};
    for (int k = 0; k < 100; ++k) {
      switch (v) {
        case Variant::base: st = step_base(bundle, sv, st); break;
        case Variant::alg1: st = step_inertial_relaxed(bundle, sv, st); break;
        case Variant::alg2: st = step_double_inertial(bundle, sv, st); break;
      }
    }
    CHECK(norm2(sub(st.x_curr, xstar)) <= 1e-12 * std::max(scale, 1.0));
  }
}

TEST_CASE("run stops immediately at a fixed point") {
  OperatorBundle b = make_fb_bundle(
      {[](double, const Vec& v) {
         Vec out = v;
         for (auto& x : out) x = std::min(1.0, std::max(0.0, x));
         return out;
       },
       [](const Vec& x) {
         Vec out(x.size());
         for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - 2.0;
         return out;
       },
       1.0, 0.5});
  const RunRecord rec = run(b, Schedule::constant(0.5), Variant::base, {1.0},
                            {1.0}, {0.0}, {1e-10, 100});
  CHECK(rec.converged);
  CHECK(rec.iterations == 1);
  CHECK(rec.rel_error.front() == 0.0);
}

TEST_CASE("certified FB run reaches the quadratic minimizer") {
  // diagonal strongly convex quadratic, closed-form minimizer q_i^{-1} b_i
  const int dim = 12;
  Rng rng(91);
  const Vec q = random_uniform(rng, dim, 0.4, 2.0);
  const Vec rhs = random_uniform(rng, dim, -2.0, 2.0);
  double qmax = 0.0;
  for (double v : q) qmax = std::max(qmax, v);

  FbInstance fb;
  fb.resolvent = [](double, const Vec& v) { return v; };  // A = 0
  fb.cocoercive = [q, rhs](const Vec& x) {
    Vec out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
      out[i] = q[i] * x[i] - rhs[i];
    return out;
  };
  fb.mu = 1.0 / qmax;
  fb.gamma = fb.mu;  // certified: gamma < 2 mu

  Vec xstar(dim);
  for (int i = 0; i < dim; ++i) xstar[i] = rhs[i] / q[i];

  const OperatorBundle bundle = make_fb_bundle(fb);
  const RunRecord rec = run(bundle, Schedule::constant(fb.gamma),
                            Variant::base, Vec(dim, 0.0), Vec(dim, 0.0),
                            Vec(dim, 0.0), {1e-12, 20000});
  CHECK(rec.converged);
  CHECK(norm2(sub(rec.final_x, xstar)) <= 1e-5 * norm2(xstar));
}

TEST_CASE("lyapunov value vanishes at the solution") {
  const RandomFhrb rf = make_random_fhrb(13, 6);
  const OperatorBundle bundle = make_fhrb_bundle(rf.inst);
  Schedule s = Schedule::constant(rf.inst.gamma, 0.0, 0.0, 0.0, 1.0);
  Rng rng(14);
  const Vec xstar = random_uniform(rng, 6);
  IterateState before{xstar, xstar, Vec(6, 0.0), 0};
  IterateState after = before;
  after.n = 1;
  StepTransients tr{xstar, xstar};
  const LyapunovSample l1 = lyapunov_alg1(bundle, s, before, after, xstar, tr);
  CHECK(l1.c_value == 0.0);
  const LyapunovSample l2 = lyapunov_alg2(bundle, s, before, after, xstar, tr);
  CHECK(l2.c_value == 0.0);
}

TEST_CASE("lyapunov reduces to the plain Fejer monitor") {
  // alpha = 0, lambda = 1, zeta = 0: C_n = ||x_n - x*||^2
  const int dim = 8;
  Rng rng(15);
  const Vec q = random_uniform(rng, dim, 0.5, 1.5);
  FbInstance fb;
  fb.resolvent = [](double, const Vec& v) { return v; };
  fb.cocoercive = [q](const Vec& x) {
    Vec out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = q[i] * x[i];
    return out;
  };
  fb.mu = 1.0 / 1.5;
  fb.gamma = 0.5;
  const OperatorBundle bundle = make_fb_bundle(fb);
  const Vec xstar(dim, 0.0);
  Schedule s = Schedule::constant(fb.gamma);
  IterateState st{random_uniform(rng, dim), Vec(dim, 0.0), Vec(dim, 0.0), 0};
  st.x_prev = st.x_curr;
  for (int k = 0; k < 10; ++k) {
    StepTransients tr;
    const IterateState next = step_inertial_relaxed(bundle, s, st, &tr);
    const LyapunovSample l =
        lyapunov_alg1(bundle, s, st, next, xstar, tr);
    CHECK(l.c_value ==
          doctest::Approx(dot(next.x_curr, next.x_curr)).epsilon(1e-12));
    st = next;
  }
}

TEST_CASE("alg2 monitor coincides with alg1 monitor when inertia is off") {
  const RandomFhrb rf = make_random_fhrb(99, 7);
  const OperatorBundle bundle = make_fhrb_bundle(rf.inst);
  Schedule s = Schedule::constant(rf.inst.gamma, 0.0, 0.0, 0.0, 1.0);
  Rng rng(100);
  const Vec xstar = random_uniform(rng, 7, -0.2, 0.2);
  IterateState st{random_uniform(rng, 7), random_uniform(rng, 7),
                  Vec(7, 0.0), 0};
  for (int k = 0; k < 5; ++k) {
    StepTransients tr1, tr2;
    const IterateState n1 = step_inertial_relaxed(bundle, s, st, &tr1);
    const IterateState n2 = step_double_inertial(bundle, s, st, &tr2);
    const double c1 = lyapunov_alg1(bundle, s, st, n1, xstar, tr1).c_value;
    const double c2 = lyapunov_alg2(bundle, s, st, n2, xstar, tr2).c_value;
    CHECK(c1 == doctest::Approx(c2).epsilon(1e-12));
    st = n1;
  }
}

TEST_CASE("certified run has a descending monitor and summable steps") {
  const RandomFhrb rf = make_random_fhrb(7, 15);
  const OperatorBundle bundle = make_fhrb_bundle(rf.inst);
  // certified inertial parameters from the closed-form table
  const TableParams tp = table_params(TableMethod::FHRBI, 3, rf.inst.gamma,
                                      rf.inst.mu, rf.inst.zeta_B);
  Schedule s = Schedule::constant(rf.inst.gamma, tp.alpha, 0.0, 0.0, 1.0);

  ProblemConstants pc;
  pc.mu = rf.inst.mu;
  pc.zeta = constant_seq(rf.inst.gamma * rf.inst.zeta_B);
  pc.gamma = constant_seq(rf.inst.gamma);
  pc.lambda = 1.0;
  pc.t_neg_monotone = true;
  const Certificate cert = certify_alg1_constant(pc, tp.alpha);
  REQUIRE(cert.ok);

  // high-accuracy reference solution
  const Vec zero(15, 0.0);
  const RunRecord ref = run(bundle, Schedule::constant(rf.inst.gamma),
                            Variant::base, zero, zero, zero, {1e-15, 200000});
  REQUIRE(ref.converged);

  const RunRecord rec = run(bundle, s, Variant::alg1, zero, zero, zero,
                            {1e-13, 50000}, ref.final_x);
  REQUIRE(rec.converged);
  REQUIRE(!rec.lyapunov.empty());
  const double c0 = rec.lyapunov.front();
  for (std::size_t i = 1; i < rec.lyapunov.size(); ++i) {
    CHECK(rec.lyapunov[i] <= rec.lyapunov[i - 1] + 1e-9 * c0);
    CHECK(rec.lyapunov[i] >= -1e-9 * c0);
  }

  // partial sums of squared steps stay below C_1 / eps, and each step obeys
  // the decrement bound; accumulate by replaying the recurrence
  const double eps = cert.min_margin;
  REQUIRE(eps > 0.0);
  IterateState st{zero, zero, zero, 0};
  double partial = 0.0;
  double c_prev = -1.0;
  for (int k = 0; k < rec.iterations; ++k) {
    StepTransients tr;
    const IterateState next = step_inertial_relaxed(bundle, s, st, &tr);
    const LyapunovSample sample =
        lyapunov_alg1(bundle, s, st, next, ref.final_x, tr);
    if (c_prev >= 0.0)
      CHECK(sample.c_value <=
            c_prev - sample.decrement_bound + 1e-9 * c0);
    c_prev = sample.c_value;
    if (k > 0) {
      const Vec d = sub(next.x_curr, st.x_curr);
      partial += dot(d, d);
      CHECK(partial <= c0 / eps + 1e-6);
    }
    st = next;
  }
}

TEST_CASE("diverging iteration is flagged, not thrown") {
  OperatorBundle b;
  b.warped_resolvent = [](int, const Vec& v) { return v; };
  b.kernel = [](int, const Vec& x) { return x; };
  b.cocoercive = [](const Vec& x) { return scaled(-40.0, x); };
  b.mu = 0.01;
  const RunRecord rec = run(b, Schedule::constant(1.0), Variant::base, {1.0},
                            {1.0}, {0.0}, {1e-12, 2000});
  CHECK(rec.diverged);
  CHECK_FALSE(rec.converged);
  CHECK(rec.last_finite_iteration < 2000);
}

TEST_CASE("restart schedule semantics") {
  Schedule s = Schedule::constant(1.0, 0.3);
  s.restart_n0 = 5;
  CHECK(s.alpha_at(0) == 0.3);
  CHECK(s.alpha_at(4) == 0.3);
  CHECK(s.alpha_at(5) == 0.0);
  CHECK(s.alpha_at(500) == 0.0);
}
