#include <doctest.h>

#include <cmath>
#include <sstream>

#include "nfbm/bench.hpp"
#include "nfbm/splitting.hpp"

using namespace nfbm;

TEST_CASE("builtin pattern is deterministic and in range") {
  const Image a = builtin_pattern(32);
  const Image b = builtin_pattern(32);
  CHECK(a.px == b.px);
  for (double v : a.px) {
    CHECK(v >= 0.0);
    CHECK(v <= 255.0);
  }
  CHECK_THROWS_AS(builtin_pattern(4), parameter_error);
}

TEST_CASE("build_problem constants and noiseless observation") {
  ExperimentConfig cfg;
  cfg.n = 16;
  cfg.noise_std = 0.0;
  cfg.step_kappa = 0.5;
  const ImagingProblem p = build_problem(cfg, 1);
  CHECK(p.mu == doctest::Approx(1.0));
  CHECK(p.zeta == doctest::Approx(std::sqrt(8.0)));
  CHECK(p.gamma == doctest::Approx(0.081210303).epsilon(1e-7));
  const Image blurred = blur(p.x_true, p.kernel);
  CHECK(p.observed.px == blurred.px);
}

TEST_CASE("noise is seeded and reproducible") {
  ExperimentConfig cfg;
  cfg.n = 16;
  const ImagingProblem a = build_problem(cfg, 5);
  const ImagingProblem b = build_problem(cfg, 5);
  const ImagingProblem c = build_problem(cfg, 6);
  CHECK(a.observed.px == b.observed.px);
  CHECK(a.observed.px != c.observed.px);
}

TEST_CASE("resolved parameters follow the tables, overrides win") {
  ExperimentConfig cfg;
  cfg.n = 16;
  cfg.algo = BenchAlgo::FHRBI;
  cfg.case_index = 3;
  cfg.step_kappa = 0.5;
  const ImagingProblem p = build_problem(cfg, 0);
  ResolvedParams rp = resolve_params(cfg, p);
  CHECK(rp.alpha == doctest::Approx(0.196962244).epsilon(1e-6));
  CHECK(rp.lambda == 1.0);

  cfg.alpha = 0.05;
  rp = resolve_params(cfg, p);
  CHECK(rp.alpha == 0.05);

  // restart strategy picks one tenth of the budget by default
  ExperimentConfig ir;
  ir.n = 16;
  ir.algo = BenchAlgo::FHRBIR;
  ir.max_iters = 4000;
  const ResolvedParams rir = resolve_params(ir, p);
  CHECK(rir.alpha == doctest::Approx(0.2));
  REQUIRE(rir.restart_n0.has_value());
  CHECK(*rir.restart_n0 == 400);
}

TEST_CASE("certificates: table configurations certify, theta = 0.2 does not") {
  ExperimentConfig cfg;
  cfg.n = 16;
  cfg.noise_std = 0.0;
  cfg.step_kappa = 0.8;
  cfg.algo = BenchAlgo::FHRBSI;
  cfg.case_index = 3;
  ImagingProblem p = build_problem(cfg, 0);
  ResolvedParams rp = resolve_params(cfg, p);
  CHECK(certify_imaging(p, rp, cfg.algo).ok);

  cfg.step_kappa = 0.99;
  cfg.theta = 0.2;
  p = build_problem(cfg, 0);
  rp = resolve_params(cfg, p);
  CHECK_FALSE(certify_imaging(p, rp, cfg.algo).ok);
}

TEST_CASE("imaging_step matches the generic fhrb machinery on the product space") {
  ExperimentConfig cfg;
  cfg.n = 8;
  cfg.noise_std = 4.0;
  cfg.step_kappa = 0.7;
  const ImagingProblem p = build_problem(cfg, 2);
  const int n = cfg.n;
  const std::size_t npix = static_cast<std::size_t>(n) * n;

  // the same problem as an FHRB instance on the flattened product space
  FhrbInstance inst;
  inst.gamma = p.gamma;
  inst.mu = p.mu;
  inst.zeta_B = p.zeta;
  inst.b_monotone = true;
  const double rho = p.rho;
  inst.resolvent_Atilde = [npix, rho](double, const Vec& v) {
    Vec out = v;
    for (std::size_t i = 0; i < npix; ++i)
      out[i] = std::min(255.0, std::max(0.0, out[i]));
    for (std::size_t i = npix; i < out.size(); ++i)
      out[i] = std::min(rho, std::max(-rho, out[i]));
    return out;
  };
  inst.B = [n, npix](const Vec& z) {
    Image x;
    x.width = x.height = n;
    x.px.assign(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(npix));
    const GradField u = vec_to_grad(Vec(z.begin() + npix, z.end()), n, n);
    const Image dstar = grad_adjoint(u);
    const GradField dx = grad(x);
    Vec out;
    out.reserve(3 * npix);
    out.insert(out.end(), dstar.px.begin(), dstar.px.end());
    for (double v : dx.dx) out.push_back(-v);
    for (double v : dx.dy) out.push_back(-v);
    return out;
  };
  const BlurKernel kern = p.kernel;
  const Image observed = p.observed;
  inst.cocoercive = [n, npix, kern, observed](const Vec& z) {
    Image x;
    x.width = x.height = n;
    x.px.assign(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(npix));
    Image resid = blur(x, kern);
    for (std::size_t i = 0; i < npix; ++i) resid.px[i] -= observed.px[i];
    const Image g = blur_adjoint(resid, kern);
    Vec out;
    out.reserve(3 * npix);
    out.insert(out.end(), g.px.begin(), g.px.end());
    out.insert(out.end(), 2 * npix, 0.0);
    return out;
  };

  struct Case {
    BenchAlgo algo;
    ResolvedParams rp;
    Variant variant;
  };
  std::vector<Case> cases;
  {
    ResolvedParams rp;
    rp.gamma = p.gamma;
    Case plain{BenchAlgo::FHRB, rp, Variant::alg1};
    cases.push_back(plain);
    rp.alpha = 0.08;
    rp.lambda = 1.15;
    cases.push_back({BenchAlgo::FHRBRI, rp, Variant::alg1});
    ResolvedParams rp2;
    rp2.gamma = p.gamma;
    rp2.alpha = 0.05;
    rp2.beta = 1.0;
    rp2.theta = 0.02;
    cases.push_back({BenchAlgo::FHRBDI, rp2, Variant::alg2});
  }

  for (const Case& c : cases) {
    PdImagingState st = imaging_init(p);
    Schedule s = Schedule::constant(p.gamma, c.rp.alpha, c.rp.beta,
                                    c.rp.theta, c.rp.lambda);
    const Vec z0 = pd_concat(p.observed.px, Vec(2 * npix, 0.0));
    FhrbState zoo = fhrb_init(z0, z0);
    for (int k = 0; k < 25; ++k) {
      st = imaging_step(p, c.rp, c.algo, st);
      zoo = fhrb_step(inst, s, zoo, c.variant);
      const Vec flat = pd_concat(st.x.px, grad_to_vec(st.u));
      double worst = 0.0;
      for (std::size_t i = 0; i < flat.size(); ++i)
        worst = std::max(worst,
                         std::abs(flat[i] - zoo.x_curr[i]) /
                             std::max({1.0, std::abs(flat[i]),
                                       std::abs(zoo.x_curr[i])}));
      REQUIRE(worst <= 1e-12);
    }
  }
}

TEST_CASE("momentum-off double-inertial run equals the plain one") {
  ExperimentConfig cfg;
  cfg.n = 12;
  cfg.step_kappa = 0.6;
  cfg.max_iters = 40;
  cfg.algo = BenchAlgo::FHRB;
  const ImagingRunRecord plain = run_experiment(cfg, 0);
  cfg.algo = BenchAlgo::FHRBSI;
  cfg.theta = 0.0;
  const ImagingRunRecord si = run_experiment(cfg, 0);
  CHECK(plain.rel_error == si.rel_error);
}

TEST_CASE("runs are deterministic given config and seed") {
  ExperimentConfig cfg;
  cfg.n = 12;
  cfg.max_iters = 60;
  cfg.algo = BenchAlgo::FHRBI;
  cfg.case_index = 2;
  const ImagingRunRecord a = run_experiment(cfg, 1);
  const ImagingRunRecord b = run_experiment(cfg, 1);
  CHECK(a.iterations == b.iterations);
  CHECK(a.rel_error == b.rel_error);
  CHECK(a.final_psnr == b.final_psnr);
}

TEST_CASE("exploratory labeling") {
  ExperimentConfig cfg;
  cfg.n = 12;
  cfg.max_iters = 50;
  cfg.step_kappa = 0.99;
  cfg.algo = BenchAlgo::FHRBSI;
  cfg.theta = 0.2;
  const ImagingRunRecord rec = run_experiment(cfg, 0);
  CHECK(rec.label == "exploratory");

  cfg.theta.reset();
  cfg.algo = BenchAlgo::FHRB;
  const ImagingRunRecord ok = run_experiment(cfg, 0);
  CHECK(ok.label == "certified");
}

TEST_CASE("plot data header and trailing tolerance") {
  ExperimentConfig cfg;
  cfg.n = 12;
  cfg.step_kappa = 0.8;
  cfg.tol = 1e-3;
  const ImagingRunRecord rec = run_experiment(cfg, 0);
  REQUIRE(rec.converged);
  CHECK(rec.rel_error.back() < cfg.tol);

  std::ostringstream os;
  emit_plotdata(os, rec.rel_error);
  const std::string out = os.str();
  CHECK(out.rfind("iter,rel_error,lyapunov\n", 0) == 0);
  CHECK(out.find("\r") == std::string::npos);
}

TEST_CASE("grid CSV layout") {
  GridConfig grid;
  grid.base.n = 12;
  grid.base.max_iters = 30;
  grid.base.realizations = 2;
  grid.cells = {{BenchAlgo::FHRB, 1}, {BenchAlgo::FHRBI, 1}};
  grid.kappas = {0.5, 0.8};
  const auto rows = run_grid(grid);
  REQUIRE(rows.size() == 4);
  const std::string csv = grid_to_csv(rows);
  CHECK(csv.rfind("algo,case,kappa,alpha,beta,theta,lambda,N0,IN_mean,T_mean,"
                  "converged_count,psnr_mean",
                  0) == 0);
  CHECK(csv.find("FHRB,1,0.5,0,0,0,1,") != std::string::npos);
  CHECK(csv.find("\r") == std::string::npos);
}

TEST_CASE("six significant digits") {
  CHECK(format_g6(0.08121030284) == "0.0812103");
  CHECK(format_g6(1194.0) == "1194");
  CHECK(format_g6(0.00016540934) == "0.000165409");
}
