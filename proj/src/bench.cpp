#include "nfbm/bench.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <random>

#include "nfbm/pgm.hpp"

namespace nfbm {

BenchAlgo bench_algo_from_string(const std::string& name) {
  if (name == "FHRB") return BenchAlgo::FHRB;
  if (name == "FHRBSI") return BenchAlgo::FHRBSI;
  if (name == "FHRBI") return BenchAlgo::FHRBI;
  if (name == "FHRBDI") return BenchAlgo::FHRBDI;
  if (name == "FHRBSDI") return BenchAlgo::FHRBSDI;
  if (name == "FHRBRI") return BenchAlgo::FHRBRI;
  if (name == "FHRBIR") return BenchAlgo::FHRBIR;
  throw parameter_error("unknown algorithm: " + name);
}

std::string to_string(BenchAlgo a) {
  switch (a) {
    case BenchAlgo::FHRB: return "FHRB";
    case BenchAlgo::FHRBSI: return "FHRBSI";
    case BenchAlgo::FHRBI: return "FHRBI";
    case BenchAlgo::FHRBDI: return "FHRBDI";
    case BenchAlgo::FHRBSDI: return "FHRBSDI";
    case BenchAlgo::FHRBRI: return "FHRBRI";
    case BenchAlgo::FHRBIR: return "FHRBIR";
  }
  return "?";
}

namespace {

bool is_alg2(BenchAlgo a) {
  return a == BenchAlgo::FHRBSI || a == BenchAlgo::FHRBDI ||
         a == BenchAlgo::FHRBSDI;
}

}  // namespace

Image builtin_pattern(int n) {
  if (n < 8) throw parameter_error("builtin pattern needs n >= 8");
  Image img(n, n, 30.0);
  auto rect = [&](double r0, double c0, double r1, double c1, double v) {
    for (int i = static_cast<int>(r0 * n); i < static_cast<int>(r1 * n); ++i)
      for (int j = static_cast<int>(c0 * n); j < static_cast<int>(c1 * n);
           ++j)
        img.at(i, j) = v;
  };
  rect(0.10, 0.12, 0.45, 0.42, 200.0);
  rect(0.55, 0.10, 0.88, 0.38, 120.0);
  rect(0.15, 0.55, 0.35, 0.90, 80.0);
  const double cx = 0.68 * n, cy = 0.68 * n, rad = 0.16 * n;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double di = i - cy, dj = j - cx;
      if (di * di + dj * dj <= rad * rad) img.at(i, j) = 230.0;
    }
  return img;
}

ImagingProblem build_problem(const ExperimentConfig& cfg,
                             std::uint64_t realization_seed) {
  if (cfg.kernel_size < 1 || cfg.kernel_size % 2 == 0)
    throw parameter_error("kernel size must be odd");
  if (!cfg.gamma && !(cfg.step_kappa > 0.0 && cfg.step_kappa <= 1.0))
    throw parameter_error("kappa must lie in (0,1]");
  if (!(cfg.tol > 0.0)) throw parameter_error("tol must be positive");
  if (cfg.max_iters < 1) throw parameter_error("max_iters >= 1");
  if (!(cfg.reg_rho > 0.0)) throw parameter_error("rho must be positive");
  ImagingProblem p;
  p.x_true = cfg.image_path.empty() ? builtin_pattern(cfg.n)
                                    : read_pgm(cfg.image_path);
  p.kernel = BlurKernel::average(cfg.kernel_size);
  p.rho = cfg.reg_rho;

  p.norm_K = 1.0;
  p.norm_D = std::sqrt(8.0);
  if (cfg.estimate_norms) {
    p.norm_K = power_iteration(
                   blur_linop(p.x_true.width, p.x_true.height, p.kernel),
                   7771, 4000, 1e-10)
                   .value;
    p.norm_D =
        power_iteration(grad_linop(p.x_true.width, p.x_true.height), 7772,
                        4000, 1e-10)
            .value;
  }
  p.mu = 1.0 / (p.norm_K * p.norm_K);
  p.zeta = p.norm_D;

  p.observed = blur(p.x_true, p.kernel);
  if (cfg.noise_std > 0.0) {
    Rng rng(realization_seed);
    std::normal_distribution<double> noise(0.0, cfg.noise_std);
    for (auto& v : p.observed.px) v += noise(rng);
  }

  p.gamma = cfg.gamma ? *cfg.gamma
                      : 2.0 * p.mu * cfg.step_kappa / (1.0 + 4.0 * p.mu * p.zeta);
  return p;
}

ResolvedParams resolve_params(const ExperimentConfig& cfg,
                              const ImagingProblem& problem) {
  ResolvedParams rp;
  rp.gamma = problem.gamma;
  if (cfg.algo == BenchAlgo::FHRBIR) {
    // restart strategy: user-chosen inertia until N0, zero afterwards
    rp.alpha = cfg.alpha.value_or(0.2);
    rp.lambda = cfg.lambda.value_or(1.0);
    rp.restart_n0 = cfg.restart_n0.value_or(cfg.max_iters / 10);
    return rp;
  }
  // parameters the table supplies for this method; if every one of them is
  // overridden the table lookup becomes advisory
  const bool table_covered = [&] {
    switch (cfg.algo) {
      case BenchAlgo::FHRB: return true;
      case BenchAlgo::FHRBSI:
      case BenchAlgo::FHRBSDI: return cfg.theta.has_value();
      case BenchAlgo::FHRBI:
      case BenchAlgo::FHRBDI: return cfg.alpha.has_value();
      case BenchAlgo::FHRBRI:
        return cfg.alpha.has_value() && cfg.lambda.has_value();
      default: return false;
    }
  }();
  TableParams tp;
  try {
    tp = table_params(table_method_from_string(to_string(cfg.algo)),
                      cfg.case_index, problem.gamma, problem.mu, problem.zeta,
                      cfg.beta);
  } catch (const infeasible_error& e) {
    if (!table_covered) {
      rp.table_infeasible = true;
      rp.infeasible_reason = e.what();
      return rp;
    }
  }
  rp.alpha = cfg.alpha.value_or(tp.alpha);
  rp.beta = cfg.beta.value_or(tp.beta);
  rp.theta = cfg.theta.value_or(tp.theta);
  rp.lambda = cfg.lambda.value_or(tp.lambda);
  rp.restart_n0 = cfg.restart_n0;
  return rp;
}

Certificate certify_imaging(const ImagingProblem& problem,
                            const ResolvedParams& rp, BenchAlgo algo) {
  ProblemConstants pc;
  pc.mu = problem.mu;
  pc.zeta = constant_seq(problem.gamma * problem.zeta);
  pc.gamma = constant_seq(problem.gamma);
  pc.lambda = rp.lambda;
  pc.t_neg_monotone = true;  // the coupling is skew
  if (is_alg2(algo))
    return certify_alg2_constant(pc, rp.alpha, rp.beta, rp.theta);
  if (rp.restart_n0)  // conditions are required from the restart index on
    return certify_alg1_constant(pc, 0.0);
  return certify_alg1_constant(pc, rp.alpha);
}

PdImagingState imaging_init(const ImagingProblem& problem) {
  PdImagingState st;
  st.x = problem.observed;
  st.u = GradField(st.x.width, st.x.height);
  st.x_prev = st.x;
  st.u_prev = st.u;
  st.yx_prev = st.x_prev;  // y_{-1} := x_{-1}
  st.yu_prev = st.u_prev;
  st.px_prev = st.x;  // p_0 := x_0
  st.pu_prev = st.u;
  st.n = 0;
  return st;
}

namespace {

double alpha_at(const ResolvedParams& rp, int n) {
  if (rp.restart_n0 && n >= *rp.restart_n0) return 0.0;
  return rp.alpha;
}

void ensure_finite_state(const Image& x, const GradField& u, int n) {
  if (!all_finite(x.px) || !all_finite(u.dx) || !all_finite(u.dy))
    throw divergence_error(static_cast<std::size_t>(n), "non-finite iterate");
}

}  // namespace

PdImagingState imaging_step(const ImagingProblem& problem,
                            const ResolvedParams& rp, BenchAlgo algo,
                            const PdImagingState& st) {
  const int n = st.n;
  const int w = st.x.width, h = st.x.height;
  const std::size_t npix = st.x.px.size();
  const double g = rp.gamma;
  const double a = alpha_at(rp, n);
  const bool alg2 = is_alg2(algo);

  // inertial extrapolation of the full primal-dual pair
  Image yx(w, h);
  GradField yu(w, h);
  for (std::size_t i = 0; i < npix; ++i)
    yx.px[i] = st.x.px[i] + a * (st.x.px[i] - st.x_prev.px[i]);
  for (std::size_t i = 0; i < npix; ++i) {
    yu.dx[i] = st.u.dx[i] + a * (st.u.dx[i] - st.u_prev.dx[i]);
    yu.dy[i] = st.u.dy[i] + a * (st.u.dy[i] - st.u_prev.dy[i]);
  }

  // anchor of the reflected term: previous resolvent output for the
  // relaxed-inertial family, the current iterate for the double-inertial one
  const Image& ax = alg2 ? st.x : st.px_prev;
  const GradField& au = alg2 ? st.u : st.pu_prev;

  // reflected combinations; linearity turns the three kernel applications
  // into one on the combined point
  Image combo_x(w, h);
  GradField combo_u(w, h);
  for (std::size_t i = 0; i < npix; ++i)
    combo_x.px[i] = ax.px[i] + yx.px[i] - st.yx_prev.px[i];
  for (std::size_t i = 0; i < npix; ++i) {
    combo_u.dx[i] = au.dx[i] + yu.dx[i] - st.yu_prev.dx[i];
    combo_u.dy[i] = au.dy[i] + yu.dy[i] - st.yu_prev.dy[i];
  }
  const Image div_combo = grad_adjoint(combo_u);
  const GradField grad_combo = grad(combo_x);

  // gradient of the data term at the cocoercive evaluation point
  Image hpoint(w, h);
  if (alg2) {
    const double be = rp.beta;
    for (std::size_t i = 0; i < npix; ++i)
      hpoint.px[i] = st.x.px[i] + be * (st.x.px[i] - st.x_prev.px[i]);
  } else {
    hpoint = yx;
  }
  Image resid = blur(hpoint, problem.kernel);
  for (std::size_t i = 0; i < npix; ++i)
    resid.px[i] -= problem.observed.px[i];
  const Image gh = blur_adjoint(resid, problem.kernel);

  PdImagingState next;
  next.n = n + 1;
  next.x_prev = st.x;
  next.u_prev = st.u;

  if (alg2) {
    const double th = rp.theta;
    Image px(w, h);
    GradField pu(w, h);
    for (std::size_t i = 0; i < npix; ++i) {
      const double base =
          yx.px[i] + th * (st.x.px[i] - st.x_prev.px[i]) -
          g * (div_combo.px[i] + gh.px[i]);
      px.px[i] = std::min(255.0, std::max(0.0, base));
    }
    for (std::size_t i = 0; i < npix; ++i) {
      const double bx = yu.dx[i] + th * (st.u.dx[i] - st.u_prev.dx[i]) +
                        g * grad_combo.dx[i];
      const double by = yu.dy[i] + th * (st.u.dy[i] - st.u_prev.dy[i]) +
                        g * grad_combo.dy[i];
      pu.dx[i] = std::min(problem.rho, std::max(-problem.rho, bx));
      pu.dy[i] = std::min(problem.rho, std::max(-problem.rho, by));
    }
    next.x = std::move(px);
    next.u = std::move(pu);
    next.px_prev = next.x;
    next.pu_prev = next.u;
  } else {
    const double lam = rp.lambda;
    Image px(w, h);
    GradField pu(w, h);
    for (std::size_t i = 0; i < npix; ++i) {
      const double base = yx.px[i] - g * (div_combo.px[i] + gh.px[i]);
      px.px[i] = std::min(255.0, std::max(0.0, base));
    }
    for (std::size_t i = 0; i < npix; ++i) {
      const double bx = yu.dx[i] + g * grad_combo.dx[i];
      const double by = yu.dy[i] + g * grad_combo.dy[i];
      pu.dx[i] = std::min(problem.rho, std::max(-problem.rho, bx));
      pu.dy[i] = std::min(problem.rho, std::max(-problem.rho, by));
    }
    next.x = Image(w, h);
    next.u = GradField(w, h);
    for (std::size_t i = 0; i < npix; ++i)
      next.x.px[i] = (1.0 - lam) * yx.px[i] + lam * px.px[i];
    for (std::size_t i = 0; i < npix; ++i) {
      next.u.dx[i] = (1.0 - lam) * yu.dx[i] + lam * pu.dx[i];
      next.u.dy[i] = (1.0 - lam) * yu.dy[i] + lam * pu.dy[i];
    }
    next.px_prev = std::move(px);
    next.pu_prev = std::move(pu);
  }
  ensure_finite_state(next.x, next.u, n);
  next.yx_prev = std::move(yx);
  next.yu_prev = std::move(yu);
  return next;
}

namespace {

double pd_rel_error(const PdImagingState& next, const PdImagingState& prev) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < next.x.px.size(); ++i) {
    const double d = next.x.px[i] - prev.x.px[i];
    num += d * d;
    den += prev.x.px[i] * prev.x.px[i];
  }
  for (std::size_t i = 0; i < next.u.dx.size(); ++i) {
    const double d1 = next.u.dx[i] - prev.u.dx[i];
    const double d2 = next.u.dy[i] - prev.u.dy[i];
    num += d1 * d1 + d2 * d2;
    den += prev.u.dx[i] * prev.u.dx[i] + prev.u.dy[i] * prev.u.dy[i];
  }
  const double floor = std::numeric_limits<double>::epsilon();
  return std::sqrt(num) / std::max(std::sqrt(den), floor);
}

}  // namespace

ImagingRunRecord run_experiment(const ExperimentConfig& cfg, int realization) {
  const std::uint64_t seed =
      cfg.noise_seed + static_cast<std::uint64_t>(realization);
  const ImagingProblem problem = build_problem(cfg, seed);
  ImagingRunRecord rec;
  rec.params = resolve_params(cfg, problem);
  if (rec.params.table_infeasible) {
    rec.label = "infeasible";
    return rec;
  }
  const Certificate cert = certify_imaging(problem, rec.params, cfg.algo);
  rec.label = cert.ok ? "certified" : "exploratory";

  PdImagingState st = imaging_init(problem);
  const auto t0 = std::chrono::steady_clock::now();
  for (int k = 0; k < cfg.max_iters; ++k) {
    PdImagingState next;
    try {
      next = imaging_step(problem, rec.params, cfg.algo, st);
    } catch (const divergence_error&) {
      rec.diverged = true;
      break;
    }
    rec.rel_error.push_back(pd_rel_error(next, st));
    st = std::move(next);
    rec.iterations = st.n;
    if (rec.rel_error.back() < cfg.tol) {
      rec.converged = true;
      break;
    }
  }
  const auto t1 = std::chrono::steady_clock::now();
  rec.wall_time_s = std::chrono::duration<double>(t1 - t0).count();
  rec.final_psnr = psnr(st.x, problem.x_true);
  rec.restored = std::move(st.x);
  return rec;
}

std::vector<GridCell> GridConfig::default_cells() {
  std::vector<GridCell> cells;
  cells.push_back({BenchAlgo::FHRB, 1});
  for (int c = 1; c <= 3; ++c) cells.push_back({BenchAlgo::FHRBSI, c});
  for (int c = 1; c <= 3; ++c) cells.push_back({BenchAlgo::FHRBI, c});
  for (int c = 1; c <= 3; ++c) cells.push_back({BenchAlgo::FHRBDI, c});
  cells.push_back({BenchAlgo::FHRBSDI, 1});
  return cells;
}

std::vector<GridRow> run_grid(const GridConfig& grid) {
  std::vector<GridRow> rows;
  for (const GridCell& cell : grid.cells) {
    for (double kappa : grid.kappas) {
      ExperimentConfig cfg = grid.base;
      cfg.algo = cell.algo;
      cfg.case_index = cell.case_index;
      cfg.step_kappa = kappa;
      GridRow row;
      row.algo = cell.algo;
      row.case_index = cell.case_index;
      row.kappa = kappa;
      double in_sum = 0.0, t_sum = 0.0, psnr_sum = 0.0;
      int done = 0;
      for (int r = 0; r < cfg.realizations; ++r) {
        const ImagingRunRecord rec = run_experiment(cfg, r);
        if (r == 0) {
          row.params = rec.params;
          row.label = rec.label;
        }
        if (rec.label == "infeasible") break;
        in_sum += rec.iterations;
        t_sum += rec.wall_time_s;
        psnr_sum += rec.final_psnr;
        if (rec.converged) ++row.converged_count;
        ++done;
      }
      if (done > 0) {
        row.in_mean = in_sum / done;
        row.t_mean = t_sum / done;
        row.psnr_mean = psnr_sum / done;
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string format_g6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string grid_to_csv(const std::vector<GridRow>& rows) {
  std::string csv =
      "algo,case,kappa,alpha,beta,theta,lambda,N0,IN_mean,T_mean,"
      "converged_count,psnr_mean,gamma,label\n";
  for (const GridRow& r : rows) {
    csv += to_string(r.algo);
    csv += ',';
    csv += std::to_string(r.case_index);
    csv += ',';
    csv += format_g6(r.kappa);
    csv += ',';
    csv += format_g6(r.params.alpha);
    csv += ',';
    csv += format_g6(r.params.beta);
    csv += ',';
    csv += format_g6(r.params.theta);
    csv += ',';
    csv += format_g6(r.params.lambda);
    csv += ',';
    csv += r.params.restart_n0 ? std::to_string(*r.params.restart_n0) : "";
    csv += ',';
    csv += format_g6(r.in_mean);
    csv += ',';
    csv += format_g6(r.t_mean);
    csv += ',';
    csv += std::to_string(r.converged_count);
    csv += ',';
    csv += format_g6(r.psnr_mean);
    csv += ',';
    csv += format_g6(r.params.gamma);
    csv += ',';
    csv += r.label;
    csv += '\n';
  }
  return csv;
}

void emit_plotdata(std::ostream& os, const std::vector<double>& rel_error,
                   const std::vector<double>& lyapunov) {
  os << "iter,rel_error,lyapunov\n";
  for (std::size_t i = 0; i < rel_error.size(); ++i) {
    os << (i + 1) << ',' << format_g6(rel_error[i]) << ',';
    if (i < lyapunov.size()) os << format_g6(lyapunov[i]);
    os << '\n';
  }
}

}  // namespace nfbm
