// Command-line harness for the NFBM splitting toolkit: parameter
// certification, single restoration runs, benchmark grids, and operator-norm
// reports.

#include <CLI11.hpp>
#include <algorithm>
#include <fstream>
#include <iostream>

#include "nfbm/bench.hpp"
#include "nfbm/pgm.hpp"
#include "nfbm/splitting.hpp"

namespace {

struct CommonFlags {
  std::string algo = "FHRB";
  int case_index = 1;
  double kappa = 0.8;
  double mu = 1.0;
  double zeta = std::sqrt(8.0);
  std::optional<double> alpha, beta, theta, lambda, gamma;
  std::optional<int> restart_n0;
  double tol = 1e-6;
  int max_iter = 10000;
  std::uint64_t seed = 2024;
  int realizations = 5;
  std::string image;
  int n = 64;
  int kernel_size = 3;
  double noise_std = 10.0;
  double rho = 5.0;
  std::string out;
  std::string config_path;
};

// Plain key = value lines, '#' comments; keys are the long flag names
// without the leading dashes.
std::vector<std::string> config_tokens(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw nfbm::io_error("cannot open config file " + path);
  std::vector<std::string> tokens;
  std::string line;
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    const auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) continue;
    tokens.push_back("--" + key + "=" + value);
  }
  return tokens;
}

// Splices the config-file tokens right after the subcommand name so that
// explicit flags, which come later, take precedence.
std::vector<std::string> expand_args(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0)
      path = args[i].substr(std::string("--config=").size());
  }
  if (path.empty() || args.empty()) return args;
  const std::vector<std::string> extra = config_tokens(path);
  args.insert(args.begin() + 1, extra.begin(), extra.end());
  return args;
}

void add_common_flags(CLI::App* cmd, CommonFlags& f) {
  // repeated options keep the last value, so config-file tokens spliced in
  // ahead of the real command line are overridden by explicit flags
  cmd->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  cmd->add_option("--config", f.config_path,
                  "key = value file mirroring the flags; flags override it");
  cmd->add_option("--algo", f.algo,
                  "FHRB|FHRBSI|FHRBI|FHRBDI|FHRBSDI|FHRBRI|FHRBIR");
  cmd->add_option("--case", f.case_index, "table case index");
  cmd->add_option("--kappa", f.kappa, "step-size dial in (0,1]");
  cmd->add_option("--alpha", f.alpha, "inertial parameter override");
  cmd->add_option("--beta", f.beta, "second inertial parameter override");
  cmd->add_option("--theta", f.theta, "momentum parameter override");
  cmd->add_option("--lambda", f.lambda, "relaxation parameter override");
  cmd->add_option("--gamma", f.gamma, "step size override");
  cmd->add_option("--restart-n0", f.restart_n0, "restart iteration index");
  cmd->add_option("--tol", f.tol, "relative-error stopping tolerance");
  cmd->add_option("--max-iter", f.max_iter, "iteration budget");
  cmd->add_option("--seed", f.seed, "noise seed");
  cmd->add_option("--realizations", f.realizations, "noise realizations");
  cmd->add_option("--image", f.image, "input PGM (default: builtin pattern)");
  cmd->add_option("--n", f.n, "builtin image side length");
  cmd->add_option("--kernel-size", f.kernel_size, "blur kernel size (odd)");
  cmd->add_option("--noise-std", f.noise_std, "noise std on the 0-255 scale");
  cmd->add_option("--rho", f.rho, "total-variation weight");
  cmd->add_option("--out", f.out, "output path prefix");
}

nfbm::ExperimentConfig to_config(const CommonFlags& f) {
  nfbm::ExperimentConfig cfg;
  cfg.image_path = f.image;
  cfg.n = f.n;
  cfg.kernel_size = f.kernel_size;
  cfg.noise_std = f.noise_std;
  cfg.noise_seed = f.seed;
  cfg.reg_rho = f.rho;
  cfg.step_kappa = f.kappa;
  cfg.algo = nfbm::bench_algo_from_string(f.algo);
  cfg.case_index = f.case_index;
  cfg.restart_n0 = f.restart_n0;
  cfg.alpha = f.alpha;
  cfg.beta = f.beta;
  cfg.theta = f.theta;
  cfg.lambda = f.lambda;
  cfg.gamma = f.gamma;
  cfg.tol = f.tol;
  cfg.max_iters = f.max_iter;
  cfg.realizations = f.realizations;
  return cfg;
}

int cmd_certify(const CommonFlags& f, const std::string& method) {
  using namespace nfbm;
  if (!method.empty()) {
    SpecialConstants k;
    k.alpha = f.alpha.value_or(0.0);
    k.beta = f.beta.value_or(0.0);
    k.theta = f.theta.value_or(0.0);
    k.lambda = f.lambda.value_or(1.0);
    k.mu = f.mu;
    k.zeta = f.zeta;
    k.gamma = f.gamma.value_or(2.0 * f.mu * f.kappa / (1.0 + 4.0 * f.mu * f.zeta));
    const Certificate cert =
        certify_special(special_method_from_string(method), k);
    std::cout << cert.render_text();
    std::cout << cert.render_kv();
    return cert.ok ? 0 : 1;
  }
  ExperimentConfig cfg = to_config(f);
  const ImagingProblem problem = build_problem(cfg, cfg.noise_seed);
  const ResolvedParams rp = resolve_params(cfg, problem);
  if (rp.table_infeasible) {
    std::cout << "infeasible: " << rp.infeasible_reason << "\n";
    return 1;
  }
  std::cout << "algo=" << to_string(cfg.algo) << " case=" << cfg.case_index
            << " kappa=" << format_g6(cfg.step_kappa)
            << " gamma=" << format_g6(rp.gamma)
            << " alpha=" << format_g6(rp.alpha)
            << " beta=" << format_g6(rp.beta)
            << " theta=" << format_g6(rp.theta)
            << " lambda=" << format_g6(rp.lambda) << "\n";
  const Certificate cert = certify_imaging(problem, rp, cfg.algo);
  std::cout << cert.render_text();
  std::cout << cert.render_kv();
  return cert.ok ? 0 : 1;
}

int cmd_run(const CommonFlags& f) {
  using namespace nfbm;
  ExperimentConfig cfg = to_config(f);
  const ImagingRunRecord rec = run_experiment(cfg, 0);
  if (rec.label == "infeasible") {
    std::cout << "infeasible parameters: " << rec.params.infeasible_reason
              << "\n";
    return 1;
  }
  std::cout << "algo=" << to_string(cfg.algo)
            << " label=" << rec.label
            << " iterations=" << rec.iterations
            << " converged=" << (rec.converged ? 1 : 0)
            << " diverged=" << (rec.diverged ? 1 : 0)
            << " time_s=" << format_g6(rec.wall_time_s)
            << " psnr=" << format_g6(rec.final_psnr) << "\n";
  if (!f.out.empty()) {
    std::ofstream plot(f.out + "_trace.csv");
    emit_plotdata(plot, rec.rel_error);
    if (!plot) {
      std::cerr << "cannot write " << f.out << "_trace.csv\n";
      return 1;
    }
    write_pgm(f.out + "_restored.pgm", rec.restored);
    std::cout << "wrote " << f.out << "_trace.csv and " << f.out
              << "_restored.pgm\n";
  }
  return 0;
}

int cmd_bench(const CommonFlags& f, const std::vector<double>& kappas,
              bool full_family) {
  using namespace nfbm;
  GridConfig grid;
  grid.base = to_config(f);
  grid.kappas = kappas.empty() ? std::vector<double>{0.5, 0.6, 0.7, 0.8}
                               : kappas;
  if (full_family) {
    grid.cells = GridConfig::default_cells();
  } else {
    grid.cells = {{grid.base.algo, grid.base.case_index}};
  }
  const std::vector<GridRow> rows = run_grid(grid);
  const std::string csv = grid_to_csv(rows);
  if (f.out.empty()) {
    std::cout << csv;
  } else {
    std::ofstream file(f.out);
    file << csv;
    if (!file) {
      std::cerr << "cannot write " << f.out << "\n";
      return 1;
    }
    std::cout << "wrote " << f.out << "\n";
  }
  return 0;
}

int cmd_norms(const CommonFlags& f) {
  using namespace nfbm;
  const auto d = power_iteration(grad_linop(f.n, f.n), f.seed, 20000, 1e-12);
  const auto kern = BlurKernel::average(f.kernel_size);
  const auto k = power_iteration(blur_linop(f.n, f.n, kern), f.seed, 20000,
                                 1e-12);
  std::cout << "n=" << f.n << "\n";
  std::cout << "norm_D=" << format_g6(d.value)
            << " converged=" << (d.converged ? 1 : 0)
            << " iterations=" << d.iterations << "\n";
  std::cout << "norm_K=" << format_g6(k.value)
            << " converged=" << (k.converged ? 1 : 0)
            << " iterations=" << k.iterations
            << " kernel_size=" << f.kernel_size << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"NFBM operator-splitting toolkit"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string method;
  std::vector<double> kappas;
  bool full_family = false;

  CLI::App* certify = app.add_subcommand(
      "certify", "evaluate a convergence certificate");
  add_common_flags(certify, flags);
  certify->add_option("--method", method,
                      "closed-form method: FB|FHRB|FHRB-DI|PDBTR (default: "
                      "certify the imaging configuration)");
  certify->add_option("--mu", flags.mu, "cocoercivity constant");
  certify->add_option("--zeta", flags.zeta, "Lipschitz constant");

  CLI::App* run = app.add_subcommand("run", "single restoration experiment");
  add_common_flags(run, flags);

  CLI::App* bench = app.add_subcommand(
      "bench", "benchmark grid, CSV output");
  add_common_flags(bench, flags);
  bench->add_option("--kappas", kappas, "step-size dials to sweep")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  bench->add_flag("--full-family", full_family,
                  "sweep the whole method family instead of --algo");

  CLI::App* norms = app.add_subcommand(
      "norms", "power-iteration report for the gradient and blur operators");
  add_common_flags(norms, flags);

  try {
    std::vector<std::string> args = expand_args(argc, argv);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (certify->parsed()) return cmd_certify(flags, method);
    if (run->parsed()) return cmd_run(flags);
    if (bench->parsed()) return cmd_bench(flags, kappas, full_family);
    if (norms->parsed()) return cmd_norms(flags);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
