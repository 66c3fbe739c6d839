#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nfbm/certify.hpp"
#include "nfbm/imaging.hpp"

namespace nfbm {

enum class BenchAlgo { FHRB, FHRBSI, FHRBI, FHRBDI, FHRBSDI, FHRBRI, FHRBIR };

BenchAlgo bench_algo_from_string(const std::string& name);
std::string to_string(BenchAlgo a);

/// One image-restoration experiment. Desk-scale defaults; the full-scale
/// setup (n = 256 or 512, 20 realizations) is reachable through the fields.
struct ExperimentConfig {
  std::string image_path;  // empty: deterministic builtin pattern
  int n = 64;
  int kernel_size = 3;
  double noise_std = 10.0;
  std::uint64_t noise_seed = 2024;
  double reg_rho = 5.0;
  double step_kappa = 0.8;
  BenchAlgo algo = BenchAlgo::FHRB;
  int case_index = 1;
  std::optional<int> restart_n0;
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<double> theta;
  std::optional<double> lambda;
  std::optional<double> gamma;
  double tol = 1e-6;
  int max_iters = 10000;
  int realizations = 5;
  bool estimate_norms = false;  // power-iteration constants instead of the
                                // closed-form mu = 1, zeta = sqrt(8)
};

/// Piecewise-constant geometric test pattern (rectangles and a disk) on the
/// [0,255] range; deterministic for any side length.
Image builtin_pattern(int n);

struct ImagingProblem {
  Image x_true;
  Image observed;
  BlurKernel kernel;
  double mu = 1.0;
  double zeta = 0.0;  // Lipschitz constant of the skew coupling, ||D||
  double gamma = 0.0;
  double rho = 1.0;
  double norm_K = 1.0;
  double norm_D = 0.0;
};

/// Blurs the source image and adds seeded Gaussian noise; resolves the
/// problem constants and the kappa-parameterised step size
/// gamma = 2 mu kappa / (1 + 4 mu zeta) unless overridden.
ImagingProblem build_problem(const ExperimentConfig& cfg,
                             std::uint64_t realization_seed);

/// Parameters actually used by a run, after table lookup and overrides.
struct ResolvedParams {
  double alpha = 0.0;
  double beta = 0.0;
  double theta = 0.0;
  double lambda = 1.0;
  double gamma = 0.0;
  std::optional<int> restart_n0;
  bool table_infeasible = false;
  std::string infeasible_reason;
};

ResolvedParams resolve_params(const ExperimentConfig& cfg,
                              const ImagingProblem& problem);

/// Certificate for the resolved parameters on the primal-dual embedding
/// (effective Lipschitz constant gamma*||D||, monotone momentum operator).
Certificate certify_imaging(const ImagingProblem& problem,
                            const ResolvedParams& rp, BenchAlgo algo);

/// Primal-dual iterate with the caches the reflected term reuses.
struct PdImagingState {
  Image x;
  GradField u;
  Image x_prev;
  GradField u_prev;
  Image yx_prev;  // primal component of y_{n-1}
  GradField yu_prev;
  Image px_prev;  // primal component of p_n
  GradField pu_prev;
  int n = 0;
};

PdImagingState imaging_init(const ImagingProblem& problem);

/// One step of the primal-dual FHRB recurrence specialised to
/// f = box indicator, g = rho ||.||_1, h = 0.5 ||K. - b||^2. Exactly one
/// gradient application, one divergence application and one gradient-of-h
/// evaluation per iteration; the reflected combinations reuse cached points.
/// alg1 methods relax with lambda; alg2 methods use beta/theta.
PdImagingState imaging_step(const ImagingProblem& problem,
                            const ResolvedParams& rp, BenchAlgo algo,
                            const PdImagingState& st);

struct ImagingRunRecord {
  int iterations = 0;
  bool converged = false;
  bool diverged = false;
  double wall_time_s = 0.0;
  double final_psnr = 0.0;
  std::vector<double> rel_error;
  ResolvedParams params;
  std::string label;  // "certified", "exploratory", or "infeasible"
  Image restored;
};

ImagingRunRecord run_experiment(const ExperimentConfig& cfg, int realization);

struct GridCell {
  BenchAlgo algo = BenchAlgo::FHRB;
  int case_index = 1;
};

struct GridConfig {
  ExperimentConfig base;
  std::vector<GridCell> cells;
  std::vector<double> kappas;

  /// The Table 1/2 família at the experiment grid's default cases.
  static std::vector<GridCell> default_cells();
};

struct GridRow {
  BenchAlgo algo;
  int case_index;
  double kappa;
  ResolvedParams params;
  double in_mean = 0.0;
  double t_mean = 0.0;
  int converged_count = 0;
  double psnr_mean = 0.0;
  std::string label;
};

std::vector<GridRow> run_grid(const GridConfig& grid);

/// CSV with the canonical column set, floats at 6 significant digits,
/// LF line endings.
std::string grid_to_csv(const std::vector<GridRow>& rows);

/// iter,rel_error,lyapunov columns; the lyapunov field is left empty when
/// no monitor trace exists.
void emit_plotdata(std::ostream& os, const std::vector<double>& rel_error,
                   const std::vector<double>& lyapunov = {});

/// Formats a double with 6 significant digits, matching the CSV contract.
std::string format_g6(double v);

}  // namespace nfbm
