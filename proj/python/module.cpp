#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>

#include "nfbm/bench.hpp"
#include "nfbm/splitting.hpp"

namespace py = pybind11;
using namespace nfbm;

namespace {

ExperimentConfig config_from_kwargs(
    const std::string& algo, int case_index, double kappa, int n,
    int kernel_size, double noise_std, std::uint64_t seed, double rho,
    double tol, int max_iters, int realizations, std::optional<double> alpha,
    std::optional<double> beta, std::optional<double> theta,
    std::optional<double> lambda, std::optional<double> gamma,
    std::optional<int> restart_n0, const std::string& image) {
  ExperimentConfig cfg;
  cfg.algo = bench_algo_from_string(algo);
  cfg.case_index = case_index;
  cfg.step_kappa = kappa;
  cfg.n = n;
  cfg.kernel_size = kernel_size;
  cfg.noise_std = noise_std;
  cfg.noise_seed = seed;
  cfg.reg_rho = rho;
  cfg.tol = tol;
  cfg.max_iters = max_iters;
  cfg.realizations = realizations;
  cfg.alpha = alpha;
  cfg.beta = beta;
  cfg.theta = theta;
  cfg.lambda = lambda;
  cfg.gamma = gamma;
  cfg.restart_n0 = restart_n0;
  cfg.image_path = image;
  return cfg;
}

py::dict cert_to_dict(const Certificate& cert) {
  py::dict d;
  d["ok"] = cert.ok;
  d["method"] = cert.method;
  d["min_margin"] = cert.min_margin;
  if (cert.first_violation) {
    d["violation_n"] = cert.first_violation->first;
    d["violation"] = cert.first_violation->second;
  }
  return d;
}

}  // namespace

PYBIND11_MODULE(_nfbm, m) {
  m.doc() =
      "Monotone-operator splitting with inertial, relaxed, and "
      "double-inertial momentum variants, plus the image-restoration "
      "benchmark harness";

  py::register_exception<nfbm::error>(m, "NfbmError");

  m.def(
      "gamma_for_kappa",
      [](double kappa, double mu, double zeta) {
        return 2.0 * mu * kappa / (1.0 + 4.0 * mu * zeta);
      },
      py::arg("kappa"), py::arg("mu") = 1.0,
      py::arg("zeta") = std::sqrt(8.0),
      "Step size gamma = 2 mu kappa / (1 + 4 mu zeta)");

  m.def(
      "table_params",
      [](const std::string& method, int case_index, double gamma, double mu,
         double zeta, std::optional<double> beta) {
        const TableParams p = table_params(table_method_from_string(method),
                                           case_index, gamma, mu, zeta, beta);
        py::dict d;
        d["alpha"] = p.alpha;
        d["beta"] = p.beta;
        d["theta"] = p.theta;
        d["lambda"] = p.lambda;
        return d;
      },
      py::arg("method"), py::arg("case_index"), py::arg("gamma"),
      py::arg("mu") = 1.0, py::arg("zeta") = std::sqrt(8.0),
      py::arg("beta") = std::nullopt,
      "Closed-form inertial/relaxation parameters for the method family");

  m.def(
      "certify",
      [](const std::string& method, double alpha, double beta, double theta,
         double lambda, double gamma, double mu, double zeta, double sigma,
         double tau, double norm_L) {
        SpecialConstants k;
        k.alpha = alpha;
        k.beta = beta;
        k.theta = theta;
        k.lambda = lambda;
        k.gamma = gamma;
        k.mu = mu;
        k.zeta = zeta;
        k.sigma = sigma;
        k.tau = tau;
        k.norm_L = norm_L;
        return cert_to_dict(
            certify_special(special_method_from_string(method), k));
      },
      py::arg("method"), py::arg("alpha") = 0.0, py::arg("beta") = 0.0,
      py::arg("theta") = 0.0, py::arg("lambda") = 1.0, py::arg("gamma") = 1.0,
      py::arg("mu") = 1.0, py::arg("zeta") = 0.0, py::arg("sigma") = 0.0,
      py::arg("tau") = 0.0, py::arg("norm_L") = 0.0,
      "Closed-form convergence certificate (FB, FHRB, FHRB-DI, PDBTR)");

  m.def(
      "operator_norms",
      [](int n, int kernel_size, int max_iters, double tol) {
        const auto d = power_iteration(grad_linop(n, n), 1, max_iters, tol);
        const auto k = power_iteration(
            blur_linop(n, n, BlurKernel::average(kernel_size)), 2, max_iters,
            tol);
        py::dict out;
        out["norm_D"] = d.value;
        out["norm_D_converged"] = d.converged;
        out["norm_K"] = k.value;
        out["norm_K_converged"] = k.converged;
        return out;
      },
      py::arg("n") = 64, py::arg("kernel_size") = 3,
      py::arg("max_iters") = 20000, py::arg("tol") = 1e-12,
      "Power-iteration estimates of the gradient and blur operator norms");

  m.def(
      "run_experiment",
      [](const std::string& algo, int case_index, double kappa, int n,
         int kernel_size, double noise_std, std::uint64_t seed, double rho,
         double tol, int max_iters, int realizations,
         std::optional<double> alpha, std::optional<double> beta,
         std::optional<double> theta, std::optional<double> lambda,
         std::optional<double> gamma, std::optional<int> restart_n0,
         const std::string& image, int realization) {
        const ExperimentConfig cfg = config_from_kwargs(
            algo, case_index, kappa, n, kernel_size, noise_std, seed, rho,
            tol, max_iters, realizations, alpha, beta, theta, lambda, gamma,
            restart_n0, image);
        const ImagingRunRecord rec = run_experiment(cfg, realization);
        py::dict d;
        d["iterations"] = rec.iterations;
        d["converged"] = rec.converged;
        d["diverged"] = rec.diverged;
        d["label"] = rec.label;
        d["psnr"] = rec.final_psnr;
        d["wall_time_s"] = rec.wall_time_s;
        d["rel_error"] = rec.rel_error;
        d["alpha"] = rec.params.alpha;
        d["beta"] = rec.params.beta;
        d["theta"] = rec.params.theta;
        d["lambda"] = rec.params.lambda;
        d["gamma"] = rec.params.gamma;
        return d;
      },
      py::arg("algo") = "FHRB", py::arg("case_index") = 1,
      py::arg("kappa") = 0.8, py::arg("n") = 64, py::arg("kernel_size") = 3,
      py::arg("noise_std") = 10.0, py::arg("seed") = 2024,
      py::arg("rho") = 5.0, py::arg("tol") = 1e-6,
      py::arg("max_iters") = 10000, py::arg("realizations") = 5,
      py::arg("alpha") = std::nullopt, py::arg("beta") = std::nullopt,
      py::arg("theta") = std::nullopt, py::arg("lambda") = std::nullopt,
      py::arg("gamma") = std::nullopt, py::arg("restart_n0") = std::nullopt,
      py::arg("image") = std::string(), py::arg("realization") = 0,
      "One seeded image-restoration run; returns the run record");

  m.def(
      "psnr",
      [](const std::vector<double>& a, const std::vector<double>& b, int width,
         int height, double peak) {
        Image x, r;
        x.width = r.width = width;
        x.height = r.height = height;
        x.px = a;
        r.px = b;
        return psnr(x, r, peak);
      },
      py::arg("a"), py::arg("b"), py::arg("width"), py::arg("height"),
      py::arg("peak") = 255.0);

  m.def(
      "builtin_pattern",
      [](int n) {
        const Image img = builtin_pattern(n);
        return img.px;
      },
      py::arg("n"), "Deterministic piecewise-constant test image, flattened");

  m.attr("__version__") = "0.1.0";
}
