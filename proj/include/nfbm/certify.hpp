#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nfbm/errors.hpp"

namespace nfbm {

/// Scalar schedule, one value per iteration index.
using ScalarSeq = std::function<double(int)>;

inline ScalarSeq constant_seq(double v) {
  return [v](int) { return v; };
}

/// Problem constants entering the convergence conditions. zeta(n) is the
/// Lipschitz constant of T_n = gamma_n M_n - S in the S-geometry; mu the
/// cocoercivity modulus of the single-valued operator. t_neg_monotone
/// records whether -T_n is monotone, which relaxes the nu coefficient when
/// the relaxation parameter is at least 1.
struct ProblemConstants {
  double mu = 1.0;
  ScalarSeq zeta = constant_seq(0.0);
  ScalarSeq gamma = constant_seq(1.0);
  double epsilon_margin = 1e-12;
  bool t_neg_monotone = false;
  double lambda = 1.0;
};

struct CoeffsAlg1 {
  double nu = 0.0;
  double rho = 0.0;
  double eta = 0.0;
  double xi = 0.0;
};

struct CoeffsAlg2 {
  double alpha_tilde = 0.0;
  double eta = 0.0;
  double xi = 0.0;
  /// coefficient of the second-difference term; nonnegativity is the
  /// structural half of the double-inertial condition
  double quasi_fejer = 0.0;
};

/// Coefficients of the inertial-relaxed descent inequality at index n.
/// Index -1 values of zeta and alpha are taken equal to their index-0
/// values.
CoeffsAlg1 coeffs_alg1(const ProblemConstants& c, const ScalarSeq& alpha,
                       int n);

CoeffsAlg2 coeffs_alg2(const ProblemConstants& c, const ScalarSeq& alpha,
                       const ScalarSeq& beta, const ScalarSeq& theta, int n);

struct CertificateRow {
  int n = 0;
  double rho = 0.0;
  double nu = 0.0;
  double eta = 0.0;
  double xi_next = 0.0;
  double margin = 0.0;  // eta_n - xi_{n+1} - epsilon
};

struct Certificate {
  bool ok = false;
  std::string method;
  std::vector<CertificateRow> per_n;
  std::optional<std::pair<int, std::string>> first_violation;
  double min_margin = 0.0;  // min over rows of eta_n - xi_{n+1}
  /// derived constants worth surfacing (the PDBTR path reports its
  /// product-space cocoercivity and Lipschitz moduli here)
  std::vector<std::pair<std::string, double>> derived;

  std::string render_text() const;
  std::string render_kv() const;
};

/// Check the inertial-relaxed conditions (rho_n >= 0 and
/// eta_n - xi_{n+1} >= epsilon) for n in [n0, n0+horizon), plus the
/// monotonicity preconditions on alpha (and on xi when lambda < 1) and a
/// stationary tail row evaluated with the values at n0+horizon.
Certificate certify_alg1(const ProblemConstants& c, const ScalarSeq& alpha,
                         int n0, int horizon);

/// Constant-parameter shortcut: single stationary inequality.
Certificate certify_alg1_constant(const ProblemConstants& c, double alpha);

Certificate certify_alg2(const ProblemConstants& c, const ScalarSeq& alpha,
                         const ScalarSeq& beta, const ScalarSeq& theta, int n0,
                         int horizon);

Certificate certify_alg2_constant(const ProblemConstants& c, double alpha,
                                  double beta, double theta);

/// Safety factor applied by the closed-form parameter tables.
inline constexpr double kTableSafety = 0.99;

enum class TableMethod { FHRB, FHRBSI, FHRBI, FHRBDI, FHRBSDI, FHRBRI };

struct TableParams {
  double alpha = 0.0;
  double beta = 0.0;
  double theta = 0.0;
  double lambda = 1.0;
};

/// Closed-form maximal parameters, scaled by the per-case fraction and the
/// 0.99 safety factor. Cases run 1..3 (1..4 for FHRBRI; FHRB and FHRBSDI
/// have a single case). beta defaults to 1 for the double-inertial rows.
TableParams table_params(TableMethod method, int case_index, double gamma,
                         double mu, double zeta,
                         std::optional<double> beta = std::nullopt,
                         double safety = kTableSafety);

TableMethod table_method_from_string(const std::string& name);
std::string to_string(TableMethod m);

/// Margins of the defining inequality of each closed-form table parameter
/// (positive = satisfied strictly, zero = saturated). These are the
/// inequalities whose exact roots the table formulas rescale by 0.99.
double margin_theta1(double theta, double gamma, double mu, double zeta);
double margin_alpha1(double alpha, double gamma, double mu, double zeta);
double margin_alpha2(double alpha, double beta, double gamma, double mu,
                     double zeta);
double margin_theta2(double theta, double beta, double gamma, double mu,
                     double zeta);
double margin_lambda1(double lambda, double alpha, double gamma, double mu,
                      double zeta);

/// Constants for the closed-form special cases.
struct SpecialConstants {
  double alpha = 0.0;
  double beta = 0.0;   // double-inertial variants only
  double theta = 0.0;  // double-inertial variants only
  double lambda = 1.0;
  double gamma = 1.0;
  double mu = 1.0;
  double zeta = 0.0;  // Lipschitz constant of the explicit monotone operator
  // primal-dual geometry (PDBTR only)
  double sigma = 0.0;
  double tau = 0.0;
  double norm_L = 0.0;
};

enum class SpecialMethod { FB, FHRB, FHRB_DI, PDBTR };

SpecialMethod special_method_from_string(const std::string& name);

/// Closed-form convergence check for the named instantiation. The FHRB and
/// PDBTR paths evaluate the generic coefficients with the instance's
/// effective constants, so their verdicts agree with certify_alg1 /
/// certify_alg2 by construction. The PDBTR certificate also reports the
/// derived constants of the product-space geometry (effective cocoercivity
/// mu*kappa and momentum Lipschitz constant tau*zeta/kappa).
Certificate certify_special(SpecialMethod method, const SpecialConstants& k);

}  // namespace nfbm
