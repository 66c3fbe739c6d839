#include "nfbm/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace nfbm {

namespace {

void require_lambda(double lambda) {
  if (!(lambda > 0.0 && lambda < 2.0))
    throw parameter_error("relaxation parameter must lie in (0,2), got " +
                          std::to_string(lambda));
}

double zeta_prev(const ProblemConstants& c, int n) {
  return n >= 1 ? c.zeta(n - 1) : c.zeta(0);
}

// Strict "> 0" inequalities are accepted at >= 1e-12 absolute.
constexpr double kStrictFloor = 1e-12;

}  // namespace

CoeffsAlg1 coeffs_alg1(const ProblemConstants& c, const ScalarSeq& alpha,
                       int n) {
  require_lambda(c.lambda);
  const double lam = c.lambda;
  const double zn = c.zeta(n);
  const double zp = zeta_prev(c, n);
  const double a = alpha(n);
  CoeffsAlg1 k;
  k.nu = (c.t_neg_monotone && lam >= 1.0) ? zp : 2.0 * zn + zp;
  k.rho = 2.0 - lam - std::abs(1.0 - lam) * k.nu - c.gamma(n) / (2.0 * c.mu) -
          (1.0 + std::abs(1.0 - lam)) * zn;
  k.eta = (1.0 - a) * k.rho / lam - lam * zp;
  k.xi = a * (1.0 + a) + a * (1.0 - a) * k.rho / lam;
  return k;
}

CoeffsAlg2 coeffs_alg2(const ProblemConstants& c, const ScalarSeq& alpha,
                       const ScalarSeq& beta, const ScalarSeq& theta, int n) {
  const double zn = c.zeta(n);
  const double zp = zeta_prev(c, n);
  const double g = c.gamma(n);
  const double a = alpha(n);
  const double b = beta(n);
  const double t = theta(n);
  CoeffsAlg2 k;
  k.alpha_tilde = a + t;
  k.eta = 1.0 - k.alpha_tilde - g * (1.0 - b) / (2.0 * c.mu) -
          zn * (1.0 - a) - zp;
  k.xi = 2.0 * k.alpha_tilde - g * b * (1.0 - b) / (2.0 * c.mu) -
         zn * a * (1.0 - a);
  k.quasi_fejer = k.alpha_tilde - g * b / (2.0 * c.mu) - zn * a;
  return k;
}

namespace {

void push_violation(Certificate& cert, int n, const std::string& name) {
  cert.ok = false;
  if (!cert.first_violation) cert.first_violation = {n, name};
}

Certificate certify_alg1_impl(const ProblemConstants& c,
                              const ScalarSeq& alpha, int n0, int horizon,
                              bool stationary) {
  require_lambda(c.lambda);
  Certificate cert;
  cert.ok = true;
  cert.method = "alg1";
  cert.min_margin = std::numeric_limits<double>::infinity();

  auto check_row = [&](int n, int n_next) {
    const CoeffsAlg1 kn = coeffs_alg1(c, alpha, n);
    const CoeffsAlg1 knext = coeffs_alg1(c, alpha, n_next);
    CertificateRow row;
    row.n = n;
    row.nu = kn.nu;
    row.rho = kn.rho;
    row.eta = kn.eta;
    row.xi_next = knext.xi;
    row.margin = kn.eta - knext.xi - c.epsilon_margin;
    cert.per_n.push_back(row);
    cert.min_margin = std::min(cert.min_margin, kn.eta - knext.xi);
    if (!(c.zeta(n) < 1.0)) push_violation(cert, n, "zeta < 1");
    if (kn.rho < 0.0) push_violation(cert, n, "rho >= 0");
    if (row.margin < 0.0) push_violation(cert, n, "eta - xi_next >= eps");
  };

  if (stationary) {
    check_row(n0, n0);
    return cert;
  }
  for (int n = n0; n < n0 + horizon; ++n) {
    check_row(n, n + 1);
    if (alpha(n + 1) < alpha(n) - 1e-15)
      push_violation(cert, n, "alpha non-decreasing");
    if (c.lambda < 1.0) {
      const double xi_n = coeffs_alg1(c, alpha, n).xi;
      const double xi_next = coeffs_alg1(c, alpha, n + 1).xi;
      if (xi_next < xi_n - 1e-15)
        push_violation(cert, n, "xi non-decreasing (lambda < 1)");
    }
  }
  // stationary tail at the horizon values
  check_row(n0 + horizon, n0 + horizon);
  return cert;
}

Certificate certify_alg2_impl(const ProblemConstants& c,
                              const ScalarSeq& alpha, const ScalarSeq& beta,
                              const ScalarSeq& theta, int n0, int horizon,
                              bool stationary) {
  Certificate cert;
  cert.ok = true;
  cert.method = "alg2";
  cert.min_margin = std::numeric_limits<double>::infinity();

  auto check_row = [&](int n, int n_next) {
    const CoeffsAlg2 kn = coeffs_alg2(c, alpha, beta, theta, n);
    const CoeffsAlg2 knext = coeffs_alg2(c, alpha, beta, theta, n_next);
    CertificateRow row;
    row.n = n;
    row.rho = kn.quasi_fejer;  // structural coefficient in the rho slot
    row.eta = kn.eta;
    row.xi_next = knext.xi;
    row.margin = kn.eta - knext.xi - c.epsilon_margin;
    cert.per_n.push_back(row);
    cert.min_margin = std::min(cert.min_margin, kn.eta - knext.xi);
    if (!(c.zeta(n) < 1.0)) push_violation(cert, n, "zeta < 1");
    if (kn.quasi_fejer < 0.0)
      push_violation(cert, n, "alpha~ - gamma*beta/(2mu) - zeta*alpha >= 0");
    if (row.margin < 0.0) push_violation(cert, n, "eta - xi_next >= eps");
  };

  if (stationary) {
    check_row(n0, n0);
    return cert;
  }
  for (int n = n0; n < n0 + horizon; ++n) {
    check_row(n, n + 1);
    const double at_n = alpha(n) + theta(n);
    const double at_next = alpha(n + 1) + theta(n + 1);
    if (at_next < at_n - 1e-15)
      push_violation(cert, n, "alpha~ non-decreasing");
  }
  check_row(n0 + horizon, n0 + horizon);
  return cert;
}

}  // namespace

Certificate certify_alg1(const ProblemConstants& c, const ScalarSeq& alpha,
                         int n0, int horizon) {
  if (horizon < 1) throw parameter_error("certify_alg1: horizon >= 1");
  return certify_alg1_impl(c, alpha, n0, horizon, false);
}

Certificate certify_alg1_constant(const ProblemConstants& c, double alpha) {
  return certify_alg1_impl(c, constant_seq(alpha), 0, 0, true);
}

Certificate certify_alg2(const ProblemConstants& c, const ScalarSeq& alpha,
                         const ScalarSeq& beta, const ScalarSeq& theta, int n0,
                         int horizon) {
  if (horizon < 1) throw parameter_error("certify_alg2: horizon >= 1");
  return certify_alg2_impl(c, alpha, beta, theta, n0, horizon, false);
}

Certificate certify_alg2_constant(const ProblemConstants& c, double alpha,
                                  double beta, double theta) {
  return certify_alg2_impl(c, constant_seq(alpha), constant_seq(beta),
                           constant_seq(theta), 0, 0, true);
}

// ---------------------------------------------------------------------------
// Closed-form table parameters
// ---------------------------------------------------------------------------

namespace {

double checked_root(double radicand, const std::string& quantity) {
  if (radicand < 0.0)
    throw infeasible_error(quantity, "negative radicand " +
                                         std::to_string(radicand));
  return std::sqrt(radicand);
}

double checked_positive(double value, const std::string& quantity) {
  if (value < 0.0)
    throw infeasible_error(quantity,
                           "negative value " + std::to_string(value));
  return value;
}

double theta1_formula(double gamma, double mu, double zeta, double safety) {
  const double gt = gamma * (zeta + 1.0 / (2.0 * mu));
  return checked_positive((safety / 3.0) * (1.0 - gt - zeta * gamma),
                          "theta1");
}

double alpha1_formula(double gamma, double mu, double zeta, double safety) {
  const double gt = gamma * (zeta + 1.0 / (2.0 * mu));
  const double zg = zeta * gamma;
  const double rad = (3.0 - 2.0 * gt) * (3.0 - 2.0 * gt) +
                     4.0 * (1.0 - zg - gt) * gt;
  const double a =
      (safety / (2.0 * gt)) * (2.0 * gt - 3.0 + checked_root(rad, "alpha1"));
  return checked_positive(a, "alpha1");
}

double alpha2_formula(double beta, double gamma, double mu, double zeta,
                      double safety) {
  const double zg = zeta * gamma;
  const double rad =
      (3.0 - 2.0 * zg) * (3.0 - 2.0 * zg) +
      4.0 * zg *
          (1.0 - 2.0 * zg - (1.0 - beta) * (1.0 - beta) * gamma / (2.0 * mu));
  const double a =
      (safety / (2.0 * zg)) * (2.0 * zg - 3.0 + checked_root(rad, "alpha2"));
  return checked_positive(a, "alpha2");
}

double theta2_formula(double beta, double gamma, double mu, double zeta,
                      double safety) {
  const double t =
      safety *
      (1.0 - gamma * (1.0 - beta) * (1.0 - beta) / (2.0 * mu) -
       2.0 * zeta * gamma) /
      3.0;
  return checked_positive(t, "theta2");
}

double lambda1_formula(double alpha, double gamma, double mu, double zeta,
                       double safety) {
  const double zg = zeta * gamma;
  const double b = 1.0 + 2.0 * zg + alpha * (1.0 + alpha);
  const double cc = 2.0 + zg - gamma / (2.0 * mu);
  const double rad = b * b + 4.0 * zg * cc;
  const double lam =
      (safety / (2.0 * zg)) * (checked_root(rad, "lambda1") - b);
  return checked_positive(lam, "lambda1");
}

}  // namespace

TableParams table_params(TableMethod method, int case_index, double gamma,
                         double mu, double zeta, std::optional<double> beta,
                         double safety) {
  if (!(gamma > 0.0 && mu > 0.0 && zeta > 0.0))
    throw parameter_error("table_params: gamma, mu, zeta must be positive");
  TableParams p;
  const double third = static_cast<double>(case_index) / 3.0;
  switch (method) {
    case TableMethod::FHRB:
      if (case_index != 1) throw parameter_error("FHRB has a single case");
      return p;
    case TableMethod::FHRBSI:
      if (case_index < 1 || case_index > 3)
        throw parameter_error("FHRBSI case must be 1..3");
      p.theta = third * theta1_formula(gamma, mu, zeta, safety);
      return p;
    case TableMethod::FHRBI:
      if (case_index < 1 || case_index > 3)
        throw parameter_error("FHRBI case must be 1..3");
      p.alpha = third * alpha1_formula(gamma, mu, zeta, safety);
      return p;
    case TableMethod::FHRBDI: {
      if (case_index < 1 || case_index > 3)
        throw parameter_error("FHRBDI case must be 1..3");
      p.beta = beta.value_or(1.0);
      p.alpha = third * alpha2_formula(p.beta, gamma, mu, zeta, safety);
      return p;
    }
    case TableMethod::FHRBSDI: {
      if (case_index != 1) throw parameter_error("FHRBSDI has a single case");
      p.beta = beta.value_or(1.0);
      p.theta = theta2_formula(p.beta, gamma, mu, zeta, safety);
      return p;
    }
    case TableMethod::FHRBRI: {
      if (case_index < 1 || case_index > 4)
        throw parameter_error("FHRBRI case must be 1..4");
      static constexpr double kScale[4] = {0.75, 0.5, 0.25, 0.0};
      p.alpha = kScale[case_index - 1] * alpha1_formula(gamma, mu, zeta, safety);
      p.lambda = lambda1_formula(p.alpha, gamma, mu, zeta, safety);
      return p;
    }
  }
  throw parameter_error("table_params: unknown method");
}

TableMethod table_method_from_string(const std::string& name) {
  if (name == "FHRB") return TableMethod::FHRB;
  if (name == "FHRBSI") return TableMethod::FHRBSI;
  if (name == "FHRBI") return TableMethod::FHRBI;
  if (name == "FHRBDI") return TableMethod::FHRBDI;
  if (name == "FHRBSDI") return TableMethod::FHRBSDI;
  if (name == "FHRBRI") return TableMethod::FHRBRI;
  throw parameter_error("unknown method name: " + name);
}

std::string to_string(TableMethod m) {
  switch (m) {
    case TableMethod::FHRB: return "FHRB";
    case TableMethod::FHRBSI: return "FHRBSI";
    case TableMethod::FHRBI: return "FHRBI";
    case TableMethod::FHRBDI: return "FHRBDI";
    case TableMethod::FHRBSDI: return "FHRBSDI";
    case TableMethod::FHRBRI: return "FHRBRI";
  }
  return "?";
}

double margin_theta1(double theta, double gamma, double mu, double zeta) {
  return 1.0 - 3.0 * theta - gamma / (2.0 * mu) - 2.0 * zeta * gamma;
}

double margin_alpha1(double alpha, double gamma, double mu, double zeta) {
  const double zg = zeta * gamma;
  return (1.0 - alpha) * (1.0 - alpha) * (1.0 - zg - gamma / (2.0 * mu)) -
         zg - alpha * (1.0 + alpha);
}

double margin_alpha2(double alpha, double beta, double gamma, double mu,
                     double zeta) {
  const double zg = zeta * gamma;
  return 1.0 - 3.0 * alpha -
         gamma * (1.0 - beta) * (1.0 - beta) / (2.0 * mu) - zg -
         zg * (1.0 - alpha) * (1.0 - alpha);
}

double margin_theta2(double theta, double beta, double gamma, double mu,
                     double zeta) {
  return 1.0 - 3.0 * theta -
         gamma * (1.0 - beta) * (1.0 - beta) / (2.0 * mu) -
         2.0 * zeta * gamma;
}

double margin_lambda1(double lambda, double alpha, double gamma, double mu,
                      double zeta) {
  const double zg = zeta * gamma;
  return 2.0 + zg - gamma / (2.0 * mu) -
         (1.0 + 2.0 * zg + alpha * (1.0 + alpha)) * lambda -
         zg * lambda * lambda;
}

// ---------------------------------------------------------------------------
// Closed-form special cases
// ---------------------------------------------------------------------------

SpecialMethod special_method_from_string(const std::string& name) {
  if (name == "FB") return SpecialMethod::FB;
  if (name == "FHRB") return SpecialMethod::FHRB;
  if (name == "FHRB-DI") return SpecialMethod::FHRB_DI;
  if (name == "PDBTR") return SpecialMethod::PDBTR;
  throw parameter_error("unknown special method: " + name);
}

namespace {

Certificate one_row_cert(const std::string& method, double margin,
                         const std::string& name) {
  Certificate cert;
  cert.method = method;
  cert.ok = margin >= kStrictFloor;
  CertificateRow row;
  row.margin = margin;
  cert.per_n.push_back(row);
  cert.min_margin = margin;
  if (!cert.ok) cert.first_violation = {0, name};
  return cert;
}

}  // namespace

Certificate certify_special(SpecialMethod method, const SpecialConstants& k) {
  switch (method) {
    case SpecialMethod::FB: {
      require_lambda(k.lambda);
      const double m = (1.0 - k.alpha) * (1.0 - k.alpha) *
                           (2.0 - k.lambda - k.gamma / (2.0 * k.mu)) /
                           k.lambda -
                       k.alpha * (1.0 + k.alpha);
      return one_row_cert("FB", m, "(1-a)^2/l*(2-l-g/2mu) - a(1+a) > 0");
    }
    case SpecialMethod::FHRB: {
      ProblemConstants c;
      c.mu = k.mu;
      c.zeta = constant_seq(k.zeta * k.gamma);
      c.gamma = constant_seq(k.gamma);
      c.lambda = k.lambda;
      c.t_neg_monotone = true;
      c.epsilon_margin = kStrictFloor;
      Certificate cert = certify_alg1_constant(c, k.alpha);
      cert.method = "FHRB";
      return cert;
    }
    case SpecialMethod::FHRB_DI: {
      ProblemConstants c;
      c.mu = k.mu;
      c.zeta = constant_seq(k.zeta * k.gamma);
      c.gamma = constant_seq(k.gamma);
      c.lambda = 1.0;
      c.t_neg_monotone = true;
      c.epsilon_margin = kStrictFloor;
      Certificate cert = certify_alg2_constant(c, k.alpha, k.beta, k.theta);
      cert.method = "FHRB-DI";
      return cert;
    }
    case SpecialMethod::PDBTR: {
      const double kappa = 1.0 - k.sigma * k.tau * k.norm_L * k.norm_L;
      if (!(kappa > 0.0))
        throw metric_error(
            "PDBTR metric not strongly monotone: 1 - sigma*tau*||L||^2 = " +
            std::to_string(kappa));
      ProblemConstants c;
      c.mu = k.mu * kappa;           // effective cocoercivity in the S-geometry
      c.zeta = constant_seq(k.tau * k.zeta / kappa);
      c.gamma = constant_seq(k.tau);
      c.lambda = k.lambda;
      c.t_neg_monotone = true;
      c.epsilon_margin = kStrictFloor;
      Certificate cert = certify_alg1_constant(c, k.alpha);
      cert.method = "PDBTR";
      cert.derived.emplace_back("pd_kappa", kappa);
      cert.derived.emplace_back("cocoercivity_wrt_S", k.mu * kappa);
      cert.derived.emplace_back("momentum_lipschitz_wrt_S",
                                k.tau * k.zeta / kappa);
      return cert;
    }
  }
  throw parameter_error("certify_special: unknown method");
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

std::string Certificate::render_text() const {
  std::ostringstream os;
  os << "certificate " << method << ": " << (ok ? "OK" : "VIOLATED") << "\n";
  for (const auto& row : per_n) {
    os << "  n=" << row.n << " rho=" << row.rho << " nu=" << row.nu
       << " eta=" << row.eta << " xi_next=" << row.xi_next
       << " margin=" << row.margin << "\n";
  }
  if (first_violation)
    os << "  first violation: n=" << first_violation->first << " ["
       << first_violation->second << "]\n";
  for (const auto& [name, value] : derived)
    os << "  " << name << " = " << value << "\n";
  os << "  min(eta - xi_next) = " << min_margin << "\n";
  return os.str();
}

std::string Certificate::render_kv() const {
  std::ostringstream os;
  os << "method=" << method << "\n";
  os << "ok=" << (ok ? 1 : 0) << "\n";
  os << "min_margin=" << min_margin << "\n";
  os << "rows=" << per_n.size() << "\n";
  if (first_violation) {
    os << "violation_n=" << first_violation->first << "\n";
    os << "violation=" << first_violation->second << "\n";
  }
  for (const auto& [name, value] : derived) os << name << "=" << value << "\n";
  return os.str();
}

}  // namespace nfbm
