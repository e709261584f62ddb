#include "kyleot/market.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "kyleot/filtering.hpp"
#include "kyleot/gauss_hermite.hpp"

namespace kyleot {

const char* family_name(FamilyTag tag) {
  switch (tag) {
    case FamilyTag::kLinear: return "linear";
    case FamilyTag::kActivist: return "activist";
    case FamilyTag::kLinearQuadratic: return "linquad";
  }
  return "?";
}

SurplusFamily SurplusFamily::linear(ScalarFunction f) {
  SurplusFamily fam;
  fam.tag = FamilyTag::kLinear;
  fam.payoff = std::move(f);
  return fam;
}

SurplusFamily SurplusFamily::activist(ScalarFunction V) {
  SurplusFamily fam;
  fam.tag = FamilyTag::kActivist;
  fam.reward = std::move(V);
  return fam;
}

SurplusFamily SurplusFamily::linear_quadratic(double psi) {
  if (psi < 0.0) throw std::invalid_argument("linear_quadratic: psi must be >= 0");
  SurplusFamily fam;
  fam.tag = FamilyTag::kLinearQuadratic;
  fam.psi = psi;
  return fam;
}

double SurplusFamily::terminal_payoff(double x, double s) const {
  double v = 0.0;
  switch (tag) {
    case FamilyTag::kLinear: v = x * payoff(s); break;
    case FamilyTag::kActivist: v = reward(x); break;
    case FamilyTag::kLinearQuadratic: v = 0.5 * psi * x * x + x * s; break;
  }
  if (!std::isfinite(v)) throw std::domain_error("terminal payoff is not finite");
  return v;
}

double SurplusFamily::marginal_payoff(double x, double s) const {
  double v = 0.0;
  switch (tag) {
    case FamilyTag::kLinear: v = payoff(s); break;
    case FamilyTag::kActivist: v = reward.derivative(x); break;
    case FamilyTag::kLinearQuadratic: v = psi * x + s; break;
  }
  if (!std::isfinite(v)) throw std::domain_error("marginal payoff is not finite");
  return v;
}

double SurplusFamily::surplus(double zt, double s, double y) const { return terminal_payoff(y - zt, s); }

double SurplusFamily::surplus_dy(double zt, double s, double y) const { return marginal_payoff(y - zt, s); }

bool SurplusFamily::has_analytic_derivative() const {
  switch (tag) {
    case FamilyTag::kLinear: return true;  // d/dy of (y-zt) f(s) is f(s)
    case FamilyTag::kActivist: return reward.has_analytic_derivative();
    case FamilyTag::kLinearQuadratic: return true;
  }
  return false;
}

FamilyScalars family_scalars(const MarketParams& params, const SurplusFamily& family) {
  FamilyScalars out;
  const double sig2T = params.sigma * params.sigma * params.T;
  switch (family.tag) {
    case FamilyTag::kLinear:
      out.lambda = std::sqrt(params.signal_var_total() / sig2T);
      break;
    case FamilyTag::kActivist:
      out.lambda = std::sqrt(1.0 + params.sigma_beta * params.sigma_beta / sig2T);
      break;
    case FamilyTag::kLinearQuadratic: {
      const double lam2 = params.signal_var_total() / sig2T;
      const double lt2 = (sig2T + params.sigma_beta * params.sigma_beta) / sig2T;
      out.lambda = std::sqrt(lam2);
      out.lambda_tilde = std::sqrt(lt2);
      out.eps = 1.0 / std::sqrt(family.psi * family.psi * lt2 + lam2);
      break;
    }
  }
  return out;
}

std::string ValidationReport::summary() const {
  if (ok()) return "valid";
  std::ostringstream os;
  for (const auto& v : violations) os << "[" << v.code << "] " << v.message << " (blocks: " << v.blocks << ")\n";
  return os.str();
}

namespace {

void check_basics(const MarketParams& p, ValidationReport& report) {
  auto bad = [&](const std::string& code, const std::string& msg) {
    report.violations.push_back({code, msg, "all operations"});
  };
  if (!(p.T > 0.0)) bad("horizon", "T must be positive");
  if (!(p.sigma > 0.0)) bad("noise_vol", "sigma must be positive");
  if (p.Sigma0 < 0.0) bad("prior_std", "Sigma0 must be nonnegative");
  if (p.sigma_beta < 0.0) bad("endowment_std", "sigma_beta must be nonnegative");
  if (!p.sigma_s.nonnegative()) bad("signal_vol", "sigma_s must be nonnegative");
}

// The linear closed forms need v(t) = ((T-t)/T) Sigma_T^2 - int_t^T sigma_r^2 dr > 0
// on [0,T). v is piecewise linear with v(T)=0, so positivity holds iff v > 0 at
// every breakpoint below T and the final piece approaches 0 from above.
void check_linear(const MarketParams& p, ValidationReport& report) {
  const double SigT2 = p.signal_var_total();
  if (!(SigT2 > 0.0)) {
    report.violations.push_back({"degenerate_signal", "Sigma_T = 0: no terminal signal to price",
                                 "solve_linear, closed_form_law, rate"});
    return;
  }
  auto v = [&](double t) { return (p.T - t) / p.T * SigT2 - p.signal_var_tail(t); };
  for (double tb : p.sigma_s.breakpoints()) {
    if (tb >= p.T) continue;
    if (!(v(tb) > 0.0)) {
      std::ostringstream os;
      os << "filter variance condition fails at t = " << tb << " (int_t^T sigma_r^2 dr >= ((T-t)/T) Sigma_T^2)";
      report.violations.push_back({"negativity_condition", os.str(), "closed_form_law, rate, simulate"});
      return;
    }
  }
  const double last_val = p.sigma_s.at(p.T * (1.0 - 1e-12));
  if (!(last_val * last_val < SigT2 / p.T)) {
    report.violations.push_back({"negativity_condition",
                                 "filter variance condition fails approaching T (terminal sigma_s too large)",
                                 "closed_form_law, rate, simulate"});
  }
}

void check_linear_payoff(const MarketParams& p, const SurplusFamily& fam, ValidationReport& report) {
  if (!fam.payoff.valid()) {
    report.violations.push_back({"payoff_missing", "linear family needs a payoff function f", "all operations"});
    return;
  }
  const double span = 5.0 * std::sqrt(std::max(p.signal_var_total(), 1e-12)) + 1.0;
  for (int i = 0; i <= 40; ++i) {
    const double s = -span + 2.0 * span * i / 40.0;
    double val, der;
    try {
      val = fam.payoff(s);
      der = fam.payoff.derivative(s);
    } catch (...) {
      report.violations.push_back({"payoff_overflow", "f not evaluable on the sampled signal range", "all operations"});
      return;
    }
    if (!std::isfinite(val) || !std::isfinite(der)) {
      report.violations.push_back({"payoff_overflow", "f or f' overflows on the sampled signal range", "all operations"});
      return;
    }
    if (der < -1e-9) {
      std::ostringstream os;
      os << "f must be monotone increasing; f'(" << s << ") = " << der;
      report.violations.push_back({"payoff_monotonicity", os.str(), "solve_linear"});
      return;
    }
  }
}

void check_activist(const MarketParams& p, const SurplusFamily& fam, ValidationReport& report) {
  if (!fam.reward.valid()) {
    report.violations.push_back({"reward_missing", "activist family needs a reward function V", "all operations"});
    return;
  }
  if (!(p.sigma_beta > 0.0)) {
    report.violations.push_back({"singular_map",
                                 "sigma_beta = 0 makes lambda = 1: the strategy denominator lambda - 1 vanishes "
                                 "and the decreasing coupling degenerates",
                                 "solve_activist, rate"});
  }
  const FamilyScalars sc = family_scalars(p, fam);
  const double span = (1.0 + sc.lambda) * p.sigma * std::sqrt(p.T) * 5.0 + std::abs(p.m_beta) + 1.0;
  double prev_der = -1e300;
  for (int i = 0; i <= 40; ++i) {
    const double x = -span + 2.0 * span * i / 40.0;
    double val, der;
    try {
      val = fam.reward(x);
      der = fam.reward.derivative(x);
    } catch (...) {
      report.violations.push_back({"reward_overflow", "V not evaluable on the sampled range", "all operations"});
      return;
    }
    if (!std::isfinite(val) || !std::isfinite(der)) {
      report.violations.push_back({"reward_overflow", "V or V' overflows on the sampled range", "all operations"});
      return;
    }
    if (der < prev_der - 1e-9 * (1.0 + std::abs(der))) {
      std::ostringstream os;
      os << "V' must be nondecreasing (V convex); violated near x = " << x;
      report.violations.push_back({"reward_convexity", os.str(), "solve_activist"});
      return;
    }
    prev_der = der;
  }
}

void check_linquad(const MarketParams& p, const SurplusFamily& fam, ValidationReport& report) {
  if (fam.psi < 0.0) {
    report.violations.push_back({"psi_sign", "psi must be positive", "all operations"});
    return;
  }
  // Covariance of the filtered state must stay positive definite on (0,T):
  // leading entry > 0 and determinant K_t > 0, scanned on an interior grid.
  const int n = 1000;
  for (int i = 0; i < n; ++i) {
    const double t = p.T * (i + 1.0) / (n + 1.0);
    const Mat2 cov = linquad_filter_cov(p, fam.psi, t);
    if (!(cov.xx > 0.0)) {
      std::ostringstream os;
      os << "filter variance entry nonpositive at t = " << t;
      report.violations.push_back({"linquad_variance", os.str(), "closed_form_law, rate, simulate"});
      return;
    }
    if (!(cov.det() > 0.0)) {
      std::ostringstream os;
      os << "K_t = " << cov.det() << " <= 0 at t = " << t;
      report.violations.push_back({"linquad_K", os.str(), "closed_form_law, rate, simulate"});
      return;
    }
  }
}

}  // namespace

ValidationReport validate(const MarketParams& params, const SurplusFamily& family) {
  ValidationReport report;
  check_basics(params, report);
  if (!report.ok()) return report;
  switch (family.tag) {
    case FamilyTag::kLinear:
      check_linear(params, report);
      check_linear_payoff(params, family, report);
      break;
    case FamilyTag::kActivist:
      check_activist(params, family, report);
      break;
    case FamilyTag::kLinearQuadratic:
      check_linquad(params, family, report);
      break;
  }
  return report;
}

}  // namespace kyleot
