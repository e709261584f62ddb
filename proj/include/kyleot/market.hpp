#pragma once

#include <string>
#include <vector>

#include "kyleot/scalar_function.hpp"
#include "kyleot/schedule.hpp"

namespace kyleot {

enum class FamilyTag { kLinear, kActivist, kLinearQuadratic };

const char* family_name(FamilyTag tag);

// Market primitives: horizon T, noise-trade volatility sigma, signal
// volatility schedule sigma_s on [0,T], prior signal std Sigma0, endowment
// mean/std (m_beta, sigma_beta). Immutable after construction.
struct MarketParams {
  double T = 1.0;
  double sigma = 1.0;
  PiecewiseConstantSchedule sigma_s;
  double Sigma0 = 1.0;
  double m_beta = 0.0;
  double sigma_beta = 0.0;

  // Sigma_t^2 = Sigma0^2 + int_0^t sigma_r^2 dr, exact on the schedule.
  double signal_var_at(double t) const { return Sigma0 * Sigma0 + sigma_s.integral_sq(0.0, t); }
  double signal_var_total() const { return signal_var_at(T); }
  double signal_var_tail(double t) const { return sigma_s.integral_sq(t, T); }
  double noise_var(double t) const { return sigma * sigma * t; }
  // Var(Z_t - beta) = sigma^2 t + sigma_beta^2.
  double shifted_noise_var(double t) const { return sigma * sigma * t + sigma_beta * sigma_beta; }
};

// Tagged terminal-payoff family. The surplus is S(zt, s, y) = V(y - zt, s):
//   Linear:          V(x, s) = x * f(s)
//   Activist:        V(x, s) = V(x), convex
//   LinearQuadratic: V(x, s) = psi x^2 / 2 + x s, psi > 0 (psi = 0 admitted
//                    as the degenerate boundary, which reduces to Linear f=id).
struct SurplusFamily {
  FamilyTag tag = FamilyTag::kLinear;
  ScalarFunction payoff;  // f, Linear only
  ScalarFunction reward;  // V, Activist only
  double psi = 0.0;       // LinearQuadratic only

  static SurplusFamily linear(ScalarFunction f);
  static SurplusFamily activist(ScalarFunction V);
  static SurplusFamily linear_quadratic(double psi);

  double terminal_payoff(double x, double s) const;   // V(x, s)
  double marginal_payoff(double x, double s) const;   // d/dx V(x, s)
  double surplus(double zt, double s, double y) const;
  double surplus_dy(double zt, double s, double y) const;
  bool has_analytic_derivative() const;
};

// Scalars shared by the transport, filtering and strategy closed forms.
// lambda/lambda_tilde/eps are family-dependent:
//   Linear:          lambda = Sigma_T / (sigma sqrt(T))
//   Activist:        lambda = sqrt(1 + sigma_beta^2 / (sigma^2 T))
//   LinearQuadratic: lambda^2 = Sigma_T^2/(sigma^2 T),
//                    lambda_tilde^2 = (sigma^2 T + sigma_beta^2)/(sigma^2 T),
//                    eps = 1/sqrt(psi^2 lambda_tilde^2 + lambda^2)
struct FamilyScalars {
  double lambda = 0.0;
  double lambda_tilde = 0.0;
  double eps = 0.0;
};

FamilyScalars family_scalars(const MarketParams& params, const SurplusFamily& family);

struct ValidationReport {
  struct Violation {
    std::string code;     // short machine-readable tag
    std::string message;  // human-readable description
    std::string blocks;   // which library operation becomes unavailable
  };
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  std::string summary() const;
};

// Aggregates every precondition of the closed forms for the given family.
// Report-style: never throws on a violated precondition.
ValidationReport validate(const MarketParams& params, const SurplusFamily& family);

}  // namespace kyleot
