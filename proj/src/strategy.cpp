#include "kyleot/strategy.hpp"

#include <cmath>
#include <stdexcept>

#include "kyleot/errors.hpp"

namespace kyleot {
namespace {

// Coefficients are singular at t = 0 when the initial state is degenerate
// (sigma_beta = 0 pins zt exactly); evaluating at a floor time gives the
// correct limit because the divergent terms multiply exact zeros on-path.
constexpr double kTimeFloorFraction = 1e-12;

}  // namespace

StrategyCoefficients::StrategyCoefficients(const MarketParams& params, const SurplusFamily& family)
    : params_(params), family_(family), scalars_(family_scalars(params, family)) {
  const ValidationReport report = validate(params, family);
  if (!report.ok()) throw PreconditionError("strategy coefficients invalid: " + report.summary());
}

double StrategyCoefficients::gain(double t) const {
  if (family_.tag != FamilyTag::kLinear) throw std::invalid_argument("gain: linear family only");
  const double denom = linear_filter_var(params_, t);
  if (!(denom > 0.0)) throw PreconditionError("gain: nonpositive filter variance");
  return params_.sigma * params_.sigma * scalars_.lambda / denom;
}

double StrategyCoefficients::K(double t) const {
  if (family_.tag != FamilyTag::kLinearQuadratic) throw std::invalid_argument("K: linquad family only");
  return linquad_filter_cov(params_, family_.psi, t).det();
}

std::array<double, 3> StrategyCoefficients::abc(double t) const {
  if (family_.tag != FamilyTag::kLinearQuadratic) throw std::invalid_argument("abc: linquad family only");
  const double sig2 = params_.sigma * params_.sigma;
  const double T = params_.T;
  const double psi = family_.psi;
  const double lam2 = scalars_.lambda * scalars_.lambda;
  const double lt2 = scalars_.lambda_tilde * scalars_.lambda_tilde;
  const double eps = scalars_.eps;
  const double SigT2 = params_.signal_var_total();
  const double Sig_t2 = params_.signal_var_at(t);
  const double Kt = K(t);
  const double one = 1.0 + eps * psi * lt2;
  const double a0 = -(sig2 / Kt) * (eps * psi * lt2 * (sig2 * lam2 * T - SigT2 + Sig_t2) * one +
                                    sig2 * eps * eps * lam2 * lam2 * ((lt2 - 1.0) * T + t));
  const double a1 = -(sig2 / Kt) * (one * (sig2 * lam2 * (T - eps * eps * lam2 * t) - SigT2 + Sig_t2) +
                                    eps * eps * eps * psi * lt2 * lam2 * lam2 * sig2 * t);
  const double a2 = (sig2 / Kt) * (one * eps * eps * psi * lam2 * lt2 * sig2 * t +
                                   eps * lam2 * sig2 * (lt2 * (T - eps * eps * psi * psi * lt2 * t) - T + t));
  return {a0, a1, a2};
}

double StrategyCoefficients::rate(double t, double y, double zt, double s) const {
  if (t >= params_.T) throw std::domain_error("rate: t must be below the horizon T");
  if (t < 0.0) throw std::domain_error("rate: t must be nonnegative");
  const double t_eval = std::max(t, kTimeFloorFraction * params_.T);
  switch (family_.tag) {
    case FamilyTag::kLinear:
      return gain(t_eval) * (s - scalars_.lambda * y);
    case FamilyTag::kActivist: {
      const double lambda = scalars_.lambda;
      return -((zt + params_.m_beta) + lambda * y) / ((lambda - 1.0) * (params_.T - t_eval));
    }
    case FamilyTag::kLinearQuadratic: {
      const std::array<double, 3> a = abc(t_eval);
      return a[0] * y + a[1] * (zt + params_.m_beta) + a[2] * s;
    }
  }
  throw std::logic_error("rate: unknown family");
}

FilterRate rate_from_filter(const FilterLaw& law, const MarketParams& params, double zt, double s) {
  const double sig2 = params.sigma * params.sigma;
  FilterRate out;
  out.extrapolated = law.mahalanobis2(zt, s) > 144.0;
  const Vec2 d{zt - law.mean[0], s - law.mean[1]};
  if (law.filtered[0] && law.filtered[1]) {
    // sigma^2 (slope - e_zt)^T cov^{-1} (x - mean)
    const Vec2 x = law.cov.solve(d);
    out.value = sig2 * ((law.slope[0] - 1.0) * x[0] + law.slope[1] * x[1]);
  } else if (law.filtered[1]) {
    // Density free of zt: only the d_y term contributes.
    out.value = sig2 * law.slope[1] * d[1] / law.cov.yy;
  } else if (law.filtered[0]) {
    out.value = sig2 * (law.slope[0] - 1.0) * d[0] / law.cov.xx;
  } else {
    out.value = 0.0;
  }
  return out;
}

RateFn equilibrium_rate(const StrategyCoefficients& coeffs) {
  return [coeffs](double t, double y, double zt, double s) { return coeffs.rate(t, y, zt, s); };
}

}  // namespace kyleot
