#include "kyleot/transport.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

#include "kyleot/errors.hpp"
#include "kyleot/gauss_hermite.hpp"

namespace kyleot {
namespace {

constexpr int kNormalizationOrder = 64;

// Adaptive Simpson for the potential antiderivative of f(lambda * u).
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol, int depth,
                        double fa, double fm, double fb) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol) {
    return left + right + (left + right - whole) / 15.0;
  }
  return adaptive_simpson(f, a, m, 0.5 * tol, depth - 1, fa, flm, fm) +
         adaptive_simpson(f, m, b, 0.5 * tol, depth - 1, fm, frm, fb);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-12) {
  if (a == b) return 0.0;
  const double sign = (b >= a) ? 1.0 : -1.0;
  const double lo = std::min(a, b), hi = std::max(a, b);
  const double m = 0.5 * (lo + hi);
  return sign * adaptive_simpson(f, lo, hi, tol * (1.0 + hi - lo), 48, f(lo), f(m), f(hi));
}

}  // namespace

TransportSolution solve_linear(const MarketParams& params, const SurplusFamily& family) {
  if (family.tag != FamilyTag::kLinear) throw std::invalid_argument("solve_linear: wrong family");
  const double SigT2 = params.signal_var_total();
  if (!(SigT2 > 0.0)) throw DegenerateSignalError("solve_linear: Sigma_T = 0");

  TransportSolution out;
  out.family = FamilyTag::kLinear;
  out.scalars = family_scalars(params, family);
  const double lambda = out.scalars.lambda;
  const double noise_std = params.sigma * std::sqrt(params.T);
  const ScalarFunction f = family.payoff;

  // dGamma(y) = f(lambda y); Gamma by antiderivative from 0, then mean-normalized.
  out.dgamma = [f, lambda](double y) { return f(lambda * y); };
  std::shared_ptr<std::function<double(double)>> raw;
  if (f.polynomial()) {
    const Polynomial gp = f.polynomial()->compose_affine(lambda, 0.0).antiderivative();
    raw = std::make_shared<std::function<double(double)>>([gp](double y) { return gp(y); });
    out.gamma_poly = gp;  // normalization constant subtracted below
    out.dgamma_poly = f.polynomial()->compose_affine(lambda, 0.0);
  } else {
    auto df = [f, lambda](double u) { return f(lambda * u); };
    raw = std::make_shared<std::function<double(double)>>(
        [df](double y) { return integrate(df, 0.0, y); });
  }
  const double c = gauss_expectation(*raw, 0.0, noise_std, kNormalizationOrder);
  if (!std::isfinite(c)) throw GrowthViolationError("solve_linear: potential mean not finite");
  out.normalization = c;
  if (out.gamma_poly) out.gamma_poly->coef[0] -= c;
  out.gamma = [raw, c](double y) { return (*raw)(y)-c; };

  // Transport map s -> s/lambda pushes N(0, Sigma_T^2) onto N(0, sigma^2 T).
  out.map = [lambda](double, double s) { return s / lambda; };

  // Dual potential by c-transform along the map graph.
  const SurplusFamily fam = family;
  const auto gamma = out.gamma;
  out.gamma_c = [fam, gamma, lambda](double zt, double s) {
    const double y = s / lambda;
    return fam.surplus(zt, s, y) - gamma(y);
  };
  out.surplus_ = [fam](double zt, double s, double y) { return fam.surplus(zt, s, y); };

  // Given Y_T = y the coupling pins S_T = lambda y; Zt_T keeps its
  // unconditional terminal law N(-m_beta, sigma_beta^2 + sigma^2 T).
  out.coupling_given_y.mean0 = {-params.m_beta, 0.0};
  out.coupling_given_y.slope = {0.0, lambda};
  out.coupling_given_y.cov = Mat2{params.shifted_noise_var(params.T), 0.0, 0.0};

  // Value: E[(S/lambda - Zt) f(S)] with Zt independent of S, E[Zt] = -m_beta.
  const double SigT = std::sqrt(SigT2);
  const double e_sf = gauss_expectation([&f](double s) { return s * f(s); }, 0.0, SigT, kNormalizationOrder);
  const double e_f = gauss_expectation([&f](double s) { return f(s); }, 0.0, SigT, kNormalizationOrder);
  out.ot_value = e_sf / lambda + params.m_beta * e_f;
  if (!std::isfinite(out.ot_value)) throw GrowthViolationError("solve_linear: transport value not finite");
  return out;
}

TransportSolution solve_activist(const MarketParams& params, const SurplusFamily& family) {
  if (family.tag != FamilyTag::kActivist) throw std::invalid_argument("solve_activist: wrong family");
  if (!(params.sigma_beta > 0.0)) throw SingularMapError("solve_activist: sigma_beta = 0 gives lambda = 1");

  TransportSolution out;
  out.family = FamilyTag::kActivist;
  out.scalars = family_scalars(params, family);
  const double lambda = out.scalars.lambda;
  const double m_beta = params.m_beta;
  const double noise_std = params.sigma * std::sqrt(params.T);
  const ScalarFunction V = family.reward;

  // The decreasing coupling I(zt) = -(zt + m_beta)/lambda is optimal for any
  // convex V; the potentials split V along the graph with weights 1/(1+lambda)
  // and lambda/(1+lambda).
  out.map = [lambda, m_beta](double zt, double) { return -(zt + m_beta) / lambda; };

  auto raw = [V, lambda, m_beta](double y) { return V(y * (1.0 + lambda) + m_beta) / (lambda + 1.0); };
  const double c = gauss_expectation(raw, 0.0, noise_std, kNormalizationOrder);
  if (!std::isfinite(c)) throw GrowthViolationError("solve_activist: potential mean not finite");
  out.normalization = c;
  out.gamma = [raw, c](double y) { return raw(y) - c; };
  out.dgamma = [V, lambda, m_beta](double y) { return V.derivative(y * (1.0 + lambda) + m_beta); };
  if (V.polynomial()) {
    Polynomial gp = V.polynomial()->compose_affine(1.0 + lambda, m_beta);
    for (double& cf : gp.coef) cf /= (lambda + 1.0);
    gp.coef[0] -= c;
    out.gamma_poly = gp;
    out.dgamma_poly = gp.derivative();
  }
  const double inv = 1.0 + 1.0 / lambda;
  out.gamma_c = [V, lambda, m_beta, inv, c](double zt, double) {
    return V(-inv * zt - m_beta / lambda) / inv + c;
  };
  const SurplusFamily fam = family;
  out.surplus_ = [fam](double zt, double s, double y) { return fam.surplus(zt, s, y); };

  // Given Y_T = y: Zt_T = -lambda y - m_beta exactly; S_T stays unconditioned.
  out.coupling_given_y.mean0 = {-m_beta, 0.0};
  out.coupling_given_y.slope = {-lambda, 0.0};
  out.coupling_given_y.cov = Mat2{0.0, 0.0, params.signal_var_total()};

  // Value: E[V(w)] with w = y - zt on the graph, w ~ N(m_beta, (1+lambda)^2 sigma^2 T).
  out.ot_value =
      gauss_expectation([&V](double w) { return V(w); }, m_beta, (1.0 + lambda) * noise_std, kNormalizationOrder);
  if (!std::isfinite(out.ot_value)) throw GrowthViolationError("solve_activist: transport value not finite");
  return out;
}

TransportSolution solve_linquad(const MarketParams& params, const SurplusFamily& family) {
  if (family.tag != FamilyTag::kLinearQuadratic) throw std::invalid_argument("solve_linquad: wrong family");

  TransportSolution out;
  out.family = FamilyTag::kLinearQuadratic;
  out.scalars = family_scalars(params, family);
  const double psi = family.psi;
  const double lam2 = out.scalars.lambda * out.scalars.lambda;
  const double lt2 = out.scalars.lambda_tilde * out.scalars.lambda_tilde;
  const double eps = out.scalars.eps;
  if (!std::isfinite(eps) || !(eps > 0.0))
    throw DegenerateSignalError("solve_linquad: eps not finite (psi^2 lambda_tilde^2 + lambda^2 = 0)");
  const double m_beta = params.m_beta;
  const double sig2T = params.sigma * params.sigma * params.T;

  out.map = [eps, psi, m_beta](double zt, double s) { return eps * (s - psi * (zt + m_beta)); };

  // Gamma(y) = (psi y^2 + (y + eps psi m_beta)^2 / eps)/2, mean-normalized.
  const double c = 0.5 * (psi * sig2T + (sig2T + eps * eps * psi * psi * m_beta * m_beta) / eps);
  out.normalization = c;
  out.gamma = [psi, eps, m_beta, c](double y) {
    const double u = y + eps * psi * m_beta;
    return 0.5 * (psi * y * y + u * u / eps) - c;
  };
  out.dgamma = [psi, eps, m_beta](double y) { return psi * y + (y + eps * psi * m_beta) / eps; };
  out.gamma_poly = Polynomial{{0.5 * eps * psi * psi * m_beta * m_beta - c, psi * m_beta, 0.5 * (psi + 1.0 / eps)}};
  out.dgamma_poly = Polynomial{{psi * m_beta, psi + 1.0 / eps}};

  out.gamma_c = [psi, eps, m_beta, c](double zt, double s) {
    const double u = s - psi * zt;
    return 0.5 * psi * zt * zt - zt * s - eps * psi * m_beta * (s - psi * zt) + 0.5 * eps * u * u + c;
  };
  const SurplusFamily fam = family;
  out.surplus_ = [fam](double zt, double s, double y) { return fam.surplus(zt, s, y); };

  out.coupling_given_y.mean0 = {-m_beta, 0.0};
  out.coupling_given_y.slope = {-eps * psi * lt2, eps * lam2};
  const double v = eps * eps * lam2 * lt2 * sig2T;
  out.coupling_given_y.cov = Mat2{v, v * psi, v * psi * psi};

  // Value by exact bivariate Gaussian moments on the graph: with
  // u = s - psi (zt + m_beta) and x = y - zt = eps u + (zt + m_beta) - zt - ... kept
  // numeric via 2-D quadrature for clarity.
  const GaussHermiteRule& rule = gauss_hermite(kNormalizationOrder);
  const double s_std = std::sqrt(params.signal_var_total());
  const double z_std = std::sqrt(params.shifted_noise_var(params.T));
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.node.size(); ++i) {
    const double zt = -m_beta + std::sqrt(2.0) * z_std * rule.node[i];
    double inner = 0.0;
    for (std::size_t j = 0; j < rule.node.size(); ++j) {
      const double s = std::sqrt(2.0) * s_std * rule.node[j];
      inner += rule.weight[j] * fam.surplus(zt, s, out.map(zt, s));
    }
    acc += rule.weight[i] * inner;
  }
  out.ot_value = acc / 3.1415926535897932384626433832795;
  if (!std::isfinite(out.ot_value)) throw GrowthViolationError("solve_linquad: transport value not finite");
  return out;
}

TransportSolution solve_transport(const MarketParams& params, const SurplusFamily& family) {
  switch (family.tag) {
    case FamilyTag::kLinear: return solve_linear(params, family);
    case FamilyTag::kActivist: return solve_activist(params, family);
    case FamilyTag::kLinearQuadratic: return solve_linquad(params, family);
  }
  throw std::invalid_argument("solve_transport: unknown family");
}

}  // namespace kyleot
