#include "kyleot/pricing.hpp"

#include <cmath>
#include <stdexcept>

#include "kyleot/errors.hpp"
#include "kyleot/gauss_hermite.hpp"

namespace kyleot {
namespace {

// E[p(y + Z)] for Z ~ N(0, s^2) and polynomial p of degree <= 4, via
// E[Z^2] = s^2, E[Z^4] = 3 s^4 (odd moments vanish).
double poly_gauss_moment(const Polynomial& p, double y, double s) {
  const auto c = [&](std::size_t k) { return k < p.coef.size() ? p.coef[k] : 0.0; };
  if (p.coef.size() > 5) throw std::invalid_argument("poly_gauss_moment: degree > 4");
  const double s2 = s * s;
  double acc = c(0) + c(1) * y + c(2) * (y * y + s2) + c(3) * (y * y * y + 3.0 * y * s2) +
               c(4) * (y * y * y * y + 6.0 * y * y * s2 + 3.0 * s2 * s2);
  return acc;
}

}  // namespace

PricingRule::PricingRule(const MarketParams& params, const TransportSolution& transport, int quad_order)
    : params_(params), transport_(&transport), quad_order_(quad_order) {
  if (quad_order_ < 2) throw std::invalid_argument("PricingRule: quadrature order too small");
  closed_form_ = transport_->dgamma_poly && transport_->dgamma_poly->degree() <= 3 && transport_->gamma_poly &&
                 transport_->gamma_poly->degree() <= 4;
}

double PricingRule::smoothing_std(double t) const {
  if (t < 0.0 || t > params_.T) throw std::invalid_argument("PricingRule: t outside [0, T]");
  return params_.sigma * std::sqrt(params_.T - t);
}

double PricingRule::price(double t, double y) const {
  const double s = smoothing_std(t);
  if (closed_form_) return poly_gauss_moment(*transport_->dgamma_poly, y, s);
  if (s == 0.0) return transport_->dgamma(y);
  const double h = gauss_expectation_adaptive(transport_->dgamma, y, s, quad_order_, 1e-9);
  if (!std::isfinite(h)) throw GrowthViolationError("price: quadrature not finite");
  return h;
}

double PricingRule::value(double t, double y) const {
  const double s = smoothing_std(t);
  if (closed_form_) return poly_gauss_moment(*transport_->gamma_poly, y, s);
  if (s == 0.0) return transport_->gamma(y);
  const double g = gauss_expectation_adaptive(transport_->gamma, y, s, quad_order_, 1e-9);
  if (!std::isfinite(g)) throw GrowthViolationError("value: quadrature not finite");
  return g;
}

double heat_residual(const PricingRule& rule, const std::vector<double>& ts, const std::vector<double>& ys) {
  const double dt = 1e-4, dy = 1e-3;
  const double sig2 = rule.params().sigma * rule.params().sigma;
  double worst = 0.0;
  for (double t : ts) {
    if (t - dt <= 0.0 || t + dt >= rule.params().T)
      throw std::invalid_argument("heat_residual: t must keep t +- dt inside (0, T)");
    for (double y : ys) {
      const double d_t = (rule.value(t + dt, y) - rule.value(t - dt, y)) / (2.0 * dt);
      const double d_yy = (rule.value(t, y + dy) - 2.0 * rule.value(t, y) + rule.value(t, y - dy)) / (dy * dy);
      worst = std::max(worst, std::abs(d_t + 0.5 * sig2 * d_yy));
    }
  }
  return worst;
}

double derivative_consistency(const PricingRule& rule, const std::vector<double>& ts, const std::vector<double>& ys) {
  const double dy = 1e-4;
  double worst = 0.0;
  for (double t : ts)
    for (double y : ys) {
      const double d_y = (rule.value(t, y + dy) - rule.value(t, y - dy)) / (2.0 * dy);
      worst = std::max(worst, std::abs(rule.price(t, y) - d_y));
    }
  return worst;
}

}  // namespace kyleot
