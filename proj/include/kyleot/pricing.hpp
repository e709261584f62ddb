#pragma once

#include <vector>

#include "kyleot/market.hpp"
#include "kyleot/transport.hpp"

namespace kyleot {

// Pricing rule H(t,y) = E[dGamma(y + Z_T - Z_t)] and value Gamma(t,y) =
// E[Gamma(y + Z_T - Z_t)], the Gaussian smoothing of the Kantorovich
// potential. Quadrature order doubles from `quad_order` until the relative
// change is below 1e-9 (capped at 512); exact moment formulas are substituted
// whenever dGamma is a polynomial of degree <= 3.
class PricingRule {
 public:
  PricingRule(const MarketParams& params, const TransportSolution& transport, int quad_order = 64);

  double price(double t, double y) const;  // H(t, y)
  double value(double t, double y) const;  // Gamma(t, y)

  const TransportSolution& transport() const { return *transport_; }
  const MarketParams& params() const { return params_; }

 private:
  double smoothing_std(double t) const;

  MarketParams params_;
  const TransportSolution* transport_;
  int quad_order_;
  bool closed_form_ = false;
};

// Max of |d_t Gamma + (sigma^2/2) d_yy Gamma| over the grid, by central
// differences with dt = 1e-4 and dy = 1e-3. Grid times must keep t +- dt
// inside (0, T).
double heat_residual(const PricingRule& rule, const std::vector<double>& ts, const std::vector<double>& ys);

// Max of |H(t,y) - d_y Gamma(t,y)| over the grid (central difference in y).
double derivative_consistency(const PricingRule& rule, const std::vector<double>& ts, const std::vector<double>& ys);

}  // namespace kyleot
