#pragma once

#include <array>

#include "kyleot/filtering.hpp"
#include "kyleot/market.hpp"

namespace kyleot {

// Closed-form equilibrium trading-rate coefficients per family:
//   Linear:          A = g(t) (s - lambda y)
//   Activist:        A = -((zt + m_beta) + lambda y) / ((lambda - 1)(T - t))
//   LinearQuadratic: A = A0(t) y + A1(t) (zt + m_beta) + A2(t) s
// Construction validates the family preconditions (positive gain denominator,
// lambda > 1, K_t > 0) and throws PreconditionError otherwise.
class StrategyCoefficients {
 public:
  StrategyCoefficients(const MarketParams& params, const SurplusFamily& family);

  FamilyTag family() const { return family_.tag; }
  const MarketParams& params() const { return params_; }
  const FamilyScalars& scalars() const { return scalars_; }

  double gain(double t) const;                  // Linear only
  std::array<double, 3> abc(double t) const;    // LinearQuadratic only
  double K(double t) const;                     // LinearQuadratic determinant
  double rate(double t, double y, double zt, double s) const;

 private:
  MarketParams params_;
  SurplusFamily family_;
  FamilyScalars scalars_;
};

// Generic representation A = sigma^2 (d_y + d_zt) log rho evaluated from the
// Gaussian filter law. `extrapolated` flags queries whose Mahalanobis
// distance exceeds 12 (density effectively zero).
struct FilterRate {
  double value = 0.0;
  bool extrapolated = false;
};
FilterRate rate_from_filter(const FilterLaw& law, const MarketParams& params, double zt, double s);

// Equilibrium rate as a callable for the simulator/particle filter.
RateFn equilibrium_rate(const StrategyCoefficients& coeffs);

}  // namespace kyleot
