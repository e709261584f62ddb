#pragma once

#include <functional>
#include <optional>

#include "kyleot/gaussian.hpp"
#include "kyleot/market.hpp"
#include "kyleot/polynomial.hpp"

namespace kyleot {

// Conditional law of (Z_T - beta, S_T) given Y_T = y under the optimal
// coupling: Gaussian with mean mean0 + y * slope and covariance cov
// (possibly degenerate along the direction pinned by the transport map).
struct CouplingDisintegration {
  Vec2 mean0{0.0, 0.0};
  Vec2 slope{0.0, 0.0};
  Mat2 cov;
};

// Kantorovich potentials, transport map, disintegration and value of the
// terminal coupling problem
//     sup over couplings of E[ S(Zt_T, S_T, Y_T) ],  Y_T ~ N(0, sigma^2 T).
// gamma is normalized to have zero mean under N(0, sigma^2 T); the constant
// removed from gamma is added to gamma_c so the sum (hence the duality gap)
// is unchanged.
struct TransportSolution {
  FamilyTag family = FamilyTag::kLinear;
  FamilyScalars scalars;
  double normalization = 0.0;  // mean of the raw potential under N(0, sigma^2 T)
  double ot_value = 0.0;       // E[gamma_c] under the (Zt_T, S_T) law, == primal optimum

  std::function<double(double)> gamma;            // normalized potential of y
  std::function<double(double)> dgamma;           // its derivative
  std::function<double(double, double)> gamma_c;  // dual potential of (zt, s)
  std::function<double(double, double)> map;      // I(zt, s)

  CouplingDisintegration coupling_given_y;

  // Polynomial forms when available; pricing substitutes closed-form
  // Gaussian moments for dgamma of degree <= 3.
  std::optional<Polynomial> gamma_poly;
  std::optional<Polynomial> dgamma_poly;

  double duality_gap(double zt, double s, double y) const {
    return gamma(y) + gamma_c(zt, s) - surplus_(zt, s, y);
  }

  std::function<double(double, double, double)> surplus_;  // S(zt,s,y), captured from the family
};

TransportSolution solve_linear(const MarketParams& params, const SurplusFamily& family);
TransportSolution solve_activist(const MarketParams& params, const SurplusFamily& family);
TransportSolution solve_linquad(const MarketParams& params, const SurplusFamily& family);
TransportSolution solve_transport(const MarketParams& params, const SurplusFamily& family);

}  // namespace kyleot
