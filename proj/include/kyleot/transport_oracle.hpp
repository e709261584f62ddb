#pragma once

#include <vector>

namespace kyleot {

// Exact optimal coupling of two finitely supported marginals, maximizing the
// expected surplus. Solved by the transportation simplex with Bland's rule;
// instances are capped at 12 atoms per marginal.
struct DiscreteCoupling {
  int rows = 0, cols = 0;
  std::vector<double> plan;  // row-major, rows x cols
  double value = 0.0;
  double at(int i, int j) const { return plan[static_cast<std::size_t>(i) * cols + j]; }
};

// surplus[i][j] is the payoff of pairing mu-atom i with nu-atom j; mu_w and
// nu_w are the marginal weights (must both sum to the same total).
DiscreteCoupling solve_discrete_ot(const std::vector<std::vector<double>>& surplus,
                                   const std::vector<double>& mu_w, const std::vector<double>& nu_w);

// Gauss-Hermite quantization of N(mean, stddev^2): n atoms whose weighted
// moments match the Gaussian exactly up to degree 2n-1.
struct QuantizedGaussian {
  std::vector<double> point;
  std::vector<double> weight;
};
QuantizedGaussian gh_quantize(double mean, double stddev, int n);

}  // namespace kyleot

#include "kyleot/market.hpp"
#include "kyleot/transport.hpp"

namespace kyleot {

// Family-specific 8-atom quantization of the (zt, s) marginal, with the map
// images as the y-marginal atoms. Directions the dual potential treats
// linearly collapse to their mean, keeping the instance inside the atom cap.
struct QuantizedOracleInstance {
  std::vector<std::pair<double, double>> mu_atoms;  // (zt, s)
  std::vector<double> mu_w;
  std::vector<double> y_atoms;
  std::vector<double> nu_w;
  std::vector<std::vector<double>> surplus;
};

QuantizedOracleInstance build_quantized_instance(const MarketParams& params, const SurplusFamily& family,
                                                 const TransportSolution& transport);

}  // namespace kyleot
