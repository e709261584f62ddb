#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "kyleot/gaussian.hpp"
#include "kyleot/market.hpp"
#include "kyleot/transport.hpp"

namespace kyleot {

// Trading rate as a function of (t, y, zt, s).
using RateFn = std::function<double(double, double, double, double)>;

// Conditional law of (Zt_t, S_t) given the order flow, evaluated at level y.
// The component actually pinned by the filtering equation is flagged in
// `filtered`; the other component carries its unconditional law, which is the
// product-form solution of the same backward equation.
struct FilterLaw {
  FamilyTag family = FamilyTag::kLinear;
  double t = 0.0, y = 0.0;
  bool filtered[2] = {false, false};  // (zt, s)
  Vec2 mean{0.0, 0.0};
  Vec2 slope{0.0, 0.0};  // d mean / dy
  Mat2 cov;

  // Squared Mahalanobis distance of (zt, s) restricted to the filtered block.
  double mahalanobis2(double zt, double s) const;
};

// Covariance of the linear-quadratic filter law at time t (also the source of
// the K_t > 0 precondition, K_t = det).
Mat2 linquad_filter_cov(const MarketParams& params, double psi, double t);

// Linear-family filter variance ((T-t)/T) Sigma_T^2 - int_t^T sigma_r^2 dr,
// arranged to give Sigma_0^2 at t = 0 and 0 at t = T exactly.
double linear_filter_var(const MarketParams& params, double t);

// Closed-form Gaussian filter law for the given family; t in [0, T]. At t = 0,
// y = 0 this is exactly the prior law of (-beta, S_0); at t = T it matches the
// coupling disintegration.
FilterLaw closed_form_law(const MarketParams& params, const SurplusFamily& family, double t, double y);

// Independent consistency check of the closed form against the backward
// Fourier representation: the conditional characteristic function must equal
//   exp( (1/2) int_t^T (sigma^2 u^2 + sigma_r^2 v^2) dr )
//     * E[ cf of pi*_{y + Z_T - Z_t} at (u, v) ],
// the expectation evaluated by Gauss-Hermite quadrature over the increment.
// Returns the max modulus difference over the frequency grid.
double fourier_transform_check(const MarketParams& params, const SurplusFamily& family,
                               const TransportSolution& transport, double t, double y,
                               const std::vector<std::pair<double, double>>& freq_grid, int quad_order = 96);

// Bootstrap particle filter for the state (Zt, S) observed through
// dY = A dt + dZ, where the same dZ drives Zt. Conditionally on the observed
// increment each particle's Zt update is determined; weights carry the
// observation likelihood. Systematic resampling below ESS < n/2.
struct ParticleFilterResult {
  struct Snapshot {
    double t = 0.0;
    double mean_zt = 0.0, mean_s = 0.0;
    double cov_zz = 0.0, cov_zs = 0.0, cov_ss = 0.0;
    double ess = 0.0;
  };
  std::vector<Snapshot> trajectory;
};

ParticleFilterResult kushner_particle_oracle(const MarketParams& params, const RateFn& strategy,
                                             const std::vector<double>& t_grid, const std::vector<double>& y_path,
                                             int n_particles, std::uint64_t seed);

}  // namespace kyleot
