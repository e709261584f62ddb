#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kyleot/market.hpp"
#include "kyleot/simulate.hpp"

namespace kyleot {

// One pass/fail verification outcome; carries everything needed to re-run.
struct CheckResult {
  std::string name;
  double statistic = 0.0;
  double threshold = 0.0;
  bool pass = false;
  long n_paths = 0;
  int n_steps = 0;
  std::uint64_t seed = 0;
  std::string details;
};

// One-sample Kolmogorov-Smirnov statistic against N(mean, stddev^2).
double ks_statistic_gaussian(std::vector<double> samples, double mean, double stddev);
// Asymptotic p-value with the finite-sample size correction.
double ks_pvalue(double statistic, long n);

struct Scenario {
  std::string name;
  MarketParams params;
  SurplusFamily family;
};

Scenario linear_static_scenario();
Scenario activist_scenario();
Scenario linquad_scenario();
std::vector<Scenario> canned_scenarios();

// Filter-oracle variants: dynamic signal and dispersed endowment keep the
// bootstrap particle cloud diverse (a static signal never rejuvenates under
// resampling) and keep the filter covariance nonsingular at t = 0.
Scenario linear_dynamic_scenario();
Scenario linquad_dispersed_scenario();

struct VerifyOptions {
  long n_paths = 100000;
  int n_steps = 512;
  std::uint64_t seed = 20260801;
  int threads = 0;
  long mc_samples = 10000;         // duality Monte-Carlo draws
  int filter_paths = 20;           // particle-oracle test paths
  int filter_particles = 10000;
  int filter_steps = 1000;
  long profit_paths = 100000;
  int profit_steps = 1024;
  long deviation_paths = 100000;
  int deviation_steps = 512;
};

// Law of the total order flow: KS of Y_T against N(0, sigma^2 T), pooled
// increment autocorrelations at lags 1..10 (terminal boundary-layer
// increments excluded; the projection jump and the capped bridge step are
// scheme artifacts) and realized quadratic variation. Projected-mode run.
// The increment-level statistics assume a stable discrete bridge (reversion
// coefficient c <= ~1): include_autocorr/include_qv gate them on scenarios
// whose bridge is stiffer.
std::vector<CheckResult> check_inconspicuous(const Scenario& sc, const VerifyOptions& opt,
                                             bool include_autocorr = true, bool include_qv = true);

// RMS of Y_T - I(Zt_T, S_T): <= 5 sigma sqrt(dt) unprojected, <= 1e-12 projected.
CheckResult check_terminal_coupling(const Scenario& sc, const VerifyOptions& opt, TerminalMode mode);

// Convergence study over n_steps in {64,...,1024}: RMS coupling error and RMS
// of the terminal price identity H(T, Y_T) = dV/dx, unprojected mode.
struct ConvergenceStudy {
  std::vector<int> steps;
  std::vector<double> coupling_rms;
  std::vector<double> terminal_identity_rms;
  double coupling_order = 0.0;
  double terminal_order = 0.0;
  bool coupling_monotone = false;
  bool terminal_monotone = false;
};
ConvergenceStudy coupling_convergence(const Scenario& sc, const VerifyOptions& opt,
                                      const std::vector<int>& steps_grid, long n_paths);

// Price martingality across a 9-point time grid (all pairs, batch z-scores).
std::vector<CheckResult> check_price_martingale(const Scenario& sc, const VerifyOptions& opt);

// Kantorovich duality: gap sign, gap on the map graph, first-order condition,
// primal/dual value identity and the discrete-LP oracle on quantized marginals.
std::vector<CheckResult> check_duality(const Scenario& sc, const VerifyOptions& opt);

// Mean equilibrium wealth against E[gamma_c] (MC and quadrature) plus the
// canned deviations (scale 0.5/1.5/2, drift 0.5, stop at T/2).
std::vector<CheckResult> check_profit_optimality(const Scenario& sc, const VerifyOptions& opt);

// Exact initial condition, terminal limit and filtered-mean neutrality of the
// closed-form law.
std::vector<CheckResult> check_filter_closed_form(const Scenario& sc);

// Particle oracle against the closed-form Gaussian law along simulated paths.
std::vector<CheckResult> check_filter_particle(const Scenario& sc, const VerifyOptions& opt);

// Both of the above (particle part skipped for the activist family and when
// opt.filter_paths == 0).
std::vector<CheckResult> check_filter_consistency(const Scenario& sc, const VerifyOptions& opt);

// Closed-form rate against sigma^2 (d_y + d_zt) log rho on a 20^3 grid.
CheckResult check_cross_representation(const Scenario& sc);

// Scenario-appropriate subset of all checks.
std::vector<CheckResult> run_suite(const Scenario& sc, const VerifyOptions& opt);

std::string render_table(const std::vector<CheckResult>& results);
std::string report_json(const std::vector<CheckResult>& results);
bool all_pass(const std::vector<CheckResult>& results);

}  // namespace kyleot
