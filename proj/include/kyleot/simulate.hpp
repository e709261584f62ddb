#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "kyleot/market.hpp"
#include "kyleot/pricing.hpp"
#include "kyleot/strategy.hpp"
#include "kyleot/transport.hpp"

namespace kyleot {

// One discretized path of the coupled system. Y = X + Z holds exactly on the
// grid by construction (X is defined as Y - Z).
struct PathBundle {
  std::vector<double> t;   // n_steps + 1 points
  std::vector<double> S;   // private signal
  std::vector<double> Z;   // noise order flow
  std::vector<double> Zt;  // Z - beta
  std::vector<double> Y;   // total order flow
  std::vector<double> X;   // informed inventory, Y - Z
  std::vector<double> P;   // price H(t, Y)
  double beta = 0.0, S0 = 0.0;
  double wealth = 0.0;
  std::uint64_t master_seed = 0;
  long path_index = 0;
};

enum class TerminalMode { kProjected, kUnprojected };

struct SimSpec {
  long n_paths = 1000;
  int n_steps = 256;
  std::uint64_t seed = 1;
  TerminalMode mode = TerminalMode::kProjected;
  double rate_cap = 1e6;
  int threads = 0;  // 0 = hardware concurrency
};

// Visitor is invoked once per path index, possibly from worker threads; it
// must only touch per-index state. The bundle reference is reused between
// calls on the same worker.
using PathVisitor = std::function<void(long, const PathBundle&)>;

// Euler-Maruyama on S (signal), Z (noise flow) and Y (strategy feedback
// A dt + dZ), left-point rates capped at spec.rate_cap. Projected mode
// replaces the final step by the jump to the transport target I(Zt_T, S_T).
// Per-path streams depend only on (seed, path index).
void simulate_paths(const MarketParams& params, const SurplusFamily& family, const TransportSolution& transport,
                    const PricingRule& rule, const RateFn& rate, const SimSpec& spec, const PathVisitor& visit);

// Single path, same conventions; used for paired comparisons.
void simulate_single_path(const MarketParams& params, const SurplusFamily& family,
                          const TransportSolution& transport, const PricingRule& rule, const RateFn& rate,
                          const SimSpec& spec, long path_index, PathBundle& out);

// Realized wealth V(beta + X_T, S_T) - sum P_k dX_{k+1} - sum dX dP
// (left-point stochastic integral, explicit discrete covariation).
struct WealthBreakdown {
  double terminal_value = 0.0;
  double trading_cost = 0.0;   // sum P dX
  double covariation = 0.0;    // sum dX dP
  double total() const { return terminal_value - trading_cost - covariation; }
};
WealthBreakdown wealth_breakdown(const PathBundle& path, const SurplusFamily& family);
double wealth(const PathBundle& path, const SurplusFamily& family);

// Canned strategy perturbations for optimality experiments.
struct DeviationSpec {
  enum class Kind { kScale, kDrift, kGainShift, kStopAfter };
  Kind kind = Kind::kScale;
  double param = 1.0;
  std::string label() const;
};
RateFn deviate(const RateFn& base, const DeviationSpec& dev, const MarketParams& params);

// Paired common-random-number comparison E[W_dev - W_eq]; both runs use the
// unprojected terminal step so the deviation is not erased by projection.
struct DeviationResult {
  DeviationSpec spec;
  double delta_mean = 0.0;
  double delta_se = 0.0;
  double eq_mean = 0.0;
  double dev_mean = 0.0;
  long n_paths = 0;
};
DeviationResult simulate_deviation(const MarketParams& params, const SurplusFamily& family,
                                   const TransportSolution& transport, const PricingRule& rule,
                                   const RateFn& base_rate, const DeviationSpec& dev, const SimSpec& spec);

// Deterministic range-parallel helper; worker ranges are fixed by (n, threads).
void parallel_ranges(long n, int threads, const std::function<void(long, long, int)>& work);

}  // namespace kyleot
