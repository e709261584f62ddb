#include "kyleot/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "kyleot/errors.hpp"
#include "kyleot/rng.hpp"

namespace kyleot {

void parallel_ranges(long n, int threads, const std::function<void(long, long, int)>& work) {
  int n_threads = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  if (n_threads < 1) n_threads = 1;
  n_threads = static_cast<int>(std::min<long>(n_threads, std::max<long>(n, 1)));
  if (n_threads == 1) {
    work(0, n, 0);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  const long chunk = (n + n_threads - 1) / n_threads;
  for (int w = 0; w < n_threads; ++w) {
    const long begin = w * chunk;
    const long end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&work, begin, end, w] { work(begin, end, w); });
  }
  for (auto& th : pool) th.join();
}

void simulate_single_path(const MarketParams& params, const SurplusFamily& family,
                          const TransportSolution& transport, const PricingRule& rule, const RateFn& rate,
                          const SimSpec& spec, long path_index, PathBundle& out) {
  const int n = spec.n_steps;
  const double dt = params.T / n;
  const double z_step = params.sigma * std::sqrt(dt);

  out.t.resize(n + 1);
  out.S.resize(n + 1);
  out.Z.resize(n + 1);
  out.Zt.resize(n + 1);
  out.Y.resize(n + 1);
  out.X.resize(n + 1);
  out.P.resize(n + 1);
  out.master_seed = spec.seed;
  out.path_index = path_index;

  Rng rng = Rng::stream(spec.seed, static_cast<std::uint64_t>(path_index));
  out.beta = params.m_beta + params.sigma_beta * rng.normal();
  out.S0 = params.Sigma0 * rng.normal();

  out.t[0] = 0.0;
  out.S[0] = out.S0;
  out.Z[0] = 0.0;
  out.Zt[0] = -out.beta;
  out.Y[0] = 0.0;
  out.X[0] = 0.0;
  out.P[0] = rule.price(0.0, 0.0);

  for (int k = 0; k < n; ++k) {
    const double t = k * dt;
    const double t_next = (k + 1 == n) ? params.T : (k + 1) * dt;
    // Fixed draw count per step keeps streams aligned across strategies.
    const double dz = z_step * rng.normal();
    const double dw = rng.normal();
    const double s_next = out.S[k] + params.sigma_s.at(t) * std::sqrt(dt) * dw;
    const double z_next = out.Z[k] + dz;

    double y_next;
    if (spec.mode == TerminalMode::kProjected && k + 1 == n) {
      y_next = transport.map(z_next - out.beta, s_next);
    } else {
      double a = rate(t, out.Y[k], out.Zt[k], out.S[k]);
      a = std::clamp(a, -spec.rate_cap, spec.rate_cap);
      y_next = out.Y[k] + a * dt + dz;
    }
    if (!std::isfinite(y_next) || !std::isfinite(s_next))
      throw SimulationBlowupError("simulate: non-finite state", k);

    out.t[k + 1] = t_next;
    out.S[k + 1] = s_next;
    out.Z[k + 1] = z_next;
    out.Zt[k + 1] = z_next - out.beta;
    out.Y[k + 1] = y_next;
    out.X[k + 1] = y_next - z_next;
    out.P[k + 1] = rule.price(t_next, y_next);
  }
  out.wealth = wealth(out, family);
}

void simulate_paths(const MarketParams& params, const SurplusFamily& family, const TransportSolution& transport,
                    const PricingRule& rule, const RateFn& rate, const SimSpec& spec, const PathVisitor& visit) {
  parallel_ranges(spec.n_paths, spec.threads, [&](long begin, long end, int) {
    PathBundle bundle;
    for (long i = begin; i < end; ++i) {
      simulate_single_path(params, family, transport, rule, rate, spec, i, bundle);
      visit(i, bundle);
    }
  });
}

WealthBreakdown wealth_breakdown(const PathBundle& path, const SurplusFamily& family) {
  WealthBreakdown w;
  const std::size_t n = path.Y.size() - 1;
  for (std::size_t k = 0; k < n; ++k) {
    const double dx = path.X[k + 1] - path.X[k];
    w.trading_cost += path.P[k] * dx;
    w.covariation += dx * (path.P[k + 1] - path.P[k]);
  }
  w.terminal_value = family.terminal_payoff(path.beta + path.X[n], path.S[n]);
  return w;
}

double wealth(const PathBundle& path, const SurplusFamily& family) { return wealth_breakdown(path, family).total(); }

std::string DeviationSpec::label() const {
  switch (kind) {
    case Kind::kScale: return "scale_" + std::to_string(param);
    case Kind::kDrift: return "drift_" + std::to_string(param);
    case Kind::kGainShift: return "gain_shift_" + std::to_string(param);
    case Kind::kStopAfter: return "stop_after_" + std::to_string(param);
  }
  return "?";
}

RateFn deviate(const RateFn& base, const DeviationSpec& dev, const MarketParams& params) {
  const double T = params.T;
  switch (dev.kind) {
    case DeviationSpec::Kind::kScale: {
      const double kappa = dev.param;
      return [base, kappa](double t, double y, double zt, double s) { return kappa * base(t, y, zt, s); };
    }
    case DeviationSpec::Kind::kDrift: {
      const double c = dev.param;
      return [base, c](double t, double y, double zt, double s) { return base(t, y, zt, s) + c; };
    }
    case DeviationSpec::Kind::kGainShift: {
      const double shift = dev.param;
      const double t_max = T * (1.0 - 1e-9);
      return [base, shift, t_max](double t, double y, double zt, double s) {
        return base(std::clamp(t + shift, 0.0, t_max), y, zt, s);
      };
    }
    case DeviationSpec::Kind::kStopAfter: {
      const double t0 = dev.param;
      return [base, t0](double t, double y, double zt, double s) { return t >= t0 ? 0.0 : base(t, y, zt, s); };
    }
  }
  throw std::invalid_argument("deviate: unknown kind");
}

DeviationResult simulate_deviation(const MarketParams& params, const SurplusFamily& family,
                                   const TransportSolution& transport, const PricingRule& rule,
                                   const RateFn& base_rate, const DeviationSpec& dev, const SimSpec& spec) {
  const RateFn dev_rate = deviate(base_rate, dev, params);
  SimSpec run = spec;
  run.mode = TerminalMode::kUnprojected;

  std::vector<double> delta(run.n_paths), w_eq(run.n_paths), w_dev(run.n_paths);
  parallel_ranges(run.n_paths, run.threads, [&](long begin, long end, int) {
    PathBundle a, b;
    for (long i = begin; i < end; ++i) {
      simulate_single_path(params, family, transport, rule, base_rate, run, i, a);
      simulate_single_path(params, family, transport, rule, dev_rate, run, i, b);
      w_eq[i] = a.wealth;
      w_dev[i] = b.wealth;
      delta[i] = b.wealth - a.wealth;
    }
  });

  DeviationResult out;
  out.spec = dev;
  out.n_paths = run.n_paths;
  // Batch means (50 batches) for the standard error of the paired delta.
  const int n_batches = 50;
  const long batch = std::max<long>(1, run.n_paths / n_batches);
  std::vector<double> batch_mean;
  for (long b0 = 0; b0 < run.n_paths; b0 += batch) {
    const long b1 = std::min(run.n_paths, b0 + batch);
    double acc = 0.0;
    for (long i = b0; i < b1; ++i) acc += delta[i];
    batch_mean.push_back(acc / static_cast<double>(b1 - b0));
  }
  double m = 0.0;
  for (double v : delta) m += v;
  m /= static_cast<double>(run.n_paths);
  double var = 0.0;
  for (double v : batch_mean) var += (v - m) * (v - m);
  var /= std::max<std::size_t>(1, batch_mean.size() - 1);
  out.delta_mean = m;
  out.delta_se = std::sqrt(var / static_cast<double>(batch_mean.size()));
  double me = 0.0, md = 0.0;
  for (long i = 0; i < run.n_paths; ++i) {
    me += w_eq[i];
    md += w_dev[i];
  }
  out.eq_mean = me / static_cast<double>(run.n_paths);
  out.dev_mean = md / static_cast<double>(run.n_paths);
  return out;
}

}  // namespace kyleot
