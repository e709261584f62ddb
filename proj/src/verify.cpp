#include "kyleot/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "kyleot/errors.hpp"
#include "kyleot/filtering.hpp"
#include "kyleot/gauss_hermite.hpp"
#include "kyleot/gaussian.hpp"
#include "kyleot/io.hpp"
#include "kyleot/rng.hpp"
#include "kyleot/transport_oracle.hpp"

#include "json.hpp"

namespace kyleot {
namespace {

constexpr int kAutocorrLags = 10;
// The terminal projection jump and the capped bridge step are artifacts of
// the discrete scheme; increment statistics stop before them.
constexpr int kBoundaryLayerIncrements = 2;
constexpr int kBatches = 50;

struct MeanSe {
  double mean = 0.0, se = 0.0;
};

MeanSe batch_stats(const std::vector<double>& per_path) {
  const long n = static_cast<long>(per_path.size());
  MeanSe out;
  for (double v : per_path) out.mean += v;
  out.mean /= static_cast<double>(n);
  const long batch = std::max<long>(1, n / kBatches);
  std::vector<double> bm;
  for (long b0 = 0; b0 < n; b0 += batch) {
    const long b1 = std::min(n, b0 + batch);
    double acc = 0.0;
    for (long i = b0; i < b1; ++i) acc += per_path[i];
    bm.push_back(acc / static_cast<double>(b1 - b0));
  }
  double var = 0.0;
  for (double v : bm) var += (v - out.mean) * (v - out.mean);
  var /= std::max<std::size_t>(1, bm.size() - 1);
  out.se = std::sqrt(var / static_cast<double>(bm.size()));
  return out;
}

double fit_log_order(const std::vector<int>& steps, const std::vector<double>& err) {
  // Least-squares slope of log(err) against log(dt); dt ~ 1/steps.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(steps.size());
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const double x = -std::log(static_cast<double>(steps[i]));
    const double y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

struct ScenarioContext {
  TransportSolution transport;
  PricingRule rule;
  StrategyCoefficients coeffs;
  RateFn rate;
  ScenarioContext(const Scenario& sc)
      : transport(solve_transport(sc.params, sc.family)),
        rule(sc.params, transport),
        coeffs(sc.params, sc.family),
        rate(equilibrium_rate(coeffs)) {}
};

}  // namespace

double ks_statistic_gaussian(std::vector<double> samples, double mean, double stddev) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = normal_cdf(samples[i], mean, stddev);
    d = std::max(d, std::max(f - static_cast<double>(i) / n, (static_cast<double>(i) + 1.0) / n - f));
  }
  return d;
}

double ks_pvalue(double statistic, long n) {
  const double rn = std::sqrt(static_cast<double>(n));
  const double lam = (rn + 0.12 + 0.11 / rn) * statistic;
  if (lam < 1e-8) return 1.0;
  double sum = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = 2.0 * ((j % 2) ? 1.0 : -1.0) * std::exp(-2.0 * j * j * lam * lam);
    sum += term;
    if (std::abs(term) < 1e-16) break;
  }
  return std::min(1.0, std::max(0.0, sum));
}

Scenario linear_static_scenario() {
  Scenario sc;
  sc.name = "linear_static";
  sc.params.T = 1.0;
  sc.params.sigma = 1.0;
  sc.params.sigma_s = PiecewiseConstantSchedule::constant(0.0);
  sc.params.Sigma0 = 1.0;
  sc.params.m_beta = 0.0;
  sc.params.sigma_beta = 0.0;
  sc.family = SurplusFamily::linear(ScalarFunction::identity());
  return sc;
}

Scenario activist_scenario() {
  Scenario sc;
  sc.name = "activist";
  sc.params.T = 1.0;
  sc.params.sigma = 1.0;
  sc.params.sigma_s = PiecewiseConstantSchedule::constant(0.0);
  sc.params.Sigma0 = 0.0;
  sc.params.m_beta = 0.0;
  sc.params.sigma_beta = std::sqrt(3.0);  // lambda = 2
  sc.family = SurplusFamily::activist(ScalarFunction::from_polynomial(Polynomial{{0.0, 0.0, 1.0}}));
  return sc;
}

Scenario linquad_scenario() {
  Scenario sc;
  sc.name = "linquad";
  sc.params.T = 1.0;
  sc.params.sigma = 1.0;
  sc.params.sigma_s = PiecewiseConstantSchedule::constant(0.0);
  sc.params.Sigma0 = 1.0;
  sc.params.m_beta = 0.0;
  sc.params.sigma_beta = 0.0;
  sc.family = SurplusFamily::linear_quadratic(1.0);
  return sc;
}

std::vector<Scenario> canned_scenarios() {
  return {linear_static_scenario(), activist_scenario(), linquad_scenario()};
}

Scenario linear_dynamic_scenario() {
  Scenario sc = linear_static_scenario();
  sc.name = "linear_dynamic";
  sc.params.sigma_s = PiecewiseConstantSchedule::constant(0.6);
  return sc;
}

Scenario linquad_dispersed_scenario() {
  Scenario sc;
  sc.name = "linquad_dispersed";
  sc.params.T = 1.0;
  sc.params.sigma = 1.0;
  sc.params.sigma_s = PiecewiseConstantSchedule::constant(0.5);
  sc.params.Sigma0 = 1.0;
  sc.params.m_beta = 0.2;
  sc.params.sigma_beta = 0.6;
  sc.family = SurplusFamily::linear_quadratic(0.8);
  return sc;
}

std::vector<CheckResult> check_inconspicuous(const Scenario& sc, const VerifyOptions& opt, bool include_autocorr,
                                             bool include_qv) {
  const ScenarioContext ctx(sc);
  SimSpec spec;
  spec.n_paths = opt.n_paths;
  spec.n_steps = opt.n_steps;
  spec.seed = opt.seed;
  spec.threads = opt.threads;
  spec.mode = TerminalMode::kProjected;

  const long n = spec.n_paths;
  std::vector<double> y_terminal(n), qv(n);
  std::vector<std::array<double, kAutocorrLags + 1>> acf(n);  // lag sums + variance sum

  simulate_paths(sc.params, sc.family, ctx.transport, ctx.rule, ctx.rate, spec, [&](long i, const PathBundle& p) {
    const int steps = spec.n_steps;
    y_terminal[i] = p.Y[steps];
    double q = 0.0;
    for (int k = 0; k < steps; ++k) {
      const double dy = p.Y[k + 1] - p.Y[k];
      q += dy * dy;
    }
    qv[i] = q;
    auto& a = acf[i];
    a.fill(0.0);
    const int last = steps - kBoundaryLayerIncrements;  // increments [0, last)
    for (int k = 0; k < last; ++k) {
      const double xk = p.Y[k + 1] - p.Y[k];
      a[kAutocorrLags] += xk * xk;
      for (int l = 1; l <= kAutocorrLags; ++l) {
        if (k + l < last) a[l - 1] += xk * (p.Y[k + l + 1] - p.Y[k + l]);
      }
    }
  });

  std::vector<CheckResult> out;
  const double sigT = sc.params.sigma * std::sqrt(sc.params.T);

  CheckResult ks;
  ks.name = sc.name + ".inconspicuous.ks_pvalue";
  ks.n_paths = n;
  ks.n_steps = spec.n_steps;
  ks.seed = spec.seed;
  const double d = ks_statistic_gaussian(y_terminal, 0.0, sigT);
  ks.statistic = ks_pvalue(d, n);
  ks.threshold = 0.01;
  ks.pass = ks.statistic >= ks.threshold;
  ks.details = "D = " + format_g17(d);
  out.push_back(ks);

  if (include_autocorr) {
    CheckResult ac;
    ac.name = sc.name + ".inconspicuous.increment_autocorr";
    ac.n_paths = n;
    ac.n_steps = spec.n_steps;
    ac.seed = spec.seed;
    double var_sum = 0.0;
    for (long i = 0; i < n; ++i) var_sum += acf[i][kAutocorrLags];
    double worst = 0.0;
    int worst_lag = 0;
    for (int l = 1; l <= kAutocorrLags; ++l) {
      double cov_sum = 0.0;
      for (long i = 0; i < n; ++i) cov_sum += acf[i][l - 1];
      const double r = cov_sum / var_sum;
      if (std::abs(r) > std::abs(worst)) {
        worst = r;
        worst_lag = l;
      }
    }
    ac.statistic = std::abs(worst);
    ac.threshold = 4.0 / std::sqrt(static_cast<double>(n) * spec.n_steps);
    ac.pass = ac.statistic <= ac.threshold;
    ac.details = "worst lag " + std::to_string(worst_lag) + ", r = " + format_g17(worst) +
                 ", boundary-layer increments excluded = " + std::to_string(kBoundaryLayerIncrements);
    out.push_back(ac);
  }

  if (include_qv) {
    CheckResult q;
    q.name = sc.name + ".inconspicuous.quadratic_variation";
    q.n_paths = n;
    q.n_steps = spec.n_steps;
    q.seed = spec.seed;
    double qmean = 0.0;
    for (double v : qv) qmean += v;
    qmean /= static_cast<double>(n);
    const double target = sc.params.sigma * sc.params.sigma * sc.params.T;
    q.statistic = std::abs(qmean - target) / target;
    q.threshold = 0.05;
    q.pass = q.statistic <= q.threshold;
    q.details = "mean QV = " + format_g17(qmean) + ", target = " + format_g17(target);
    out.push_back(q);
  }
  return out;
}

CheckResult check_terminal_coupling(const Scenario& sc, const VerifyOptions& opt, TerminalMode mode) {
  const ScenarioContext ctx(sc);
  SimSpec spec;
  spec.n_paths = opt.n_paths;
  spec.n_steps = opt.n_steps;
  spec.seed = opt.seed;
  spec.threads = opt.threads;
  spec.mode = mode;

  std::vector<double> sq(spec.n_paths);
  simulate_paths(sc.params, sc.family, ctx.transport, ctx.rule, ctx.rate, spec, [&](long i, const PathBundle& p) {
    const int n = spec.n_steps;
    const double gap = p.Y[n] - ctx.transport.map(p.Zt[n], p.S[n]);
    sq[i] = gap * gap;
  });
  double mse = 0.0;
  for (double v : sq) mse += v;
  mse /= static_cast<double>(spec.n_paths);

  CheckResult r;
  r.name = sc.name + ".terminal_coupling." + (mode == TerminalMode::kProjected ? "projected" : "unprojected");
  r.n_paths = spec.n_paths;
  r.n_steps = spec.n_steps;
  r.seed = spec.seed;
  r.statistic = std::sqrt(mse);
  const double dt = sc.params.T / spec.n_steps;
  r.threshold = (mode == TerminalMode::kProjected) ? 1e-12 : 5.0 * sc.params.sigma * std::sqrt(dt);
  r.pass = r.statistic <= r.threshold;
  return r;
}

ConvergenceStudy coupling_convergence(const Scenario& sc, const VerifyOptions& opt,
                                      const std::vector<int>& steps_grid, long n_paths) {
  const ScenarioContext ctx(sc);
  ConvergenceStudy study;
  study.steps = steps_grid;
  for (int steps : steps_grid) {
    SimSpec spec;
    spec.n_paths = n_paths;
    spec.n_steps = steps;
    spec.seed = opt.seed;
    spec.threads = opt.threads;
    spec.mode = TerminalMode::kUnprojected;
    std::vector<double> sq(n_paths), tsq(n_paths);
    simulate_paths(sc.params, sc.family, ctx.transport, ctx.rule, ctx.rate, spec, [&](long i, const PathBundle& p) {
      const double gap = p.Y[steps] - ctx.transport.map(p.Zt[steps], p.S[steps]);
      sq[i] = gap * gap;
      const double ident = p.P[steps] - sc.family.marginal_payoff(p.beta + p.X[steps], p.S[steps]);
      tsq[i] = ident * ident;
    });
    double mse = 0.0, tmse = 0.0;
    for (long i = 0; i < n_paths; ++i) {
      mse += sq[i];
      tmse += tsq[i];
    }
    study.coupling_rms.push_back(std::sqrt(mse / static_cast<double>(n_paths)));
    study.terminal_identity_rms.push_back(std::sqrt(tmse / static_cast<double>(n_paths)));
  }
  study.coupling_order = fit_log_order(study.steps, study.coupling_rms);
  study.terminal_order = fit_log_order(study.steps, study.terminal_identity_rms);
  study.coupling_monotone = std::is_sorted(study.coupling_rms.rbegin(), study.coupling_rms.rend());
  study.terminal_monotone = std::is_sorted(study.terminal_identity_rms.rbegin(), study.terminal_identity_rms.rend());
  return study;
}

std::vector<CheckResult> check_price_martingale(const Scenario& sc, const VerifyOptions& opt) {
  const ScenarioContext ctx(sc);
  SimSpec spec;
  spec.n_paths = opt.n_paths;
  spec.n_steps = opt.n_steps;
  spec.seed = opt.seed;
  spec.threads = opt.threads;
  spec.mode = TerminalMode::kProjected;

  constexpr int kGrid = 9;  // multiples of T/8
  std::vector<std::array<double, kGrid>> h(spec.n_paths);
  simulate_paths(sc.params, sc.family, ctx.transport, ctx.rule, ctx.rate, spec, [&](long i, const PathBundle& p) {
    for (int j = 0; j < kGrid; ++j) h[i][j] = p.P[static_cast<std::size_t>(j) * spec.n_steps / (kGrid - 1)];
  });

  std::vector<CheckResult> out;
  CheckResult mart;
  mart.name = sc.name + ".price_martingale.max_z";
  mart.n_paths = spec.n_paths;
  mart.n_steps = spec.n_steps;
  mart.seed = spec.seed;
  double worst = 0.0;
  std::string worst_pair;
  std::vector<double> inc(spec.n_paths);
  for (int j1 = 0; j1 < kGrid; ++j1)
    for (int j2 = j1 + 1; j2 < kGrid; ++j2) {
      for (long i = 0; i < spec.n_paths; ++i) inc[i] = h[i][j2] - h[i][j1];
      const MeanSe ms = batch_stats(inc);
      const double z = ms.se > 0.0 ? std::abs(ms.mean) / ms.se : 0.0;
      if (z > worst) {
        worst = z;
        worst_pair = std::to_string(j1) + "->" + std::to_string(j2);
      }
    }
  mart.statistic = worst;
  mart.threshold = 3.0;
  mart.pass = worst <= 3.0;
  mart.details = "worst grid pair (eighths of T): " + worst_pair;
  out.push_back(mart);

  // Terminal identity and coupling error orders, unprojected.
  const ConvergenceStudy study = coupling_convergence(sc, opt, {64, 128, 256, 512, 1024},
                                                      std::min<long>(opt.n_paths, 20000));
  CheckResult term;
  term.name = sc.name + ".price_martingale.terminal_identity_order";
  term.n_paths = std::min<long>(opt.n_paths, 20000);
  term.seed = opt.seed;
  term.statistic = study.terminal_order;
  term.threshold = 0.4;
  term.pass = study.terminal_order >= 0.4 && study.terminal_monotone;
  std::ostringstream det;
  det << "rms by steps:";
  for (std::size_t i = 0; i < study.steps.size(); ++i)
    det << " " << study.steps[i] << ":" << format_g17(study.terminal_identity_rms[i]);
  term.details = det.str();
  out.push_back(term);
  return out;
}

std::vector<CheckResult> check_duality(const Scenario& sc, const VerifyOptions& opt) {
  const ScenarioContext ctx(sc);
  const TransportSolution& ts = ctx.transport;
  const MarketParams& p = sc.params;

  const long n = opt.mc_samples;
  Rng rng = Rng::stream(opt.seed, 0, /*salt=*/7);
  const double z_std = std::sqrt(p.shifted_noise_var(p.T));
  const double s_std = std::sqrt(p.signal_var_total());
  const double y_std = p.sigma * std::sqrt(p.T);

  double gap_min = 1e300, graph_gap_max = 0.0, foc_max = 0.0;
  std::vector<double> graph_gamma(n);  // gamma(I) samples: primal - dual per draw
  for (long i = 0; i < n; ++i) {
    const double zt = -p.m_beta + z_std * rng.normal();
    const double s = s_std * rng.normal();
    const double y = y_std * rng.normal();
    gap_min = std::min(gap_min, ts.duality_gap(zt, s, y));
    const double yi = ts.map(zt, s);
    graph_gap_max = std::max(graph_gap_max, std::abs(ts.duality_gap(zt, s, yi)));
    foc_max = std::max(foc_max, std::abs(ts.dgamma(yi) - sc.family.surplus_dy(zt, s, yi)));
    graph_gamma[i] = ts.gamma(yi);
  }

  std::vector<CheckResult> out;
  auto push = [&](const std::string& name, double stat, double thr, bool pass, const std::string& det = "") {
    CheckResult r;
    r.name = sc.name + ".duality." + name;
    r.statistic = stat;
    r.threshold = thr;
    r.pass = pass;
    r.n_paths = n;
    r.seed = opt.seed;
    r.details = det;
    out.push_back(r);
  };

  push("gap_nonnegative", gap_min, -1e-9, gap_min >= -1e-9, "min sampled duality gap");
  push("gap_on_graph", graph_gap_max, 1e-9, graph_gap_max <= 1e-9, "max |gap| at y = I(zt, s)");
  const double foc_tol = sc.family.has_analytic_derivative() ? 1e-7 : 1e-4;
  push("first_order_condition", foc_max, foc_tol, foc_max <= foc_tol);

  // Primal minus dual per sample equals gamma(I); its mean must be 0 within 3 SE
  // (pushforward of the map is the y-marginal and gamma is mean-normalized).
  const MeanSe ms = batch_stats(graph_gamma);
  const double z = ms.se > 0.0 ? std::abs(ms.mean) / ms.se : 0.0;
  push("value_identity_z", z, 3.0, z <= 3.0,
       "E[gamma(I)] = " + format_g17(ms.mean) + " +- " + format_g17(ms.se));

  const QuantizedOracleInstance inst = build_quantized_instance(sc.params, sc.family, ts);
  const DiscreteCoupling lp = solve_discrete_ot(inst.surplus, inst.mu_w, inst.nu_w);
  const double oracle_gap = std::abs(lp.value - ts.ot_value);
  push("oracle_value", oracle_gap, 5e-2, oracle_gap <= 5e-2,
       "LP = " + format_g17(lp.value) + ", dual = " + format_g17(ts.ot_value));
  return out;
}

std::vector<CheckResult> check_profit_optimality(const Scenario& sc, const VerifyOptions& opt) {
  const ScenarioContext ctx(sc);
  SimSpec spec;
  spec.n_paths = opt.profit_paths;
  spec.n_steps = opt.profit_steps;
  spec.seed = opt.seed;
  spec.threads = opt.threads;
  spec.mode = TerminalMode::kProjected;
  const MarketParams& p = sc.params;

  std::vector<CheckResult> out;
  if (sc.family.tag != FamilyTag::kLinearQuadratic) {
    std::vector<double> w(spec.n_paths);
    simulate_paths(sc.params, sc.family, ctx.transport, ctx.rule, ctx.rate, spec,
                   [&](long i, const PathBundle& pb) { w[i] = pb.wealth; });
    const MeanSe wealth_ms = batch_stats(w);

    // Monte-Carlo E[gamma_c] over the uncontrolled terminal law.
    Rng rng = Rng::stream(opt.seed, 1, /*salt=*/11);
    const double z_std = std::sqrt(p.shifted_noise_var(p.T));
    const double s_std = std::sqrt(p.signal_var_total());
    std::vector<double> gc(spec.n_paths);
    for (long i = 0; i < spec.n_paths; ++i)
      gc[i] = ctx.transport.gamma_c(-p.m_beta + z_std * rng.normal(), s_std * rng.normal());
    const MeanSe gc_ms = batch_stats(gc);

    CheckResult vs_mc;
    vs_mc.name = sc.name + ".profit.wealth_vs_mc_dual";
    vs_mc.n_paths = spec.n_paths;
    vs_mc.n_steps = spec.n_steps;
    vs_mc.seed = spec.seed;
    const double comb = std::sqrt(wealth_ms.se * wealth_ms.se + gc_ms.se * gc_ms.se);
    vs_mc.statistic = comb > 0.0 ? std::abs(wealth_ms.mean - gc_ms.mean) / comb : 0.0;
    vs_mc.threshold = 3.0;
    vs_mc.pass = vs_mc.statistic <= 3.0;
    vs_mc.details = "wealth " + format_g17(wealth_ms.mean) + " +- " + format_g17(wealth_ms.se) + ", E[gamma_c] " +
                    format_g17(gc_ms.mean) + " +- " + format_g17(gc_ms.se);
    out.push_back(vs_mc);

    CheckResult vs_quad;
    vs_quad.name = sc.name + ".profit.wealth_vs_dual_value";
    vs_quad.n_paths = spec.n_paths;
    vs_quad.n_steps = spec.n_steps;
    vs_quad.seed = spec.seed;
    vs_quad.statistic = wealth_ms.se > 0.0 ? std::abs(wealth_ms.mean - ctx.transport.ot_value) / wealth_ms.se : 0.0;
    vs_quad.threshold = 3.0;
    vs_quad.pass = vs_quad.statistic <= 3.0;
    vs_quad.details = "dual value (quadrature) = " + format_g17(ctx.transport.ot_value);
    out.push_back(vs_quad);
  } else {
    // The linquad bridge coefficient exceeds 2, so its discrete terminal steps
    // amplify and the wealth carries an O(dt) cost with a large constant.
    // Assert the gap to the dual value shrinks by at least half per step
    // doubling instead of a fixed-level identity.
    std::vector<double> gaps;
    for (int steps : {spec.n_steps / 2, spec.n_steps, 2 * spec.n_steps}) {
      SimSpec s2 = spec;
      s2.n_steps = steps;
      std::vector<double> w(s2.n_paths);
      simulate_paths(sc.params, sc.family, ctx.transport, ctx.rule, ctx.rate, s2,
                     [&](long i, const PathBundle& pb) { w[i] = pb.wealth; });
      double m = 0.0;
      for (double v : w) m += v;
      gaps.push_back(std::abs(m / static_cast<double>(s2.n_paths) - ctx.transport.ot_value));
    }
    CheckResult trend;
    trend.name = sc.name + ".profit.wealth_gap_halves_per_doubling";
    trend.n_paths = spec.n_paths;
    trend.n_steps = spec.n_steps;
    trend.seed = spec.seed;
    trend.statistic = std::max(gaps[1] / gaps[0], gaps[2] / gaps[1]);
    trend.threshold = 0.75;
    trend.pass = gaps[1] < gaps[0] && gaps[2] < gaps[1] && trend.statistic <= 0.75;
    trend.details = "gaps " + format_g17(gaps[0]) + " -> " + format_g17(gaps[1]) + " -> " + format_g17(gaps[2]);
    out.push_back(trend);
  }

  // The half-gain bridge still reaches the transport target, so its exact
  // delta is zero; on the non-linear scenarios its discrete bias is positive
  // and it is only part of the battery where the scheme is stable.
  std::vector<DeviationSpec> canned = {
      {DeviationSpec::Kind::kScale, 1.5}, {DeviationSpec::Kind::kScale, 2.0},
      {DeviationSpec::Kind::kDrift, 0.5}, {DeviationSpec::Kind::kStopAfter, 0.5 * p.T}};
  if (sc.family.tag == FamilyTag::kLinear)
    canned.insert(canned.begin(), {DeviationSpec::Kind::kScale, 0.5});
  SimSpec dev_spec = spec;
  dev_spec.n_paths = opt.deviation_paths;
  dev_spec.n_steps = opt.deviation_steps;
  bool any_strictly_negative = false;
  for (const DeviationSpec& dev : canned) {
    const DeviationResult res = simulate_deviation(sc.params, sc.family, ctx.transport, ctx.rule, ctx.rate, dev, dev_spec);
    CheckResult r;
    r.name = sc.name + ".profit.deviation." + dev.label();
    r.n_paths = res.n_paths;
    r.n_steps = dev_spec.n_steps;
    r.seed = dev_spec.seed;
    r.statistic = res.delta_se > 0.0 ? res.delta_mean / res.delta_se : 0.0;
    r.threshold = 2.0;
    r.pass = r.statistic <= 2.0;
    r.details = "delta = " + format_g17(res.delta_mean) + " +- " + format_g17(res.delta_se);
    if (r.statistic < -3.0) any_strictly_negative = true;
    out.push_back(r);
  }
  CheckResult neg;
  neg.name = sc.name + ".profit.some_deviation_strictly_loses";
  neg.n_paths = dev_spec.n_paths;
  neg.n_steps = dev_spec.n_steps;
  neg.seed = dev_spec.seed;
  neg.statistic = any_strictly_negative ? 1.0 : 0.0;
  neg.threshold = 1.0;
  neg.pass = any_strictly_negative;
  out.push_back(neg);
  return out;
}

std::vector<CheckResult> check_filter_closed_form(const Scenario& sc) {
  const ScenarioContext ctx(sc);
  const MarketParams& p = sc.params;
  std::vector<CheckResult> out;

  // Initial condition: law at (t=0, y=0) is exactly the prior of (-beta, S_0).
  {
    const FilterLaw law0 = closed_form_law(p, sc.family, 0.0, 0.0);
    const double dm = std::max(std::abs(law0.mean[0] + p.m_beta), std::abs(law0.mean[1]));
    const double dv = std::max({std::abs(law0.cov.xx - p.sigma_beta * p.sigma_beta),
                                std::abs(law0.cov.yy - p.Sigma0 * p.Sigma0), std::abs(law0.cov.xy)});
    CheckResult r;
    r.name = sc.name + ".filter.initial_condition";
    r.statistic = std::max(dm, dv);
    r.threshold = 0.0;
    r.pass = r.statistic == 0.0;
    out.push_back(r);
  }

  // Terminal limit: law at t -> T matches the coupling disintegration.
  {
    const double t = p.T * (1.0 - 1e-9);
    const FilterLaw law = closed_form_law(p, sc.family, t, 0.7);
    const CouplingDisintegration& pi = ctx.transport.coupling_given_y;
    const Vec2 mean_pi{pi.mean0[0] + 0.7 * pi.slope[0], pi.mean0[1] + 0.7 * pi.slope[1]};
    double err = std::max(std::abs(law.mean[0] - mean_pi[0]), std::abs(law.mean[1] - mean_pi[1]));
    err = std::max(err, std::abs(law.cov.xx - pi.cov.xx));
    err = std::max(err, std::abs(law.cov.xy - pi.cov.xy));
    err = std::max(err, std::abs(law.cov.yy - pi.cov.yy));
    CheckResult r;
    r.name = sc.name + ".filter.terminal_limit";
    r.statistic = err;
    r.threshold = 1e-6;
    r.pass = err <= 1e-6;
    out.push_back(r);
  }

  // Filtered-mean neutrality: the affine rate vanishes at the posterior mean.
  {
    double worst = 0.0;
    for (int it = 1; it <= 8; ++it)
      for (int iy = -3; iy <= 3; ++iy) {
        const double t = p.T * it / 10.0;
        const double y = 0.7 * iy;
        const FilterLaw law = closed_form_law(p, sc.family, t, y);
        worst = std::max(worst, std::abs(ctx.coeffs.rate(t, y, law.mean[0], law.mean[1])));
      }
    CheckResult r;
    r.name = sc.name + ".filter.mean_neutrality";
    r.statistic = worst;
    r.threshold = 1e-8;
    r.pass = worst <= 1e-8;
    out.push_back(r);
  }
  return out;
}

std::vector<CheckResult> check_filter_particle(const Scenario& sc, const VerifyOptions& opt) {
  const ScenarioContext ctx(sc);
  const MarketParams& p = sc.params;
  std::vector<CheckResult> out;

  // Particle oracle against the closed-form Gaussian law along test paths.
  SimSpec spec;
  spec.n_paths = opt.filter_paths;
  spec.n_steps = opt.filter_steps;
  spec.seed = opt.seed;
  spec.threads = opt.threads;
  spec.mode = TerminalMode::kProjected;

  std::vector<PathBundle> paths(spec.n_paths);
  simulate_paths(sc.params, sc.family, ctx.transport, ctx.rule, ctx.rate, spec,
                 [&](long i, const PathBundle& pb) { paths[i] = pb; });

  const std::vector<int> check_idx = {spec.n_steps / 5, 2 * spec.n_steps / 5, 3 * spec.n_steps / 5,
                                      4 * spec.n_steps / 5};
  const std::size_t n_times = check_idx.size();
  // diff[time][path] per component, plus trace ratios and per-path internal z.
  std::vector<std::vector<double>> diff_z(n_times, std::vector<double>(spec.n_paths, 0.0));
  std::vector<std::vector<double>> diff_s(n_times, std::vector<double>(spec.n_paths, 0.0));
  std::vector<double> path_trace_ratio(spec.n_paths, 0.0);
  std::vector<double> path_internal_z(spec.n_paths, 0.0);
  parallel_ranges(spec.n_paths, opt.threads, [&](long begin, long end, int) {
    for (long i = begin; i < end; ++i) {
      const ParticleFilterResult pf = kushner_particle_oracle(
          p, ctx.rate, paths[i].t, paths[i].Y, opt.filter_particles, opt.seed ^ (0x5151ull * (i + 1)));
      double wz = 0.0, tr = 0.0;
      for (std::size_t k = 0; k < n_times; ++k) {
        const int idx = check_idx[k];
        const auto& snap = pf.trajectory[static_cast<std::size_t>(idx)];
        const FilterLaw law = closed_form_law(p, sc.family, paths[i].t[static_cast<std::size_t>(idx)],
                                              paths[i].Y[static_cast<std::size_t>(idx)]);
        diff_s[k][i] = snap.mean_s - law.mean[1];
        diff_z[k][i] = snap.mean_zt - law.mean[0];
        const double se_s = std::sqrt(snap.cov_ss / snap.ess);
        wz = std::max(wz, std::abs(diff_s[k][i]) / std::max(se_s, 1e-300));
        if (sc.family.tag == FamilyTag::kLinearQuadratic) {
          const double se_z = std::sqrt(snap.cov_zz / snap.ess);
          wz = std::max(wz, std::abs(diff_z[k][i]) / std::max(se_z, 1e-300));
          tr += (snap.cov_zz + snap.cov_ss) / (law.cov.xx + law.cov.yy);
        }
      }
      path_trace_ratio[i] = tr / static_cast<double>(n_times);
      path_internal_z[i] = wz;
    }
  });

  // Resampling correlates particles, so the within-run std/sqrt(ESS) is an
  // optimistic error bar; the consistency test studentizes the mean
  // discrepancy across the independent test paths instead.
  double worst_z = 0.0;
  const double n = static_cast<double>(spec.n_paths);
  for (std::size_t k = 0; k < n_times; ++k) {
    for (const auto* diffs : {&diff_s[k], &diff_z[k]}) {
      if (diffs == &diff_z[k] && sc.family.tag == FamilyTag::kLinear) continue;
      double m = 0.0;
      for (double d : *diffs) m += d;
      m /= n;
      double var = 0.0;
      for (double d : *diffs) var += (d - m) * (d - m);
      var /= (n - 1.0);
      const double se = std::sqrt(var / n);
      worst_z = std::max(worst_z, std::abs(m) / std::max(se, 1e-300));
    }
  }
  double worst_internal = 0.0;
  for (double z : path_internal_z) worst_internal = std::max(worst_internal, z);

  CheckResult pfr;
  pfr.name = sc.name + ".filter.particle_mean_z";
  pfr.n_paths = spec.n_paths;
  pfr.n_steps = spec.n_steps;
  pfr.seed = spec.seed;
  pfr.statistic = worst_z;
  pfr.threshold = 3.0;
  pfr.pass = worst_z <= 3.0;
  pfr.details = std::to_string(opt.filter_particles) + " particles, " + std::to_string(spec.n_paths) +
                " paths; worst single-run internal z = " + format_g17(worst_internal);
  out.push_back(pfr);

  if (sc.family.tag == FamilyTag::kLinearQuadratic) {
    double trace_acc = 0.0;
    for (double r : path_trace_ratio) trace_acc += r;
    CheckResult tr;
    tr.name = sc.name + ".filter.particle_cov_trace";
    tr.n_paths = spec.n_paths;
    tr.n_steps = spec.n_steps;
    tr.seed = spec.seed;
    tr.statistic = std::abs(trace_acc / n - 1.0);
    tr.threshold = 0.05;
    tr.pass = tr.statistic <= 0.05;
    out.push_back(tr);
  }
  return out;
}

std::vector<CheckResult> check_filter_consistency(const Scenario& sc, const VerifyOptions& opt) {
  std::vector<CheckResult> out = check_filter_closed_form(sc);
  if (sc.family.tag != FamilyTag::kActivist && opt.filter_paths > 0) {
    for (auto& r : check_filter_particle(sc, opt)) out.push_back(std::move(r));
  }
  return out;
}

CheckResult check_cross_representation(const Scenario& sc) {
  const ScenarioContext ctx(sc);
  const MarketParams& p = sc.params;
  const double y_span = 3.0 * p.sigma * std::sqrt(p.T);
  const double z_span = 3.0 * std::sqrt(p.shifted_noise_var(p.T)) + 1.0;
  const double s_span = 3.0 * std::sqrt(std::max(p.signal_var_total(), 0.25));

  double worst = 0.0;
  for (int it = 0; it < 20; ++it) {
    const double t = p.T * (0.05 + 0.9 * it / 19.0);
    for (int iy = 0; iy < 20; ++iy) {
      const double y = -y_span + 2.0 * y_span * iy / 19.0;
      const FilterLaw law = closed_form_law(p, sc.family, t, y);
      for (int iu = 0; iu < 20; ++iu) {
        // One state axis per family; the linquad grid walks the plane diagonally.
        double zt = -p.m_beta, s = 0.0;
        if (sc.family.tag == FamilyTag::kLinear) {
          s = -s_span + 2.0 * s_span * iu / 19.0;
          zt = 0.3;
        } else if (sc.family.tag == FamilyTag::kActivist) {
          zt = -p.m_beta - z_span + 2.0 * z_span * iu / 19.0;
          s = 0.0;
        } else {
          zt = -p.m_beta - z_span + 2.0 * z_span * iu / 19.0;
          s = s_span - 2.0 * s_span * iu / 19.0 + 0.1;
        }
        const double closed = ctx.coeffs.rate(t, y, zt, s);
        const double from_filter = rate_from_filter(law, p, zt, s).value;
        worst = std::max(worst, std::abs(closed - from_filter));
      }
    }
  }
  CheckResult r;
  r.name = sc.name + ".strategy.cross_representation";
  r.statistic = worst;
  r.threshold = 1e-8;
  r.pass = worst <= 1e-8;
  r.details = "20x20x20 grid";
  return r;
}

std::vector<CheckResult> run_suite(const Scenario& sc, const VerifyOptions& opt) {
  std::vector<CheckResult> out;
  auto append = [&](std::vector<CheckResult> v) {
    for (auto& r : v) out.push_back(std::move(r));
  };
  append(check_duality(sc, opt));
  out.push_back(check_cross_representation(sc));
  out.push_back(check_terminal_coupling(sc, opt, TerminalMode::kProjected));
  if (sc.family.tag != FamilyTag::kLinearQuadratic)
    out.push_back(check_terminal_coupling(sc, opt, TerminalMode::kUnprojected));
  // The discrete bridge reversion coefficient at the final steps: 1 for the
  // linear family, lambda/(lambda-1) for the activist one and larger for
  // linquad. Increment-level statistics are only clean when it is <= ~2.
  const bool stable_bridge = sc.family.tag == FamilyTag::kLinear;
  const bool moderate_bridge = sc.family.tag != FamilyTag::kLinearQuadratic;
  append(check_inconspicuous(sc, opt, /*include_autocorr=*/stable_bridge, /*include_qv=*/moderate_bridge));
  append(check_price_martingale(sc, opt));
  append(check_profit_optimality(sc, opt));
  append(check_filter_closed_form(sc));
  if (sc.family.tag != FamilyTag::kActivist && opt.filter_paths > 0) {
    // The particle oracle needs a diverse cloud: a dynamic-signal (and for
    // linquad, dispersed-endowment) variant of the family.
    const Scenario filter_sc =
        sc.family.tag == FamilyTag::kLinear ? linear_dynamic_scenario() : linquad_dispersed_scenario();
    append(check_filter_particle(filter_sc, opt));
  }
  return out;
}

std::string render_table(const std::vector<CheckResult>& results) {
  std::ostringstream os;
  std::size_t width = 12;
  for (const auto& r : results) width = std::max(width, r.name.size());
  for (const auto& r : results) {
    char line[160];
    std::snprintf(line, sizeof(line), "%-5s %-*s statistic=%- .6g threshold=%- .6g\n", r.pass ? "PASS" : "FAIL",
                  static_cast<int>(width), r.name.c_str(), r.statistic, r.threshold);
    os << line;
  }
  return os.str();
}

std::string report_json(const std::vector<CheckResult>& results) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : results) {
    arr.push_back({{"name", r.name},
                   {"statistic", r.statistic},
                   {"threshold", r.threshold},
                   {"pass", r.pass},
                   {"n_paths", r.n_paths},
                   {"n_steps", r.n_steps},
                   {"seed", r.seed},
                   {"details", r.details}});
  }
  return nlohmann::json{{"checks", arr}}.dump(2) + "\n";
}

bool all_pass(const std::vector<CheckResult>& results) {
  for (const auto& r : results)
    if (!r.pass) return false;
  return true;
}

}  // namespace kyleot
