// Command-line front end: solve the terminal transport problem, simulate the
// equilibrium, run the verification suite, or dump pricing grids. All outputs
// are flat files (CSV with 17-significant-digit floats, JSON reports) and are
// byte-identical across reruns with the same config and seed.
#include <cstdio>
#include <filesystem>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "kyleot/errors.hpp"
#include "kyleot/filtering.hpp"
#include "kyleot/io.hpp"
#include "kyleot/scenario.hpp"
#include "kyleot/simulate.hpp"
#include "kyleot/strategy.hpp"
#include "kyleot/transport_oracle.hpp"
#include "kyleot/verify.hpp"

namespace {

using namespace kyleot;

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  long paths = -1;
  long steps = -1;
  long seed = -1;
  std::string projected;  // "", "on", "off"
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "scenario config file")->required();
  cmd->add_option("--out", flags.out_dir, "output directory (overrides config)");
  cmd->add_option("--paths", flags.paths, "number of Monte-Carlo paths (overrides config)");
  cmd->add_option("--steps", flags.steps, "number of time steps (overrides config)");
  cmd->add_option("--seed", flags.seed, "master seed (overrides config)");
  cmd->add_option("--projected", flags.projected, "terminal projection on|off (overrides config)")
      ->check(CLI::IsMember({"on", "off"}));
}

ScenarioConfig resolve(const CommonFlags& flags) {
  ScenarioConfig cfg = load_scenario(flags.config_path);
  if (!flags.out_dir.empty()) cfg.out_dir = flags.out_dir;
  if (flags.paths >= 0) cfg.n_paths = flags.paths;
  if (flags.steps >= 0) cfg.n_steps = static_cast<int>(flags.steps);
  if (flags.seed >= 0) cfg.seed = static_cast<std::uint64_t>(flags.seed);
  if (flags.projected == "on") cfg.projected = true;
  if (flags.projected == "off") cfg.projected = false;
  std::filesystem::create_directories(cfg.out_dir);
  return cfg;
}

Scenario to_scenario(const ScenarioConfig& cfg) {
  Scenario sc;
  sc.name = family_name(cfg.family);
  sc.params = cfg.market;
  sc.family = cfg.make_family();
  return sc;
}

int require_valid(const ScenarioConfig& cfg) {
  const ValidationReport report = validate(cfg.market, cfg.make_family());
  if (!report.ok()) {
    std::fprintf(stderr, "scenario invalid:\n%s", report.summary().c_str());
    return 1;
  }
  return 0;
}

nlohmann::json meta_json(const ScenarioConfig& cfg, const TransportSolution& ts) {
  return nlohmann::json{{"family", family_name(cfg.family)},
                        {"lambda", ts.scalars.lambda},
                        {"lambda_tilde", ts.scalars.lambda_tilde},
                        {"eps", ts.scalars.eps},
                        {"normalization", ts.normalization},
                        {"ot_value", ts.ot_value},
                        {"seed", cfg.seed},
                        {"n_paths", cfg.n_paths},
                        {"n_steps", cfg.n_steps},
                        {"projected", cfg.projected}};
}

int cmd_solve(const CommonFlags& flags) {
  const ScenarioConfig cfg = resolve(flags);
  if (int rc = require_valid(cfg)) return rc;
  const Scenario sc = to_scenario(cfg);
  const TransportSolution ts = solve_transport(sc.params, sc.family);

  const double y_span = 4.0 * sc.params.sigma * std::sqrt(sc.params.T);
  CsvWriter potentials({"y", "gamma", "dgamma"});
  for (int i = 0; i <= 80; ++i) {
    const double y = -y_span + 2.0 * y_span * i / 80.0;
    potentials.row({y, ts.gamma(y), ts.dgamma(y)});
  }
  potentials.write_file(cfg.out_dir + "/potentials.csv");

  const double z_span = 4.0 * std::sqrt(sc.params.shifted_noise_var(sc.params.T));
  const double s_span = 4.0 * std::sqrt(std::max(sc.params.signal_var_total(), 1e-12));
  CsvWriter map_grid({"zt", "s", "I", "gamma_c"});
  for (int i = 0; i <= 20; ++i)
    for (int j = 0; j <= 20; ++j) {
      const double zt = -sc.params.m_beta - z_span + 2.0 * z_span * i / 20.0;
      const double s = -s_span + 2.0 * s_span * j / 20.0;
      map_grid.row({zt, s, ts.map(zt, s), ts.gamma_c(zt, s)});
    }
  map_grid.write_file(cfg.out_dir + "/map.csv");

  const StrategyCoefficients coeffs(sc.params, sc.family);
  CsvWriter coeff_csv(cfg.family == FamilyTag::kLinearQuadratic
                          ? std::vector<std::string>{"t", "K", "A0", "A1", "A2"}
                          : std::vector<std::string>{"t", "gain_or_slope"});
  for (int i = 0; i < 200; ++i) {
    const double t = sc.params.T * (i + 0.5) / 200.0;
    if (cfg.family == FamilyTag::kLinearQuadratic) {
      const auto a = coeffs.abc(t);
      coeff_csv.row({t, coeffs.K(t), a[0], a[1], a[2]});
    } else if (cfg.family == FamilyTag::kLinear) {
      coeff_csv.row({t, coeffs.gain(t)});
    } else {
      coeff_csv.row({t, -1.0 / ((coeffs.scalars().lambda - 1.0) * (sc.params.T - t))});
    }
  }
  coeff_csv.write_file(cfg.out_dir + "/coefficients.csv");

  if (cfg.oracle) {
    // Quantized discrete instance plus its exact LP coupling, as a regression fixture.
    const QuantizedOracleInstance inst = build_quantized_instance(sc.params, sc.family, ts);
    const DiscreteCoupling lp = solve_discrete_ot(inst.surplus, inst.mu_w, inst.nu_w);
    CsvWriter oracle_csv({"i", "j", "zt_i", "s_i", "mu_w_i", "y_j", "nu_w_j", "surplus", "plan"});
    for (std::size_t i = 0; i < inst.mu_atoms.size(); ++i)
      for (std::size_t j = 0; j < inst.y_atoms.size(); ++j)
        oracle_csv.row({static_cast<double>(i), static_cast<double>(j), inst.mu_atoms[i].first,
                        inst.mu_atoms[i].second, inst.mu_w[i], inst.y_atoms[j], inst.nu_w[j],
                        inst.surplus[i][j], lp.at(static_cast<int>(i), static_cast<int>(j))});
    oracle_csv.write_file(cfg.out_dir + "/oracle.csv");
    nlohmann::json meta = meta_json(cfg, ts);
    meta["oracle_value"] = lp.value;
    write_text_file(cfg.out_dir + "/meta.json", meta.dump(2) + "\n");
  } else {
    write_text_file(cfg.out_dir + "/meta.json", meta_json(cfg, ts).dump(2) + "\n");
  }
  std::printf("solve: wrote potentials.csv, map.csv, coefficients.csv%s, meta.json to %s\n",
              cfg.oracle ? ", oracle.csv" : "", cfg.out_dir.c_str());
  return 0;
}

int cmd_simulate(const CommonFlags& flags) {
  const ScenarioConfig cfg = resolve(flags);
  if (int rc = require_valid(cfg)) return rc;
  const Scenario sc = to_scenario(cfg);
  const TransportSolution ts = solve_transport(sc.params, sc.family);
  const PricingRule rule(sc.params, ts);
  const StrategyCoefficients coeffs(sc.params, sc.family);
  const RateFn rate = equilibrium_rate(coeffs);

  SimSpec spec;
  spec.n_paths = cfg.n_paths;
  spec.n_steps = cfg.n_steps;
  spec.seed = cfg.seed;
  spec.mode = cfg.projected ? TerminalMode::kProjected : TerminalMode::kUnprojected;

  const long dump_cap = 100;
  const long n_dump = std::min<long>(spec.n_paths, dump_cap);
  constexpr int kPriceGrid = 9;  // eighths of T, for the martingale z-scores
  std::vector<std::string> dump(static_cast<std::size_t>(n_dump));
  std::vector<double> y_T(spec.n_paths), wealth_v(spec.n_paths), coupling_sq(spec.n_paths), qv(spec.n_paths);
  std::vector<double> gap_min_v(spec.n_paths), gap_max_v(spec.n_paths);
  std::vector<std::array<double, kPriceGrid>> h_grid(spec.n_paths);

  simulate_paths(sc.params, sc.family, ts, rule, rate, spec, [&](long i, const PathBundle& pth) {
    const int n = spec.n_steps;
    y_T[i] = pth.Y[n];
    wealth_v[i] = pth.wealth;
    const double gap = pth.Y[n] - ts.map(pth.Zt[n], pth.S[n]);
    coupling_sq[i] = gap * gap;
    double q = 0.0;
    for (int k = 0; k < n; ++k) q += (pth.Y[k + 1] - pth.Y[k]) * (pth.Y[k + 1] - pth.Y[k]);
    qv[i] = q;
    for (int j = 0; j < kPriceGrid; ++j) h_grid[i][j] = pth.P[static_cast<std::size_t>(j) * n / (kPriceGrid - 1)];
    const double dual_gap = ts.duality_gap(pth.Zt[n], pth.S[n], pth.Y[n]);
    gap_min_v[i] = gap_max_v[i] = dual_gap;
    if (i < n_dump) {
      CsvWriter csv({"path", "t", "S", "Z", "Y", "X", "P"});
      for (int k = 0; k <= n; ++k)
        csv.row({static_cast<double>(i), pth.t[k], pth.S[k], pth.Z[k], pth.Y[k], pth.X[k], pth.P[k]});
      dump[i] = csv.str();
    }
  });

  std::string all;
  all += "path,t,S,Z,Y,X,P\n";
  for (long i = 0; i < n_dump; ++i) {
    const std::string& d = dump[i];
    all += d.substr(d.find('\n') + 1);  // strip per-path header
  }
  write_text_file(cfg.out_dir + "/paths.csv", all);

  if (cfg.oracle && cfg.family != FamilyTag::kActivist && spec.n_paths > 0) {
    // Particle-filter trajectory along the first path.
    PathBundle first;
    simulate_single_path(sc.params, sc.family, ts, rule, rate, spec, 0, first);
    const ParticleFilterResult pf = kushner_particle_oracle(sc.params, rate, first.t, first.Y, 2000, cfg.seed ^ 0xF117ull);
    CsvWriter filter_csv({"t", "mean_zt", "mean_s", "cov_zz", "cov_zs", "cov_ss", "ess"});
    for (const auto& snap : pf.trajectory)
      filter_csv.row({snap.t, snap.mean_zt, snap.mean_s, snap.cov_zz, snap.cov_zs, snap.cov_ss, snap.ess});
    filter_csv.write_file(cfg.out_dir + "/filter.csv");
  }

  // Batch summary (>= 30 batches for standard errors).
  auto batch_stats = [&](const std::vector<double>& per_path) {
    const long n = static_cast<long>(per_path.size());
    double mean = 0.0;
    for (double v : per_path) mean += v;
    mean /= static_cast<double>(n);
    const long batch = std::max<long>(1, n / 50);
    std::vector<double> bm;
    for (long b0 = 0; b0 < n; b0 += batch) {
      const long b1 = std::min(n, b0 + batch);
      double acc = 0.0;
      for (long i = b0; i < b1; ++i) acc += per_path[i];
      bm.push_back(acc / static_cast<double>(b1 - b0));
    }
    double var = 0.0;
    for (double v : bm) var += (v - mean) * (v - mean);
    var /= std::max<std::size_t>(1, bm.size() - 1);
    return std::pair<double, double>{mean, std::sqrt(var / static_cast<double>(bm.size()))};
  };

  const auto [w_mean, w_se] = batch_stats(wealth_v);
  double rms = 0.0, qv_mean = 0.0, gmin = 1e300, gmax = -1e300;
  for (long i = 0; i < spec.n_paths; ++i) {
    rms += coupling_sq[i];
    qv_mean += qv[i];
    gmin = std::min(gmin, gap_min_v[i]);
    gmax = std::max(gmax, gap_max_v[i]);
  }
  rms = std::sqrt(rms / static_cast<double>(spec.n_paths));
  qv_mean /= static_cast<double>(spec.n_paths);
  const double ks = ks_statistic_gaussian(y_T, 0.0, sc.params.sigma * std::sqrt(sc.params.T));

  double mart_z = 0.0;
  std::vector<double> inc(spec.n_paths);
  for (int j1 = 0; j1 < kPriceGrid; ++j1)
    for (int j2 = j1 + 1; j2 < kPriceGrid; ++j2) {
      for (long i = 0; i < spec.n_paths; ++i) inc[i] = h_grid[i][j2] - h_grid[i][j1];
      const auto [m, se] = batch_stats(inc);
      if (se > 0.0) mart_z = std::max(mart_z, std::abs(m) / se);
    }

  nlohmann::json report = meta_json(cfg, ts);
  report["terminal_ks_statistic"] = ks;
  report["terminal_ks_pvalue"] = ks_pvalue(ks, spec.n_paths);
  report["terminal_coupling_rms"] = rms;
  report["martingale_max_z"] = mart_z;
  report["duality_gap_terminal_min"] = gmin;
  report["duality_gap_terminal_max"] = gmax;
  report["mean_wealth"] = w_mean;
  report["wealth_se"] = w_se;
  report["mean_quadratic_variation"] = qv_mean;

  if (cfg.oracle) {
    // Paired deviation experiments at the configured scale.
    nlohmann::json deltas = nlohmann::json::array();
    for (const DeviationSpec dev : {DeviationSpec{DeviationSpec::Kind::kScale, 1.5},
                                    DeviationSpec{DeviationSpec::Kind::kScale, 2.0},
                                    DeviationSpec{DeviationSpec::Kind::kDrift, 0.5},
                                    DeviationSpec{DeviationSpec::Kind::kStopAfter, 0.5 * sc.params.T}}) {
      const DeviationResult res = simulate_deviation(sc.params, sc.family, ts, rule, rate, dev, spec);
      deltas.push_back({{"deviation", dev.label()},
                        {"delta_mean", res.delta_mean},
                        {"delta_se", res.delta_se}});
    }
    report["deviation_wealth_deltas"] = deltas;
  }
  write_text_file(cfg.out_dir + "/report.json", report.dump(2) + "\n");
  std::printf("simulate: %ld paths x %d steps; wrote paths.csv (first %ld paths), report.json to %s\n",
              spec.n_paths, spec.n_steps, n_dump, cfg.out_dir.c_str());
  return 0;
}

int cmd_verify(const CommonFlags& flags) {
  const ScenarioConfig cfg = resolve(flags);
  if (int rc = require_valid(cfg)) return rc;
  const Scenario sc = to_scenario(cfg);

  VerifyOptions opt;
  opt.n_paths = cfg.n_paths;
  opt.n_steps = cfg.n_steps;
  opt.seed = cfg.seed;
  opt.profit_paths = cfg.n_paths;
  opt.deviation_paths = cfg.n_paths;
  opt.deviation_steps = cfg.n_steps;
  if (!cfg.oracle) {
    opt.filter_paths = 0;  // skip the particle oracle
  }

  const std::vector<CheckResult> results = run_suite(sc, opt);
  std::printf("%s", render_table(results).c_str());
  write_text_file(cfg.out_dir + "/verify.json", report_json(results));
  const bool ok = all_pass(results);
  std::printf("verify: %s (report at %s/verify.json)\n", ok ? "all checks passed" : "FAILURES present",
              cfg.out_dir.c_str());
  return ok ? 0 : 2;
}

int cmd_dump_grid(const CommonFlags& flags) {
  const ScenarioConfig cfg = resolve(flags);
  if (int rc = require_valid(cfg)) return rc;
  const Scenario sc = to_scenario(cfg);
  const TransportSolution ts = solve_transport(sc.params, sc.family);
  const PricingRule rule(sc.params, ts);

  const double y_span = 4.0 * sc.params.sigma * std::sqrt(sc.params.T);
  CsvWriter csv({"t", "y", "H", "Gamma"});
  for (int it = 0; it <= 8; ++it) {
    const double t = sc.params.T * it / 8.0;
    for (int iy = 0; iy <= 40; ++iy) {
      const double y = -y_span + 2.0 * y_span * iy / 40.0;
      csv.row({t, y, rule.price(t, y), rule.value(t, y)});
    }
  }
  csv.write_file(cfg.out_dir + "/grid.csv");
  std::printf("dump-grid: wrote grid.csv to %s\n", cfg.out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"generalized Kyle equilibrium via optimal transport: solve, simulate, verify"};
  app.require_subcommand(1);

  CommonFlags solve_flags, sim_flags, verify_flags, grid_flags;
  CLI::App* solve = app.add_subcommand("solve", "compute potentials, transport map and strategy coefficients");
  add_common(solve, solve_flags);
  CLI::App* simulate = app.add_subcommand("simulate", "Monte-Carlo equilibrium paths and summary report");
  add_common(simulate, sim_flags);
  CLI::App* verify = app.add_subcommand("verify", "run the statistical verification suite");
  add_common(verify, verify_flags);
  CLI::App* grid = app.add_subcommand("dump-grid", "tabulate H(t,y) and Gamma(t,y)");
  add_common(grid, grid_flags);

  CLI11_PARSE(app, argc, argv);
  try {
    if (solve->parsed()) return cmd_solve(solve_flags);
    if (simulate->parsed()) return cmd_simulate(sim_flags);
    if (verify->parsed()) return cmd_verify(verify_flags);
    if (grid->parsed()) return cmd_dump_grid(grid_flags);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
