// Acceptance suite: one line per criterion, nonzero exit on any failure.
// Usage: acceptance [path-to-cli-binary]
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "kyleot/filtering.hpp"
#include "kyleot/io.hpp"
#include "kyleot/simulate.hpp"
#include "kyleot/strategy.hpp"
#include "kyleot/verify.hpp"

using namespace kyleot;

namespace {

int failures = 0;

void report(int criterion, const std::string& what, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %d: %s  (%s)\n", pass ? "PASS" : "FAIL", criterion, what.c_str(), detail.c_str());
  if (!pass) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// 1. Duality certification for all three families: Monte-Carlo gap bounds over
//    1e4 samples and the 8-atom LP oracle within 5e-2 of the dual value, < 10 s.
void criterion_1() {
  const auto t0 = std::chrono::steady_clock::now();
  VerifyOptions opt;
  opt.mc_samples = 10000;
  opt.seed = 20260801;
  bool ok = true;
  std::string detail;
  for (const Scenario& sc : canned_scenarios()) {
    for (const CheckResult& r : check_duality(sc, opt)) {
      if (r.name.find("gap_") == std::string::npos && r.name.find("oracle") == std::string::npos) continue;
      ok = ok && r.pass;
      if (!r.pass) detail += r.name + " stat=" + format_g17(r.statistic) + "; ";
    }
  }
  const double secs = seconds_since(t0);
  ok = ok && secs < 10.0;
  report(1, "duality gap bounds + discrete LP oracle, three families", ok,
         detail.empty() ? "runtime " + format_g17(secs) + " s" : detail);
}

// 2. Inconspicuousness on the linear-static equilibrium at 1e5 x 512.
void criterion_2() {
  const auto t0 = std::chrono::steady_clock::now();
  VerifyOptions opt;
  opt.n_paths = 100000;
  opt.n_steps = 512;
  opt.seed = 20260801;
  bool ok = true;
  std::string detail;
  for (const CheckResult& r : check_inconspicuous(linear_static_scenario(), opt)) {
    ok = ok && r.pass;
    detail += r.name.substr(r.name.rfind('.') + 1) + "=" + format_g17(r.statistic) + " ";
  }
  const double secs = seconds_since(t0);
  ok = ok && secs < 120.0;
  report(2, "KS of Y_T, increment autocorrelations, realized QV", ok, detail + "runtime " + format_g17(secs) + " s");
}

// 3. Terminal coupling: unprojected convergence order >= 0.4 over
//    n_steps in {64..1024} for each scenario; projected RMS <= 1e-12.
void criterion_3() {
  const auto t0 = std::chrono::steady_clock::now();
  VerifyOptions opt;
  opt.seed = 20260801;
  bool ok = true;
  std::string detail;
  for (const Scenario& sc : canned_scenarios()) {
    const ConvergenceStudy study = coupling_convergence(sc, opt, {64, 128, 256, 512, 1024}, 20000);
    const bool this_ok = study.coupling_order >= 0.4 && study.coupling_monotone;
    ok = ok && this_ok;
    detail += sc.name + " order=" + format_g17(study.coupling_order) + " ";
    VerifyOptions popt = opt;
    popt.n_paths = 20000;
    popt.n_steps = 512;
    const CheckResult proj = check_terminal_coupling(sc, popt, TerminalMode::kProjected);
    ok = ok && proj.pass;
    if (!proj.pass) detail += sc.name + " projected rms=" + format_g17(proj.statistic) + " ";
  }
  const double secs = seconds_since(t0);
  ok = ok && secs < 180.0;
  report(3, "coupling convergence order and projected exactness", ok, detail + "runtime " + format_g17(secs) + " s");
}

// 4. Price rationality: martingale z-scores, decreasing terminal identity RMS,
//    heat-equation residual <= 1e-5.
void criterion_4() {
  VerifyOptions opt;
  opt.n_paths = 100000;
  opt.n_steps = 512;
  opt.seed = 20260801;
  bool ok = true;
  std::string detail;
  for (const Scenario& sc : canned_scenarios()) {
    for (const CheckResult& r : check_price_martingale(sc, opt)) {
      ok = ok && r.pass;
      if (!r.pass) detail += r.name + "=" + format_g17(r.statistic) + " ";
    }
    const TransportSolution ts = solve_transport(sc.params, sc.family);
    const PricingRule rule(sc.params, ts);
    std::vector<double> ts_grid, ys_grid;
    for (int i = 1; i <= 7; ++i) ts_grid.push_back(sc.params.T * i / 8.0);
    for (int i = -4; i <= 4; ++i) ys_grid.push_back(0.6 * i);
    const double resid = heat_residual(rule, ts_grid, ys_grid);
    ok = ok && resid <= 1e-5;
    detail += sc.name + " heat=" + format_g17(resid) + " ";
  }
  report(4, "martingale z <= 3, terminal identity order, heat residual <= 1e-5", ok, detail);
}

// 5. Profit optimality on the linear-static scenario: wealth equals the dual
//    value within 3 SE; no canned deviation gains, at least one strictly loses.
void criterion_5() {
  VerifyOptions opt;
  opt.profit_paths = 100000;
  opt.profit_steps = 1024;
  opt.deviation_paths = 100000;
  opt.deviation_steps = 512;
  opt.seed = 20260801;
  bool ok = true;
  std::string detail;
  for (const CheckResult& r : check_profit_optimality(linear_static_scenario(), opt)) {
    ok = ok && r.pass;
    detail += r.name.substr(r.name.find("profit.") + 7) + "=" + format_g17(r.statistic) + " ";
  }
  report(5, "equilibrium wealth = E[gamma_c]; deviations never gain", ok, detail);
}

// 6. Filtering consistency: particle oracle vs closed form for linear and
//    linear-quadratic scenarios (well-posed filter variants: dynamic signal,
//    dispersed endowment); exact initial condition; terminal limit.
void criterion_6() {
  VerifyOptions opt;
  opt.filter_paths = 20;
  opt.filter_particles = 10000;
  opt.filter_steps = 1000;
  opt.seed = 20260801;
  bool ok = true;
  std::string detail;
  for (const Scenario& sc : {linear_static_scenario(), linquad_scenario()}) {
    for (const CheckResult& r : check_filter_closed_form(sc)) {
      ok = ok && r.pass;
      detail += r.name.substr(r.name.find("filter.") + 7) + "=" + format_g17(r.statistic) + " ";
    }
  }
  for (const Scenario& sc : {linear_dynamic_scenario(), linquad_dispersed_scenario()}) {
    for (const CheckResult& r : check_filter_particle(sc, opt)) {
      ok = ok && r.pass;
      detail += sc.name + "." + r.name.substr(r.name.find("filter.") + 7) + "=" + format_g17(r.statistic) + " ";
    }
  }
  report(6, "particle oracle within 3 SE; initial/terminal identities", ok, detail);
}

// 7. Cross-representation identity on a 20^3 grid per family.
void criterion_7() {
  bool ok = true;
  std::string detail;
  for (const Scenario& sc : canned_scenarios()) {
    const CheckResult r = check_cross_representation(sc);
    ok = ok && r.pass;
    detail += sc.name + "=" + format_g17(r.statistic) + " ";
  }
  report(7, "closed-form rate equals sigma^2 (d_y + d_zt) log rho within 1e-8", ok, detail);
}

// 8. CLI determinism: identical invocations produce byte-identical outputs.
void criterion_8(const std::string& cli) {
  if (cli.empty()) {
    report(8, "CLI byte-identical reruns", false, "no CLI binary path supplied");
    return;
  }
  namespace fs = std::filesystem;
  const fs::path base = fs::temp_directory_path() / "kyleot_acceptance";
  fs::remove_all(base);
  fs::create_directories(base);
  const std::string cfg_path = (base / "scenario.cfg").string();
  write_text_file(cfg_path,
                  "T = 1\nsigma = 1\nsigma_s = 0:0\nSigma0 = 1\nm_beta = 0\nsigma_beta = 0\n"
                  "family = linear\nseed = 7\nn_paths = 200\nn_steps = 64\nprojected = on\noracle = on\n");
  bool ok = true;
  std::string detail;
  for (const char* sub : {"solve", "simulate", "dump-grid"}) {
    const std::string out1 = (base / (std::string(sub) + "_1")).string();
    const std::string out2 = (base / (std::string(sub) + "_2")).string();
    const std::string cmd1 = "\"" + cli + "\" " + sub + " --config \"" + cfg_path + "\" --out \"" + out1 + "\" > /dev/null";
    const std::string cmd2 = "\"" + cli + "\" " + sub + " --config \"" + cfg_path + "\" --out \"" + out2 + "\" > /dev/null";
    if (std::system(cmd1.c_str()) != 0 || std::system(cmd2.c_str()) != 0) {
      ok = false;
      detail += std::string(sub) + " run failed; ";
      continue;
    }
    for (const auto& entry : fs::directory_iterator(out1)) {
      const std::string name = entry.path().filename().string();
      const std::string a = read_text_file(entry.path().string());
      const std::string b = read_text_file((fs::path(out2) / name).string());
      if (a != b) {
        ok = false;
        detail += std::string(sub) + "/" + name + " differs; ";
      }
    }
  }
  report(8, "CLI byte-identical reruns (solve, simulate, dump-grid)", ok, detail.empty() ? "3 subcommands" : detail);
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8(cli);
  if (failures) {
    std::printf("%d criterion/criteria FAILED\n", failures);
    return 1;
  }
  std::printf("all acceptance criteria passed\n");
  return 0;
}
