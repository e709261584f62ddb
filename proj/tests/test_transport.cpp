#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "kyleot/errors.hpp"
#include "kyleot/gauss_hermite.hpp"
#include "kyleot/rng.hpp"
#include "kyleot/transport.hpp"
#include "kyleot/transport_oracle.hpp"

using namespace kyleot;

namespace {

MarketParams base_params(double Sigma0 = 1.0, double sigma_beta = 0.0, double m_beta = 0.0) {
  MarketParams p;
  p.T = 1.0;
  p.sigma = 1.0;
  p.sigma_s = PiecewiseConstantSchedule::constant(0.0);
  p.Sigma0 = Sigma0;
  p.sigma_beta = sigma_beta;
  p.m_beta = m_beta;
  return p;
}

// Exhaustive search over permutation couplings of equal-size uniform
// marginals; the independent certificate for the LP oracle.
double best_permutation_value(const std::vector<std::vector<double>>& surplus) {
  const int n = static_cast<int>(surplus.size());
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = -1e300;
  do {
    double v = 0.0;
    for (int i = 0; i < n; ++i) v += surplus[i][perm[i]];
    best = std::max(best, v);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / n;
}

}  // namespace

TEST_CASE("gauss-hermite rules integrate gaussian moments exactly") {
  for (int order : {8, 64}) {
    const auto even = [](double x) { return x * x * x * x; };
    CHECK(gauss_expectation(even, 0.0, 1.0, order) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(gauss_expectation([](double x) { return x * x; }, 0.0, 2.0, order) == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(gauss_expectation([](double) { return 1.0; }, 0.0, 1.0, order) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(gauss_expectation([](double x) { return x; }, 1.5, 3.0, order) == doctest::Approx(1.5).epsilon(1e-12));
  }
}

TEST_CASE("linear solve: unit Kyle lambda, identity map and potential") {
  const auto fam = SurplusFamily::linear(ScalarFunction::identity());
  const auto ts = solve_linear(base_params(), fam);
  CHECK(ts.scalars.lambda == doctest::Approx(1.0).epsilon(1e-15));
  for (double y : {-2.0, -0.3, 0.0, 1.1}) CHECK(ts.dgamma(y) == doctest::Approx(y).epsilon(1e-12));
  for (double s : {-1.0, 0.2, 2.0}) CHECK(ts.map(0.0, s) == doctest::Approx(s).epsilon(1e-15));
  // Normalized potential: gamma(y) = y^2/2 - 1/2.
  CHECK(ts.gamma(0.0) == doctest::Approx(-0.5).epsilon(1e-10));
  CHECK(ts.gamma(1.0) == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(ts.ot_value == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("linear solve: lambda = 2 halves the map and matches the noise variance") {
  const auto fam = SurplusFamily::linear(ScalarFunction::identity());
  const auto ts = solve_linear(base_params(2.0), fam);
  CHECK(ts.scalars.lambda == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(ts.map(0.0, 1.0) == doctest::Approx(0.5).epsilon(1e-15));
  // Var I(S_T) = Sigma_T^2 / lambda^2 = sigma^2 T.
  CHECK(4.0 / (ts.scalars.lambda * ts.scalars.lambda) == doctest::Approx(1.0));
}

TEST_CASE("linear solve: cubic payoff gives cubic dgamma") {
  const auto fam = SurplusFamily::linear(ScalarFunction::from_polynomial(Polynomial{{0.0, 0.0, 0.0, 1.0}}));
  const auto ts = solve_linear(base_params(), fam);
  for (double y : {-1.5, 0.0, 0.7, 2.0}) CHECK(ts.dgamma(y) == doctest::Approx(y * y * y).epsilon(1e-12));
  REQUIRE(ts.dgamma_poly.has_value());
  CHECK(ts.dgamma_poly->degree() == 3);
}

TEST_CASE("linear solve: degenerate signal throws") {
  MarketParams p = base_params(0.0);
  CHECK_THROWS_AS(solve_linear(p, SurplusFamily::linear(ScalarFunction::identity())), DegenerateSignalError);
}

TEST_CASE("activist solve: lambda = 2 example") {
  MarketParams p = base_params(0.0, std::sqrt(3.0));
  const auto fam = SurplusFamily::activist(ScalarFunction::from_polynomial(Polynomial{{0.0, 0.0, 1.0}}));
  const auto ts = solve_activist(p, fam);
  CHECK(ts.scalars.lambda == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(ts.map(1.0, 0.0) == doctest::Approx(-0.5).epsilon(1e-14));
  // Var I(Zt_T) = (sigma_beta^2 + sigma^2 T)/lambda^2 = sigma^2 T.
  CHECK(p.shifted_noise_var(p.T) / 4.0 == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(solve_activist(base_params(), fam), SingularMapError);
}

TEST_CASE("linquad solve: canonical scalars and conditional law") {
  const auto fam = SurplusFamily::linear_quadratic(1.0);
  const auto ts = solve_linquad(base_params(), fam);
  const double r2 = std::sqrt(2.0);
  CHECK(ts.scalars.eps == doctest::Approx(1.0 / r2).epsilon(1e-15));
  CHECK(ts.map(0.0, 1.0) == doctest::Approx(1.0 / r2).epsilon(1e-15));
  CHECK(ts.map(1.0, 0.0) == doctest::Approx(-1.0 / r2).epsilon(1e-15));
  // Conditional law of (Zt_T, S_T) given Y_T = y: mean (-y/sqrt2, y/sqrt2),
  // covariance [[1,1],[1,1]]/2.
  const double y = 0.8;
  CHECK(ts.coupling_given_y.mean0[0] + y * ts.coupling_given_y.slope[0] == doctest::Approx(-y / r2).epsilon(1e-14));
  CHECK(ts.coupling_given_y.mean0[1] + y * ts.coupling_given_y.slope[1] == doctest::Approx(y / r2).epsilon(1e-14));
  CHECK(ts.coupling_given_y.cov.xx == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(ts.coupling_given_y.cov.xy == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(ts.coupling_given_y.cov.yy == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("linquad solve: psi -> 0 recovers the linear map") {
  const auto ts = solve_linquad(base_params(1.0, 0.0, 0.0), SurplusFamily::linear_quadratic(1e-12));
  for (double s : {-2.0, 0.4, 1.0}) CHECK(ts.map(0.7, s) == doctest::Approx(s).epsilon(1e-10));
}

TEST_CASE("duality gap: nonnegative everywhere, zero on the graph, FOC") {
  struct Case {
    MarketParams p;
    SurplusFamily fam;
  };
  std::vector<Case> cases;
  cases.push_back({base_params(), SurplusFamily::linear(ScalarFunction::identity())});
  cases.push_back({base_params(1.5), SurplusFamily::linear(ScalarFunction::from_polynomial(Polynomial{{0.0, 0.0, 0.0, 1.0}}))});
  cases.push_back({base_params(0.0, std::sqrt(3.0), 0.4),
                   SurplusFamily::activist(ScalarFunction::from_polynomial(Polynomial{{0.0, 0.0, 1.0}}))});
  cases.push_back({base_params(1.0, 0.5, -0.3), SurplusFamily::linear_quadratic(0.9)});

  for (const auto& c : cases) {
    const auto ts = solve_transport(c.p, c.fam);
    Rng rng(99);
    const double z_std = std::sqrt(c.p.shifted_noise_var(c.p.T));
    const double s_std = std::sqrt(c.p.signal_var_total());
    double gap_min = 1e300, graph_max = 0.0, foc_max = 0.0;
    for (int i = 0; i < 10000; ++i) {
      const double zt = -c.p.m_beta + z_std * rng.normal();
      const double s = s_std * rng.normal();
      const double y = rng.normal();
      gap_min = std::min(gap_min, ts.duality_gap(zt, s, y));
      const double yi = ts.map(zt, s);
      graph_max = std::max(graph_max, std::abs(ts.duality_gap(zt, s, yi)));
      foc_max = std::max(foc_max, std::abs(ts.dgamma(yi) - c.fam.surplus_dy(zt, s, yi)));
    }
    CHECK(gap_min >= -1e-9);
    CHECK(graph_max <= 1e-9);
    CHECK(foc_max <= 1e-7);
  }
}

TEST_CASE("finite-difference payoff derivative keeps the FOC within 1e-4") {
  // Same cubic payoff but without an analytic derivative.
  const auto fam = SurplusFamily::linear(ScalarFunction([](double s) { return s * s * s; }));
  const auto ts = solve_linear(base_params(), fam);
  Rng rng(7);
  double foc_max = 0.0;
  for (int i = 0; i < 2000; ++i) {
    const double s = rng.normal();
    const double yi = ts.map(0.0, s);
    foc_max = std::max(foc_max, std::abs(ts.dgamma(yi) - fam.surplus_dy(0.0, s, yi)));
  }
  CHECK(foc_max <= 1e-4);
}

TEST_CASE("pushforward of the map matches the noise law (mean and variance)") {
  for (const auto& [p, fam] : {std::pair{base_params(1.7), SurplusFamily::linear(ScalarFunction::identity())},
                               std::pair{base_params(0.0, 1.2, 0.3),
                                         SurplusFamily::activist(ScalarFunction::from_polynomial(Polynomial{{0.0, 0.0, 1.0}}))},
                               std::pair{base_params(0.9, 0.4, -0.2), SurplusFamily::linear_quadratic(1.3)}}) {
    const auto ts = solve_transport(p, fam);
    Rng rng(2024);
    const double z_std = std::sqrt(p.shifted_noise_var(p.T));
    const double s_std = std::sqrt(p.signal_var_total());
    const long n = 100000;
    double m = 0.0, v = 0.0;
    for (long i = 0; i < n; ++i) {
      const double y = ts.map(-p.m_beta + z_std * rng.normal(), s_std * rng.normal());
      m += y;
      v += y * y;
    }
    m /= n;
    v = v / n - m * m;
    const double sig2T = p.sigma * p.sigma * p.T;
    CHECK(std::abs(m) <= 4.0 * std::sqrt(sig2T) / std::sqrt(static_cast<double>(n)));
    CHECK(std::abs(v - sig2T) <= 0.02 * sig2T);
  }
}

TEST_CASE("ot value identity: E[surplus on graph] = E[gamma_c] + 0") {
  const auto p = base_params();
  const auto fam = SurplusFamily::linear(ScalarFunction::identity());
  const auto ts = solve_transport(p, fam);
  Rng rng(31);
  const long n = 100000;
  double primal = 0.0, dual = 0.0, graph_gamma = 0.0, graph_gamma2 = 0.0;
  for (long i = 0; i < n; ++i) {
    const double zt = rng.normal();
    const double s = rng.normal();
    const double yi = ts.map(zt, s);
    primal += fam.surplus(zt, s, yi);
    dual += ts.gamma_c(zt, s);
    const double g = ts.gamma(yi);
    graph_gamma += g;
    graph_gamma2 += g * g;
  }
  primal /= n;
  dual /= n;
  graph_gamma /= n;
  const double se = std::sqrt((graph_gamma2 / n - graph_gamma * graph_gamma) / n);
  CHECK(std::abs(primal - dual) <= 3.0 * se);
  CHECK(primal == doctest::Approx(ts.ot_value).epsilon(0.02));
}

TEST_CASE("discrete oracle: single atom returns the surplus at the pair") {
  const auto c = solve_discrete_ot({{3.25}}, {1.0}, {1.0});
  CHECK(c.value == doctest::Approx(3.25));
  CHECK(c.at(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("discrete oracle: activist 2x2 prefers the anti-monotone pairing") {
  // zt in {-1, 1}, y in {-2, 2}, V(x) = x^2, surplus (y - zt)^2.
  std::vector<std::vector<double>> s(2, std::vector<double>(2));
  const double zts[2] = {-1.0, 1.0}, ys[2] = {-2.0, 2.0};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) s[i][j] = (ys[j] - zts[i]) * (ys[j] - zts[i]);
  const auto c = solve_discrete_ot(s, {0.5, 0.5}, {0.5, 0.5});
  CHECK(c.value == doctest::Approx(9.0));
  CHECK(c.at(0, 1) == doctest::Approx(0.5));
  CHECK(c.at(1, 0) == doctest::Approx(0.5));
}

TEST_CASE("discrete oracle agrees with permutation enumeration on random instances") {
  Rng rng(555);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 3 + static_cast<int>(rng.next_u64() % 4);  // 3..6
    std::vector<std::vector<double>> s(n, std::vector<double>(n));
    for (auto& row : s)
      for (auto& v : row) v = 2.0 * rng.normal();
    const std::vector<double> w(n, 1.0 / n);
    const auto lp = solve_discrete_ot(s, w, w);
    CHECK(lp.value == doctest::Approx(best_permutation_value(s)).epsilon(1e-10));
  }
}

TEST_CASE("discrete oracle: marginals are respected with uneven weights") {
  Rng rng(777);
  std::vector<std::vector<double>> s(4, std::vector<double>(5));
  for (auto& row : s)
    for (auto& v : row) v = rng.normal();
  const std::vector<double> mu{0.1, 0.4, 0.3, 0.2};
  const std::vector<double> nu{0.25, 0.05, 0.3, 0.2, 0.2};
  const auto lp = solve_discrete_ot(s, mu, nu);
  for (int i = 0; i < 4; ++i) {
    double r = 0.0;
    for (int j = 0; j < 5; ++j) r += lp.at(i, j);
    CHECK(r == doctest::Approx(mu[i]).epsilon(1e-10));
  }
  for (int j = 0; j < 5; ++j) {
    double c = 0.0;
    for (int i = 0; i < 4; ++i) c += lp.at(i, j);
    CHECK(c == doctest::Approx(nu[j]).epsilon(1e-10));
  }
}

TEST_CASE("discrete oracle enforces the atom cap") {
  std::vector<std::vector<double>> s(13, std::vector<double>(2, 0.0));
  CHECK_THROWS(solve_discrete_ot(s, std::vector<double>(13, 1.0 / 13), {0.5, 0.5}));
}

TEST_CASE("gh quantization of the linear instance reproduces the dual value") {
  const auto p = base_params();
  const auto fam = SurplusFamily::linear(ScalarFunction::identity());
  const auto ts = solve_transport(p, fam);
  const QuantizedGaussian q = gh_quantize(0.0, 1.0, 8);
  std::vector<std::vector<double>> s(8, std::vector<double>(8));
  std::vector<double> y_atoms(8);
  for (int j = 0; j < 8; ++j) y_atoms[j] = ts.map(0.0, q.point[j]);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) s[i][j] = fam.surplus(0.0, q.point[i], y_atoms[j]);
  const auto lp = solve_discrete_ot(s, q.weight, q.weight);
  CHECK(std::abs(lp.value - ts.ot_value) <= 5e-2);
}
