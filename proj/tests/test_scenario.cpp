#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "kyleot/io.hpp"
#include "kyleot/scenario.hpp"

using namespace kyleot;

TEST_CASE("scenario parses the documented schema") {
  const std::string text =
      "# static Kyle\n"
      "T = 1\n"
      "sigma = 1\n"
      "sigma_s = 0:0.5, 0.5:1.25\n"
      "Sigma0 = 1\n"
      "m_beta = 0.25\n"
      "sigma_beta = 0.5\n"
      "family = linquad\n"
      "psi = 0.75\n"
      "seed = 42\n"
      "n_paths = 1000\n"
      "n_steps = 128\n"
      "out = results\n"
      "projected = off\n"
      "oracle = on\n";
  const ScenarioConfig cfg = parse_scenario(text);
  CHECK(cfg.market.T == 1.0);
  CHECK(cfg.market.sigma_s.at(0.25) == 0.5);
  CHECK(cfg.market.sigma_s.at(0.75) == 1.25);
  CHECK(cfg.family == FamilyTag::kLinearQuadratic);
  CHECK(cfg.psi == 0.75);
  CHECK(cfg.seed == 42);
  CHECK(cfg.n_paths == 1000);
  CHECK(cfg.n_steps == 128);
  CHECK(cfg.out_dir == "results");
  CHECK(!cfg.projected);
  CHECK(cfg.oracle);
}

TEST_CASE("round-trip through the text format is lossless") {
  ScenarioConfig cfg;
  cfg.market.T = 2.5;
  cfg.market.sigma = 0.7;
  cfg.market.sigma_s = PiecewiseConstantSchedule({0.0, 1.0}, {0.3, 0.9});
  cfg.market.Sigma0 = 1.1;
  cfg.market.m_beta = -0.2;
  cfg.market.sigma_beta = 0.4;
  cfg.family = FamilyTag::kLinearQuadratic;
  cfg.psi = 1.3;
  cfg.seed = 987654321123456789ull;
  cfg.n_paths = 12345;
  cfg.n_steps = 77;
  cfg.out_dir = "somewhere";
  cfg.projected = false;
  cfg.oracle = false;
  const ScenarioConfig back = parse_scenario(to_text(cfg));
  CHECK(back == cfg);
  CHECK(to_text(back) == to_text(cfg));
}

TEST_CASE("unknown keys are rejected") {
  CHECK_THROWS_WITH_AS(parse_scenario("T = 1\nbogus = 2\n"), doctest::Contains("unknown key"),
                       std::invalid_argument);
}

TEST_CASE("psi outside linquad is rejected") {
  CHECK_THROWS(parse_scenario("family = linear\npsi = 1\n"));
}

TEST_CASE("malformed lines and duplicates are rejected") {
  CHECK_THROWS(parse_scenario("T 1\n"));
  CHECK_THROWS(parse_scenario("T = 1\nT = 2\n"));
  CHECK_THROWS(parse_scenario("T = abc\n"));
  CHECK_THROWS(parse_scenario("projected = yes\n"));
}

TEST_CASE("format_g17 keeps full double precision") {
  const double x = 0.1234567890123456789;
  CHECK(std::stod(format_g17(x)) == x);
}
