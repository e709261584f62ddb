#pragma once

#include <cstdint>
#include <string>

#include "kyleot/market.hpp"
#include "kyleot/simulate.hpp"

namespace kyleot {

// Scenario file: UTF-8 "key = value" lines, '#' comments. Keys:
//   T, sigma, sigma_s (list "t:value,t:value,..."), Sigma0, m_beta,
//   sigma_beta, family (linear|activist|linquad), psi (linquad only),
//   seed, n_paths, n_steps, out, projected (on|off), oracle (on|off).
// Unknown keys are rejected; serialization round-trips losslessly.
struct ScenarioConfig {
  MarketParams market;
  FamilyTag family = FamilyTag::kLinear;
  double psi = 1.0;
  std::uint64_t seed = 1;
  long n_paths = 10000;
  int n_steps = 512;
  std::string out_dir = "out";
  bool projected = true;
  bool oracle = true;

  SurplusFamily make_family() const;  // canned payoffs: f = id, V = x^2

  bool operator==(const ScenarioConfig& other) const;
};

ScenarioConfig parse_scenario(const std::string& text);
ScenarioConfig load_scenario(const std::string& path);
std::string to_text(const ScenarioConfig& config);

}  // namespace kyleot
