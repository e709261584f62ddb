#include "kyleot/scenario.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>

#include "kyleot/io.hpp"

namespace kyleot {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double x;
  try {
    x = std::stod(v, &pos);
  } catch (...) {
    throw std::invalid_argument("scenario: bad number for key '" + key + "': " + v);
  }
  if (pos != v.size()) throw std::invalid_argument("scenario: trailing characters for key '" + key + "': " + v);
  return x;
}

long parse_long(const std::string& key, const std::string& v) {
  const double x = parse_double(key, v);
  const long l = static_cast<long>(x);
  if (static_cast<double>(l) != x) throw std::invalid_argument("scenario: integer expected for key '" + key + "'");
  return l;
}

bool parse_switch(const std::string& key, const std::string& v) {
  if (v == "on") return true;
  if (v == "off") return false;
  throw std::invalid_argument("scenario: key '" + key + "' expects on|off");
}

PiecewiseConstantSchedule parse_schedule(const std::string& v) {
  std::vector<double> t, val;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("scenario: sigma_s entries are t:value");
    t.push_back(parse_double("sigma_s", trim(item.substr(0, colon))));
    val.push_back(parse_double("sigma_s", trim(item.substr(colon + 1))));
  }
  return PiecewiseConstantSchedule(std::move(t), std::move(val));
}

std::string schedule_to_text(const PiecewiseConstantSchedule& s) {
  std::string out;
  for (std::size_t i = 0; i < s.breakpoints().size(); ++i) {
    if (i) out += ",";
    out += format_g17(s.breakpoints()[i]) + ":" + format_g17(s.values()[i]);
  }
  return out;
}

}  // namespace

SurplusFamily ScenarioConfig::make_family() const {
  switch (family) {
    case FamilyTag::kLinear: return SurplusFamily::linear(ScalarFunction::identity());
    case FamilyTag::kActivist: return SurplusFamily::activist(ScalarFunction::from_polynomial(Polynomial{{0.0, 0.0, 1.0}}));
    case FamilyTag::kLinearQuadratic: return SurplusFamily::linear_quadratic(psi);
  }
  throw std::logic_error("make_family: unknown family");
}

bool ScenarioConfig::operator==(const ScenarioConfig& other) const {
  return market.T == other.market.T && market.sigma == other.market.sigma &&
         market.sigma_s.breakpoints() == other.market.sigma_s.breakpoints() &&
         market.sigma_s.values() == other.market.sigma_s.values() && market.Sigma0 == other.market.Sigma0 &&
         market.m_beta == other.market.m_beta && market.sigma_beta == other.market.sigma_beta &&
         family == other.family && psi == other.psi && seed == other.seed && n_paths == other.n_paths &&
         n_steps == other.n_steps && out_dir == other.out_dir && projected == other.projected &&
         oracle == other.oracle;
}

ScenarioConfig parse_scenario(const std::string& text) {
  ScenarioConfig cfg;
  std::map<std::string, std::string> kv;
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("scenario: line " + std::to_string(line_no) + " is not 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (kv.count(key)) throw std::invalid_argument("scenario: duplicate key '" + key + "'");
    kv[key] = value;
  }

  bool psi_given = false;
  for (const auto& [key, value] : kv) {
    if (key == "T") cfg.market.T = parse_double(key, value);
    else if (key == "sigma") cfg.market.sigma = parse_double(key, value);
    else if (key == "sigma_s") cfg.market.sigma_s = parse_schedule(value);
    else if (key == "Sigma0") cfg.market.Sigma0 = parse_double(key, value);
    else if (key == "m_beta") cfg.market.m_beta = parse_double(key, value);
    else if (key == "sigma_beta") cfg.market.sigma_beta = parse_double(key, value);
    else if (key == "family") {
      if (value == "linear") cfg.family = FamilyTag::kLinear;
      else if (value == "activist") cfg.family = FamilyTag::kActivist;
      else if (value == "linquad") cfg.family = FamilyTag::kLinearQuadratic;
      else throw std::invalid_argument("scenario: family must be linear|activist|linquad");
    } else if (key == "psi") {
      cfg.psi = parse_double(key, value);
      psi_given = true;
    } else if (key == "seed") {
      try {
        std::size_t pos = 0;
        cfg.seed = std::stoull(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("");
      } catch (...) {
        throw std::invalid_argument("scenario: bad seed: " + value);
      }
    }
    else if (key == "n_paths") cfg.n_paths = parse_long(key, value);
    else if (key == "n_steps") cfg.n_steps = static_cast<int>(parse_long(key, value));
    else if (key == "out") cfg.out_dir = value;
    else if (key == "projected") cfg.projected = parse_switch(key, value);
    else if (key == "oracle") cfg.oracle = parse_switch(key, value);
    else throw std::invalid_argument("scenario: unknown key '" + key + "'");
  }
  if (psi_given && cfg.family != FamilyTag::kLinearQuadratic)
    throw std::invalid_argument("scenario: psi is only valid for family = linquad");
  return cfg;
}

ScenarioConfig load_scenario(const std::string& path) { return parse_scenario(read_text_file(path)); }

std::string to_text(const ScenarioConfig& cfg) {
  std::ostringstream os;
  os << "T = " << format_g17(cfg.market.T) << "\n";
  os << "sigma = " << format_g17(cfg.market.sigma) << "\n";
  os << "sigma_s = " << schedule_to_text(cfg.market.sigma_s) << "\n";
  os << "Sigma0 = " << format_g17(cfg.market.Sigma0) << "\n";
  os << "m_beta = " << format_g17(cfg.market.m_beta) << "\n";
  os << "sigma_beta = " << format_g17(cfg.market.sigma_beta) << "\n";
  os << "family = " << family_name(cfg.family) << "\n";
  if (cfg.family == FamilyTag::kLinearQuadratic) os << "psi = " << format_g17(cfg.psi) << "\n";
  os << "seed = " << cfg.seed << "\n";
  os << "n_paths = " << cfg.n_paths << "\n";
  os << "n_steps = " << cfg.n_steps << "\n";
  os << "out = " << cfg.out_dir << "\n";
  os << "projected = " << (cfg.projected ? "on" : "off") << "\n";
  os << "oracle = " << (cfg.oracle ? "on" : "off") << "\n";
  return os.str();
}

}  // namespace kyleot
