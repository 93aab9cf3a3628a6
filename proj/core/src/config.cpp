#include "abspec/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace abspec {

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str(), path);
}

Config Config::parse_string(const std::string& text,
                            const std::string& origin) {
  Config cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    lineno++;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto l = line.find_first_not_of(" \t\r");
    if (l == std::string::npos) continue;
    auto r = line.find_last_not_of(" \t\r");
    line = line.substr(l, r - l + 1);
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": expected 'key = value', got '" + line + "'");
    auto trim = [](std::string s) {
      auto a = s.find_first_not_of(" \t");
      auto b = s.find_last_not_of(" \t");
      return a == std::string::npos ? std::string()
                                    : s.substr(a, b - a + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": empty key");
    cfg.values_[key] = value;
    cfg.lines_[key] = lineno;
  }
  return cfg;
}

void Config::set(const std::string& key, const std::string& value) {
  values_[key] = value;
  lines_[key] = 0;
}

void Config::missing(const std::string& key) const {
  throw ConfigError("config " + origin_ + ": missing required field '" + key +
                    "'");
}

std::string Config::get_string(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) missing(key);
  return it->second;
}

std::string Config::get_string(const std::string& key,
                               const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key) const {
  std::string s = get_string(key);
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw ConfigError("config " + origin_ + ": field '" + key +
                      "' (line " + std::to_string(lines_.count(key) ? lines_.at(key) : 0) +
                      ") is not a number: '" + s + "'");
  return v;
}

double Config::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

int Config::get_int(const std::string& key) const {
  double v = get_double(key);
  int i = (int)v;
  if ((double)i != v)
    throw ConfigError("config " + origin_ + ": field '" + key +
                      "' must be an integer");
  return i;
}

int Config::get_int(const std::string& key, int fallback) const {
  return has(key) ? get_int(key) : fallback;
}

std::vector<double> Config::get_doubles(const std::string& key) const {
  std::string s = get_string(key);
  std::istringstream in(s);
  std::vector<double> out;
  double v;
  while (in >> v) out.push_back(v);
  if (out.empty())
    throw ConfigError("config " + origin_ + ": field '" + key +
                      "' holds no numbers");
  return out;
}

std::string Config::snapshot() const {
  std::ostringstream os;
  for (const auto& [k, v] : values_) os << k << " = " << v << "\n";
  return os.str();
}

Domain domain_from_config(const Config& cfg) {
  DomainSpec spec;
  spec.kind = cfg.get_string("domain.kind");
  if (spec.kind == "sector") {
    spec.aperture = cfg.get_double("domain.aperture");
    spec.radius = cfg.get_double("domain.radius", 1.0);
  } else if (spec.kind == "polygon") {
    auto nums = cfg.get_doubles("domain.vertices");
    if (nums.size() % 2 != 0)
      throw ConfigError(
          "config: field 'domain.vertices' needs an even number of entries");
    for (size_t i = 0; i < nums.size(); i += 2)
      spec.vertices.push_back({nums[i], nums[i + 1]});
  }
  return build_domain(spec);
}

std::optional<Pole> pole_from_config(const Config& cfg) {
  if (!cfg.has("pole")) return std::nullopt;
  auto nums = cfg.get_doubles("pole");
  if (nums.size() != 2)
    throw ConfigError("config: field 'pole' must hold two coordinates");
  return Pole({nums[0], nums[1]});
}

SolveOptions solve_options_from_config(const Config& cfg) {
  SolveOptions opt;
  opt.h = cfg.get_double("mesh.h", opt.h);
  opt.order = cfg.get_int("mesh.order", opt.order);
  opt.tol = cfg.get_double("solve.tol", opt.tol);
  opt.grading.gamma = cfg.get_double("mesh.grading", opt.grading.gamma);
  opt.grading.radius = cfg.get_double("mesh.grading_radius", 0.0);
  opt.grading.floor_size = cfg.get_double("mesh.grading_floor", 0.0);
  opt.budget = (std::size_t)cfg.get_int("mesh.budget", (int)opt.budget);
  return opt;
}

}  // namespace abspec
