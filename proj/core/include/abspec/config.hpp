#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "abspec/geometry.hpp"
#include "abspec/spectral.hpp"

namespace abspec {

// Flat key-value configuration ("key = value" lines, '#' comments, dotted
// keys). Errors carry the file origin, line and field name.
class Config {
 public:
  Config() = default;
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text,
                             const std::string& origin = "<string>");

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key) const;
  int get_int(const std::string& key, int fallback) const;
  std::vector<double> get_doubles(const std::string& key) const;

  // Canonical sorted "key = value" lines; what manifests snapshot.
  std::string snapshot() const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  [[noreturn]] void missing(const std::string& key) const;
  std::map<std::string, std::string> values_;
  std::map<std::string, int> lines_;
  std::string origin_ = "<empty>";
};

Domain domain_from_config(const Config& cfg);
std::optional<Pole> pole_from_config(const Config& cfg);
SolveOptions solve_options_from_config(const Config& cfg);

}  // namespace abspec
