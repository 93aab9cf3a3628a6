#include "abspec/manifest.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "abspec/errors.hpp"

namespace abspec {

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t fnv1a64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("manifest: cannot hash missing file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return fnv1a64(ss.str());
}

void append_manifest(const std::string& path, const ManifestRecord& rec) {
  nlohmann::json j;
  j["command"] = rec.command;
  j["config"] = rec.config_snapshot;
  j["version"] = rec.version;
  j["wall_ms"] = rec.wall_ms;
  j["inputs_hash"] = rec.inputs_hash;
  nlohmann::json outs = nlohmann::json::array();
  for (const auto& [p, h] : rec.outputs) {
    outs.push_back({{"path", p}, {"fnv1a64", h}});
  }
  j["outputs"] = outs;
  std::ofstream out(path, std::ios::app);
  if (!out) throw ConfigError("manifest: cannot append to " + path);
  out << j.dump() << "\n";
}

ManifestRecord load_last_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("manifest: cannot open " + path);
  std::string line, last;
  while (std::getline(in, line)) {
    if (!line.empty()) last = line;
  }
  if (last.empty()) throw ConfigError("manifest: " + path + " is empty");
  nlohmann::json j = nlohmann::json::parse(last, nullptr, false);
  if (j.is_discarded())
    throw ConfigError("manifest: " + path + " holds malformed JSON");
  ManifestRecord rec;
  rec.command = j.value("command", "");
  rec.config_snapshot = j.value("config", "");
  rec.version = j.value("version", "");
  rec.wall_ms = j.value("wall_ms", 0.0);
  rec.inputs_hash = j.value("inputs_hash", 0ULL);
  if (j.contains("outputs")) {
    for (const auto& o : j["outputs"])
      rec.outputs.emplace_back(o.value("path", ""), o.value("fnv1a64", 0ULL));
  }
  return rec;
}

bool looks_like_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) return false;
  char c = 0;
  in >> c;
  return c == '{';
}

}  // namespace abspec
