#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace abspec {

std::uint64_t fnv1a64(const std::string& data);
std::uint64_t fnv1a64_file(const std::string& path);

// One append-only JSON-lines record per run.
struct ManifestRecord {
  std::string command;
  std::string config_snapshot;  // canonical key=value lines
  std::string version;
  double wall_ms = 0.0;
  std::vector<std::pair<std::string, std::uint64_t>> outputs;
  std::uint64_t inputs_hash = 0;
};

void append_manifest(const std::string& path, const ManifestRecord& rec);
ManifestRecord load_last_manifest(const std::string& path);
bool looks_like_manifest(const std::string& path);

}  // namespace abspec
