#include "bans/manifest.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "bans/errors.hpp"

namespace bans {

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis) {
  std::uint64_t h = basis;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

std::string file_checksum(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::PathError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return hex64(fnv1a64(ss.str()));
}

void RunManifest::add_input(const std::filesystem::path& path) { inputs.emplace_back(path.string(), file_checksum(path)); }

std::string RunManifest::id() const {
  std::string canon = command + "\n" + config.dump() + "\n" + std::to_string(seed) + "\n" + kVersion + "\n";
  for (const auto& [path, sum] : inputs) canon += sum + "\n";
  return hex64(fnv1a64(canon));
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json j;
  j["manifest_id"] = id();
  j["command"] = command;
  j["version"] = kVersion;
  j["seed"] = seed;
  j["config"] = config;
  j["inputs"] = nlohmann::json::array();
  for (const auto& [path, sum] : inputs) j["inputs"].push_back({{"path", path}, {"checksum", sum}});
  j["outputs"] = outputs;
  j["wall_seconds"] = wall_seconds;
  return j;
}

}  // namespace bans
