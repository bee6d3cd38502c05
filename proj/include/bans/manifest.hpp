#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace bans {

inline constexpr const char* kVersion = "1.0.0";

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t x);

/// FNV-1a 64 of the file contents, as 16 hex digits.
std::string file_checksum(const std::filesystem::path& path);

/// Record of one invocation.  The id is a hash of the command, the canonical
/// (sorted-key) configuration, the input checksums and the version, so two
/// invocations with the same id produce the same outputs.
struct RunManifest {
  std::string command;
  nlohmann::json config = nlohmann::json::object();
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> inputs;  // path, checksum
  std::vector<std::string> outputs;
  double wall_seconds = 0.0;

  void add_input(const std::filesystem::path& path);
  std::string id() const;
  nlohmann::json to_json() const;
};

}  // namespace bans
