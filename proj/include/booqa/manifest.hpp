#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include <json.hpp>

namespace booqa {

inline constexpr std::string_view kToolVersion = "0.3.0";

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

// Provenance of one produced artifact. Timings live outside the manifest so
// that equal inputs give byte-identical artifacts.
struct RunManifest {
  std::string command;
  std::string config_hash;
  std::map<std::string, std::string> input_digests;  // label -> sha256
  std::uint64_t seed = 0;
  std::string tool_version{kToolVersion};

  void add_input(const std::string& label, const std::filesystem::path& path);
  nlohmann::ordered_json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);
};

// Writes "<artifact>.manifest.json".
void write_manifest_sidecar(const std::filesystem::path& artifact, const RunManifest& manifest);
// Writes "<artifact>.timings.json" with one entry per named stage in seconds.
void write_timings_sidecar(const std::filesystem::path& artifact, const std::map<std::string, double>& seconds);

}  // namespace booqa
