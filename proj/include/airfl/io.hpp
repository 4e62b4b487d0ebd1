#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "airfl/common.hpp"
#include "airfl/scenario.hpp"
#include "airfl/version.hpp"

namespace airfl {

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (const char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

// Stable digest of the fully resolved config (nlohmann keeps object keys
// sorted, so the dump is canonical).
inline std::string scenario_hash(const nlohmann::json& resolved) {
  return hex64(fnv1a64(resolved.dump()));
}

struct RunManifest {
  std::string config_path;
  std::string hash;        // digest of the resolved config
  std::string subcommand;
  std::string out_dir;
  std::string timestamp;
  std::string version = kVersion;
};

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline void write_manifest(const RunManifest& manifest, const std::string& path) {
  nlohmann::json j;
  j["config_path"] = manifest.config_path;
  j["scenario_hash"] = manifest.hash;
  j["subcommand"] = manifest.subcommand;
  j["output_dir"] = manifest.out_dir;
  j["timestamp"] = manifest.timestamp;
  j["version"] = manifest.version;
  std::ofstream out(path, std::ios::binary);
  require(out.good(), "write_manifest: cannot open " + path);
  out << j.dump(2) << '\n';
}

inline void write_json(const nlohmann::json& j, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), "write_json: cannot open " + path);
  out << j.dump(2) << '\n';
}

inline void ensure_directory(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  require(!ec, "cannot create output directory " + dir + ": " + ec.message());
}

}  // namespace airfl
