#pragma once

// Run manifest: per-stage config snapshot, timings, input digests, warnings.

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>
#include <openssl/evp.h>

#include "lforge/core/error.hpp"
#include "lforge/core/table.hpp"

namespace lforge::pipeline {

inline std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 digest failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[md[i] >> 4];
    out += kHex[md[i] & 0xF];
  }
  return out;
}

inline std::string file_digest(const std::filesystem::path& p) { return sha256_hex(read_file(p)); }

struct StageRecord {
  std::string stage;
  nlohmann::json config;
  double wall_seconds = 0.0;
  std::vector<std::pair<std::string, std::string>> inputs;  // (path, sha256)
  std::vector<std::pair<std::string, std::string>> outputs;  // (path, sha256)
  std::vector<std::string> warnings;
  nlohmann::json details = nlohmann::json::object();
  std::string cache_key;
  bool cached = false;
  int exit_code = 0;
  std::string error;

  void add_input(const std::filesystem::path& p) {
    if (!std::filesystem::is_regular_file(p)) return;
    for (const auto& [q, d] : inputs)
      if (q == p.string()) return;
    inputs.emplace_back(p.string(), file_digest(p));
  }
};

inline nlohmann::json to_json(const StageRecord& r) {
  nlohmann::json in = nlohmann::json::object(), out = nlohmann::json::object();
  for (const auto& [p, d] : r.inputs) in[p] = d;
  for (const auto& [p, d] : r.outputs) out[p] = d;
  nlohmann::json j = {{"config", r.config},
                      {"seed", r.config.value("seed", 0)},
                      {"wall_seconds", r.wall_seconds},
                      {"inputs", in},
                      {"outputs", out},
                      {"warnings", r.warnings},
                      {"details", r.details},
                      {"cache_key", r.cache_key},
                      {"cached", r.cached},
                      {"exit_code", r.exit_code}};
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

inline nlohmann::json read_manifest(const std::filesystem::path& manifest) {
  if (!std::filesystem::exists(manifest)) return nlohmann::json::object();
  auto doc = nlohmann::json::parse(read_file(manifest), nullptr, false);
  return doc.is_object() ? doc : nlohmann::json::object();
}

// True when a previous successful run with the same key left every output
// unchanged on disk.
inline bool cache_hit(const nlohmann::json& manifest, const std::string& stage, const std::string& key) {
  if (!manifest.contains("stages") || !manifest["stages"].contains(stage)) return false;
  const auto& e = manifest["stages"][stage];
  if (e.value("exit_code", -1) != 0 || e.value("cache_key", "") != key) return false;
  const auto& outs = e.value("outputs", nlohmann::json::object());
  if (outs.empty()) return false;
  for (const auto& [p, d] : outs.items())
    if (!std::filesystem::is_regular_file(p) || file_digest(p) != d.get<std::string>()) return false;
  return true;
}

// Merges the stage entry into manifest.json, keeping other stages' entries.
inline void record_stage(const std::filesystem::path& manifest, const StageRecord& r, const std::string& version) {
  nlohmann::json doc = read_manifest(manifest);
  doc["tool"] = "lforge";
  doc["version"] = version;
  doc["stages"][r.stage] = to_json(r);
  write_file(manifest, doc.dump(2) + "\n");
}

}  // namespace lforge::pipeline
