#pragma once

// HTTP retrieval of predicted structures with an on-disk cache.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <future>
#include <optional>
#include <string>
#include <vector>

#include <httplib.h>

#include "lforge/core/error.hpp"
#include "lforge/core/table.hpp"
#include "lforge/structure/pdb.hpp"

namespace lforge::structure {

inline constexpr const char* kEnvBaseUrl = "LFORGE_STRUCTURE_URL";
inline constexpr const char* kEnvCacheDir = "LFORGE_CACHE_DIR";
inline constexpr const char* kEnvOffline = "LFORGE_OFFLINE";

struct FetchOptions {
  std::string base_url = "https://alphafold.ebi.ac.uk/files";
  std::filesystem::path cache_dir = "structure_cache";
  bool offline = false;
  int timeout_seconds = 30;
};

// Environment variables override the given options.
inline FetchOptions apply_env(FetchOptions opts) {
  if (const char* v = std::getenv(kEnvBaseUrl); v && *v) opts.base_url = v;
  if (const char* v = std::getenv(kEnvCacheDir); v && *v) opts.cache_dir = v;
  if (const char* v = std::getenv(kEnvOffline); v && *v && std::string_view(v) != "0") opts.offline = true;
  return opts;
}

struct Url {
  std::string origin;  // scheme://host[:port]
  std::string path;    // without trailing slash
};

inline Url split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ValidationError("base URL lacks a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  Url out;
  if (path_start == std::string::npos) {
    out.origin = url;
  } else {
    out.origin = url.substr(0, path_start);
    out.path = url.substr(path_start);
  }
  while (!out.path.empty() && out.path.back() == '/') out.path.pop_back();
  return out;
}

inline std::filesystem::path cache_path(const FetchOptions& opts, const std::string& accession) {
  std::string name = accession;
  std::replace_if(name.begin(), name.end(), [](char c) { return c == '/' || c == '\\' || c == ':'; }, '_');
  return opts.cache_dir / name;
}

struct FetchCounters {
  std::atomic<int> cache_hits{0};
  std::atomic<int> network_requests{0};
};

// GET {base_url}/{accession}; the body is cached before parsing. A cached file
// is parsed without touching the network.
inline ModelStructure fetch_structure(const std::string& accession, const FetchOptions& opts,
                                      FetchCounters* counters = nullptr) {
  if (accession.empty()) throw ValidationError("empty accession");
  const auto cached = cache_path(opts, accession);
  if (std::filesystem::exists(cached)) {
    if (counters) ++counters->cache_hits;
    return parse_pdb(read_file(cached), accession);
  }
  if (opts.offline) throw FetchError(accession, "network disabled and " + accession + " is not cached");

  const auto url = split_url(opts.base_url);
  httplib::Client client(url.origin);
  client.set_connection_timeout(opts.timeout_seconds);
  client.set_read_timeout(opts.timeout_seconds);
  client.set_follow_location(true);
  if (counters) ++counters->network_requests;
  auto res = client.Get(url.path + "/" + accession);
  if (!res) throw FetchError(accession, "request for " + accession + " failed: " + httplib::to_string(res.error()));
  if (res->status != 200)
    throw FetchError(accession, "request for " + accession + " returned HTTP " + std::to_string(res->status));
  auto structure = parse_pdb(res->body, accession);
  write_file(cached, res->body);
  return structure;
}

struct FlaggedAccession {
  std::string accession;
  std::string reason;
};

struct FetchBatch {
  std::vector<ModelStructure> structures;  // input order, failures omitted
  std::vector<FlaggedAccession> flagged;
};

// Fetches accessions with at most `max_in_flight` concurrent requests. Failures
// are flagged for manual review instead of aborting the batch.
inline FetchBatch fetch_all(const std::vector<std::string>& accessions, const FetchOptions& opts,
                            std::size_t max_in_flight = 4, FetchCounters* counters = nullptr) {
  std::vector<std::optional<ModelStructure>> results(accessions.size());
  std::vector<std::string> errors(accessions.size());
  max_in_flight = std::max<std::size_t>(1, max_in_flight);
  for (std::size_t begin = 0; begin < accessions.size(); begin += max_in_flight) {
    const std::size_t end = std::min(accessions.size(), begin + max_in_flight);
    std::vector<std::future<void>> wave;
    for (std::size_t i = begin; i < end; ++i) {
      wave.push_back(std::async(std::launch::async, [&, i] {
        try {
          results[i] = fetch_structure(accessions[i], opts, counters);
        } catch (const Error& e) {
          errors[i] = e.what();
        }
      }));
    }
    for (auto& f : wave) f.get();
  }
  FetchBatch batch;
  for (std::size_t i = 0; i < accessions.size(); ++i) {
    if (results[i])
      batch.structures.push_back(std::move(*results[i]));
    else
      batch.flagged.push_back({accessions[i], errors[i]});
  }
  return batch;
}

}  // namespace lforge::structure
