#pragma once

// Flat JSON pipeline configuration with command-line overrides.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "lforge/core/error.hpp"
#include "lforge/core/table.hpp"
#include "lforge/evolve/fitness.hpp"

#ifndef LFORGE_DATA_DIR
#define LFORGE_DATA_DIR "data"
#endif

namespace lforge::pipeline {

inline constexpr const char* kToolVersion = "0.1.0";

// Every recognised key with its default. Relative paths are resolved against
// the directory of the config file; empty paths mean "not given".
inline constexpr const char* kDefaultConfig = R"json({
  "output_dir": "lforge_out",
  "seed": 42,
  "threads": 0,

  "expression": "",
  "expression_orientation": "genes_as_rows",
  "expression_level": "exon",
  "probe_map": "",
  "annotation": "",
  "low_expression_threshold": 0.5,
  "hvg_count": 2000,

  "hvg_matrix": "",
  "beta_min": 1,
  "beta_max": 20,
  "beta": 0,
  "min_module_size": 5,
  "tree_cut": 0.75,
  "biomarker_count": 20,
  "exclusion_prefixes": ["HB"],
  "accession_map": "",

  "biomarkers": "",
  "accessions": [],
  "structure_url": "https://alphafold.ebi.ac.uk/files",
  "cache_dir": "",
  "offline": false,
  "min_plddt": 70.0,
  "max_in_flight": 4,
  "fetch_timeout_seconds": 30,

  "pocket_files": [],
  "top_pockets": 3,
  "hotspot_k": 4,
  "pocket_radius": 0.0,

  "hotspots": "",
  "fragment_library": "",
  "reaction_templates": "",
  "force_field": "",
  "reference_smiles": "",
  "population": 40,
  "generations": 20,
  "w_p": 0.45,
  "w_f": 0.35,
  "w_n": 0.15,
  "w_s": 0.2,
  "lambda_sa": 0.1,
  "p_crossover": 0.7,
  "p_mutation": 0.3,
  "p_reaction_first": 0.8,
  "top_k_report": 10,
  "tournament_size": 3,
  "max_heavy_atoms": 50,

  "candidates": "",

  "generation_stats": "",
  "top_k": "",
  "docking_energies": "",
  "histogram_bins": 10
})json";

class PipelineConfig {
 public:
  PipelineConfig() : values_(nlohmann::json::parse(kDefaultConfig)) {}

  static PipelineConfig from_json(const nlohmann::json& doc, std::filesystem::path base_dir = {}) {
    PipelineConfig cfg;
    cfg.base_dir_ = std::move(base_dir);
    if (!doc.is_object()) throw ParseError("config must be a JSON object");
    for (const auto& [key, value] : doc.items()) cfg.set(key, value);
    return cfg;
  }

  static PipelineConfig load(const std::filesystem::path& path) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.string() + ": " + e.what());
    }
    return from_json(doc, path.parent_path());
  }

  // Replaces a known key; numbers may not become strings or vice versa.
  void set(const std::string& key, const nlohmann::json& value) {
    if (!values_.contains(key)) throw ValidationError("unknown config key '" + key + "'");
    const auto& old = values_.at(key);
    const bool compatible = (old.is_number() && value.is_number()) || old.type() == value.type();
    if (!compatible) throw ValidationError("config key '" + key + "' has the wrong type");
    values_[key] = value;
  }

  // "key=value"; the value is read as JSON when possible, else as a string.
  void apply_override(const std::string& kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw ValidationError("override must look like key=value: '" + kv + "'");
    const std::string key = kv.substr(0, eq), raw = kv.substr(eq + 1);
    nlohmann::json value = nlohmann::json::parse(raw, nullptr, false);
    if (value.is_discarded() || (values_.contains(key) && values_.at(key).is_string())) value = raw;
    set(key, value);
  }

  const nlohmann::json& json() const { return values_; }
  const std::filesystem::path& base_dir() const { return base_dir_; }

  std::string str(const std::string& key) const { return values_.at(key).get<std::string>(); }
  double num(const std::string& key) const { return values_.at(key).get<double>(); }
  std::int64_t integer(const std::string& key) const {
    const double v = values_.at(key).get<double>();
    if (v != static_cast<double>(static_cast<std::int64_t>(v))) throw ValidationError("config key '" + key + "' must be an integer");
    return static_cast<std::int64_t>(v);
  }
  bool flag(const std::string& key) const { return values_.at(key).get<bool>(); }
  std::vector<std::string> list(const std::string& key) const { return values_.at(key).get<std::vector<std::string>>(); }

  std::filesystem::path resolve(const std::filesystem::path& p) const {
    if (p.empty() || p.is_absolute()) return p;
    return base_dir_ / p;
  }

  // Path-valued key, or empty when unset.
  std::filesystem::path path(const std::string& key) const { return resolve(str(key)); }

  std::filesystem::path output_dir() const { return path("output_dir"); }

  // Path-valued key, defaulting to a file in the output directory.
  std::filesystem::path path_or_output(const std::string& key, const std::string& file) const {
    const auto p = path(key);
    return p.empty() ? output_dir() / file : p;
  }

  std::filesystem::path data_file(const std::string& key, const std::string& file) const {
    const auto p = path(key);
    return p.empty() ? std::filesystem::path(LFORGE_DATA_DIR) / file : p;
  }

  std::uint64_t seed() const {
    const auto s = integer("seed");
    if (s < 0) throw ValidationError("seed must be non-negative");
    return static_cast<std::uint64_t>(s);
  }

  evolve::GAConfig ga() const {
    evolve::GAConfig g;
    g.population = static_cast<int>(integer("population"));
    g.generations = static_cast<int>(integer("generations"));
    g.hotspot_k = static_cast<int>(integer("hotspot_k"));
    g.weights = {num("w_p"), num("w_f"), num("w_n"), num("w_s"), num("lambda_sa")};
    g.p_crossover = num("p_crossover");
    g.p_mutation = num("p_mutation");
    g.p_reaction_first = num("p_reaction_first");
    g.seed = seed();
    g.top_k_report = static_cast<int>(integer("top_k_report"));
    g.tournament_size = static_cast<int>(integer("tournament_size"));
    g.max_heavy_atoms = static_cast<int>(integer("max_heavy_atoms"));
    g.threads = static_cast<unsigned>(std::max<std::int64_t>(0, integer("threads")));
    g.validate();
    return g;
  }

 private:
  nlohmann::json values_;
  std::filesystem::path base_dir_;
};

}  // namespace lforge::pipeline
