#pragma once

// Fragment library loading: CSV (name,class,smiles[,source]) or JSON.

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "lforge/chem/canonical.hpp"
#include "lforge/chem/sanitize.hpp"
#include "lforge/core/error.hpp"
#include "lforge/core/table.hpp"

namespace lforge::chem {

struct FragmentEntry {
  std::string name;
  std::string cls;
  std::string smiles;
  std::string canonical;
  Molecule mol;
  std::string source;
};

struct RejectedFragment {
  std::string name;
  std::string smiles;
  std::string reason;
};

struct FragmentLibrary {
  std::vector<FragmentEntry> entries;
  std::vector<RejectedFragment> rejected;
  int duplicates = 0;

  std::vector<Molecule> molecules() const {
    std::vector<Molecule> out;
    for (const auto& e : entries) out.push_back(e.mol);
    return out;
  }
};

struct FragmentRow {
  std::string name;
  std::string cls;
  std::string smiles;
  std::string source;
};

inline FragmentLibrary build_fragment_library(const std::vector<FragmentRow>& rows) {
  FragmentLibrary lib;
  std::set<std::string> seen;
  for (const auto& r : rows) {
    try {
      Molecule m = parse_smiles(r.smiles);
      if (m.empty()) throw ValidationError("empty SMILES");
      std::string can = write_smiles(m);
      if (!seen.insert(can).second) {
        ++lib.duplicates;
        continue;
      }
      lib.entries.push_back({r.name, r.cls, r.smiles, std::move(can), std::move(m), r.source});
    } catch (const ParseError& e) {
      lib.rejected.push_back({r.name, r.smiles, std::string("ParseError: ") + e.what()});
    } catch (const SanitizeError& e) {
      lib.rejected.push_back({r.name, r.smiles, std::string("SanitizeError: ") + e.what()});
    } catch (const ValidationError& e) {
      lib.rejected.push_back({r.name, r.smiles, std::string("ValidationError: ") + e.what()});
    }
  }
  if (lib.entries.empty()) throw EmptyResultError("fragment library has no valid entries");
  return lib;
}

inline std::vector<FragmentRow> parse_fragment_csv(std::string_view text) {
  auto rows = parse_table(text, ',', true);
  if (rows.empty()) return {};
  const auto& head = rows.front().fields;
  auto col = [&](const char* name) {
    for (std::size_t i = 0; i < head.size(); ++i)
      if (trim(head[i]) == name) return static_cast<int>(i);
    return -1;
  };
  const int cn = col("name"), cc = col("class"), cs = col("smiles"), cr = col("source");
  if (cs < 0) throw ParseError("fragment CSV needs a 'smiles' column", rows.front().line);
  std::vector<FragmentRow> out;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const auto& f = rows[k].fields;
    auto get = [&](int c) { return c >= 0 && c < static_cast<int>(f.size()) ? std::string(trim(f[static_cast<std::size_t>(c)])) : std::string(); };
    if (cs >= static_cast<int>(f.size())) throw ParseError("missing smiles field", rows[k].line);
    out.push_back({get(cn), get(cc), get(cs), get(cr)});
  }
  return out;
}

inline std::vector<FragmentRow> parse_fragment_json(const nlohmann::json& doc) {
  const auto& arr = doc.is_object() && doc.contains("fragments") ? doc.at("fragments") : doc;
  if (!arr.is_array()) throw ParseError("fragment JSON must be an array or have a 'fragments' array");
  std::vector<FragmentRow> out;
  for (const auto& f : arr) {
    if (!f.contains("smiles")) throw ParseError("fragment entry without 'smiles'");
    out.push_back({f.value("name", ""), f.value("class", ""), f.at("smiles").get<std::string>(), f.value("source", "")});
  }
  return out;
}

inline FragmentLibrary load_fragment_library(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  if (path.extension() == ".json") {
    try {
      return build_fragment_library(parse_fragment_json(nlohmann::json::parse(text)));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.string() + ": " + e.what());
    }
  }
  return build_fragment_library(parse_fragment_csv(text));
}

}  // namespace lforge::chem
