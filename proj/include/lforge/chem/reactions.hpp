#pragma once

// Two-component linking reactions described by restricted patterns.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lforge/chem/merge.hpp"
#include "lforge/chem/pattern.hpp"
#include "lforge/chem/sanitize.hpp"
#include "lforge/core/table.hpp"

namespace lforge::chem {

struct ReactantSpec {
  Pattern pattern;                // map 1 (reactant A) or map 2 (reactant B) is the reacting atom
  std::vector<Pattern> excludes;  // reacting atom must not be the mapped atom of any of these
};

struct ReactionTemplate {
  std::string name;
  ReactantSpec a;
  ReactantSpec b;
  std::vector<int> remove;        // map numbers of leaving atoms
  std::optional<Molecule> linker; // carries [1*] (to A) and [2*] (to B)
};

struct ReactionTemplateSet {
  std::vector<ReactionTemplate> templates;
};

inline constexpr const char* kDefaultReactionTemplates = R"json({
  "templates": [
    {"name": "amide_coupling",
     "reactant_a": "[N;A;!H0:1]", "exclude_a": ["[N:1]-C=O", "[N:1]-S=O"],
     "reactant_b": "[C:2](=O)-[O;H1:3]", "remove": [3]},
    {"name": "urea_formation",
     "reactant_a": "[N;A;!H0:1]", "exclude_a": ["[N:1]-C=O", "[N:1]-S=O"],
     "reactant_b": "[N;A;!H0:2]", "exclude_b": ["[N:2]-C=O", "[N:2]-S=O"],
     "linker": "O=C([1*])[2*]"},
    {"name": "sulfonamide_formation",
     "reactant_a": "[N;A;!H0:1]", "exclude_a": ["[N:1]-C=O", "[N:1]-S=O"],
     "reactant_b": "[S:2](=O)(=O)-[Cl:3]", "remove": [3]},
    {"name": "n_arylation",
     "reactant_a": "[N;A;!H0:1]", "exclude_a": ["[N:1]-C=O", "[N:1]-S=O"],
     "reactant_b": "[c:2]-[Cl,Br,I:3]", "remove": [3]},
    {"name": "ether_coupling",
     "reactant_a": "[O;A;H1:1]-[#6]", "exclude_a": ["[O:1]-C=O"],
     "reactant_b": "[C;X4:2]-[Cl,Br,I:3]", "remove": [3]}
  ]
})json";

inline ReactionTemplateSet parse_reaction_templates(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("templates") || !doc.at("templates").is_array())
    throw ParseError("reaction template file needs a 'templates' array");
  ReactionTemplateSet set;
  for (std::size_t k = 0; k < doc.at("templates").size(); ++k) {
    const auto& t = doc.at("templates")[k];
    const std::string where = "templates[" + std::to_string(k) + "]";
    auto str = [&](const char* key) {
      if (!t.contains(key) || !t.at(key).is_string()) throw ParseError(where + "." + key + " must be a string");
      return t.at(key).get<std::string>();
    };
    auto list = [&](const char* key) {
      std::vector<Pattern> ps;
      if (t.contains(key))
        for (const auto& s : t.at(key)) ps.emplace_back(s.get<std::string>());
      return ps;
    };
    ReactionTemplate r;
    r.name = str("name");
    r.a = {Pattern(str("reactant_a")), list("exclude_a")};
    r.b = {Pattern(str("reactant_b")), list("exclude_b")};
    if (r.a.pattern.atom_with_map(1) < 0) throw ParseError(where + ".reactant_a needs map 1");
    if (r.b.pattern.atom_with_map(2) < 0) throw ParseError(where + ".reactant_b needs map 2");
    if (t.contains("remove"))
      for (const auto& v : t.at("remove")) {
        const int map = v.get<int>();
        if (r.a.pattern.atom_with_map(map) < 0 && r.b.pattern.atom_with_map(map) < 0)
          throw ParseError(where + ".remove names unknown map " + std::to_string(map));
        r.remove.push_back(map);
      }
    if (t.contains("linker")) r.linker = parse_smiles(str("linker"));
    set.templates.push_back(std::move(r));
  }
  return set;
}

inline ReactionTemplateSet default_reaction_templates() {
  return parse_reaction_templates(nlohmann::json::parse(kDefaultReactionTemplates));
}

inline ReactionTemplateSet load_reaction_templates(const std::filesystem::path& path) {
  try {
    return parse_reaction_templates(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

struct ReactionStats {
  int applied = 0;
  int sanitize_failures = 0;
};

namespace detail {

struct ReactantHit {
  std::vector<int> match;
  int atom;
};

inline std::vector<ReactantHit> reactant_hits(const Molecule& m, const ReactantSpec& spec, int map) {
  std::vector<ReactantHit> out;
  const int p = spec.pattern.atom_with_map(map);
  for (auto& match : spec.pattern.match(m)) {
    const int atom = match[static_cast<std::size_t>(p)];
    bool excluded = false;
    for (const auto& ex : spec.excludes) {
      const int q = ex.atom_with_map(map);
      for (const auto& em : ex.match(m))
        if (em[static_cast<std::size_t>(q)] == atom) excluded = true;
      if (excluded) break;
    }
    if (!excluded) out.push_back({std::move(match), atom});
  }
  return out;
}

// Valence the reacting atom can spend: a removed neighbour frees its bond,
// otherwise one hydrogen is consumed.
inline bool spend(Molecule& m, int atom, const std::vector<int>& removed) {
  for (int r : removed)
    if (m.bond_between(atom, r)) return true;
  if (m.atom(atom).hcount < 1) return false;
  --m.atom(atom).hcount;
  return true;
}

inline std::optional<Molecule> apply_template(const ReactionTemplate& t, const Molecule& a, const Molecule& b,
                                              const ReactantHit& ha, const ReactantHit& hb, ReactionStats* stats) {
  Molecule m = a;
  const int off = m.append(b);
  const int xa = ha.atom, xb = hb.atom + off;
  std::vector<int> removed;
  for (int map : t.remove) {
    if (const int p = t.a.pattern.atom_with_map(map); p >= 0) removed.push_back(ha.match[static_cast<std::size_t>(p)]);
    if (const int p = t.b.pattern.atom_with_map(map); p >= 0) removed.push_back(hb.match[static_cast<std::size_t>(p)] + off);
  }
  if (!spend(m, xa, removed) || !spend(m, xb, removed)) return std::nullopt;
  std::vector<int> doomed = removed;
  if (t.linker) {
    const int loff = m.append(*t.linker);
    int l1 = -1, l2 = -1;
    for (int i = loff; i < m.atom_count(); ++i) {
      if (!m.atom(i).is_dummy()) continue;
      doomed.push_back(i);
      const int nb = m.neighbors(i).front().atom;
      if (m.atom(i).label == 1) l1 = nb;
      if (m.atom(i).label == 2) l2 = nb;
    }
    if (l1 < 0 || l2 < 0) return std::nullopt;
    if (m.bond_between(xa, l1) || m.bond_between(xb, l2)) return std::nullopt;
    m.add_bond(xa, l1, 1);
    m.add_bond(xb, l2, 1);
  } else {
    if (m.bond_between(xa, xb)) return std::nullopt;
    m.add_bond(xa, xb, 1);
  }
  m.remove_atoms(doomed);
  if (m.components().size() != 1) return std::nullopt;
  try {
    auto out = sanitize(std::move(m));
    if (stats) ++stats->applied;
    return out;
  } catch (const SanitizeError&) {
    if (stats) ++stats->sanitize_failures;
    return std::nullopt;
  }
}

}  // namespace detail

// First template (in set order) that applies, trying (a, b) then (b, a) as the
// reactant roles; within a role the lowest-index matches are used first.
inline std::optional<Molecule> reaction_link(const Molecule& a, const Molecule& b, const ReactionTemplateSet& set,
                                             ReactionStats* stats = nullptr, std::string* used = nullptr) {
  for (const auto& t : set.templates) {
    for (int role = 0; role < 2; ++role) {
      const Molecule& first = role == 0 ? a : b;
      const Molecule& second = role == 0 ? b : a;
      const auto hits_a = detail::reactant_hits(first, t.a, 1);
      if (hits_a.empty()) continue;
      const auto hits_b = detail::reactant_hits(second, t.b, 2);
      for (const auto& ha : hits_a)
        for (const auto& hb : hits_b)
          if (auto p = detail::apply_template(t, first, second, ha, hb, stats)) {
            if (used) *used = t.name;
            return p;
          }
    }
  }
  return std::nullopt;
}

}  // namespace lforge::chem
