#pragma once

// Joining fragments at attachment points or free valences, with sanitization.

#include <optional>
#include <vector>

#include "lforge/chem/brics.hpp"
#include "lforge/chem/molecule.hpp"
#include "lforge/chem/sanitize.hpp"

namespace lforge::chem {

// Replaces every dummy atom by a hydrogen on its neighbour.
inline Molecule cap_dummies(Molecule m) {
  std::vector<int> dummies;
  for (int i = 0; i < m.atom_count(); ++i) {
    if (!m.atom(i).is_dummy()) continue;
    dummies.push_back(i);
    for (const auto& n : m.neighbors(i)) m.atom(n.atom).hcount += m.bond(n.bond).order == 0 ? 1 : m.bond(n.bond).order;
  }
  if (!dummies.empty()) m.remove_atoms(dummies);
  return m;
}

struct Junction {
  enum class Kind { kCompatibleDummies, kAnyDummies, kDummyToHydrogen, kHydrogens };
  Kind kind;
  int a;  // atom in the first molecule (a dummy for dummy junctions)
  int b;  // atom in the second molecule
};

inline bool has_free_valence(const Molecule& m, int i) { return m.atom(i).is_heavy() && m.atom(i).hcount > 0; }

// Candidate junctions in preference order: complementary attachment labels,
// any attachment pair, attachment point to a hydrogen-bearing atom, then two
// hydrogen-bearing atoms, each by ascending atom index.
inline std::vector<Junction> junctions(const Molecule& a, const Molecule& b) {
  std::vector<Junction> out;
  const auto da = attachment_points(a), db = attachment_points(b);
  for (const auto& [i, li] : da)
    for (const auto& [j, lj] : db)
      if (compatible_labels(li, lj)) out.push_back({Junction::Kind::kCompatibleDummies, i, j});
  for (const auto& [i, li] : da)
    for (const auto& [j, lj] : db)
      if (!compatible_labels(li, lj)) out.push_back({Junction::Kind::kAnyDummies, i, j});
  if (db.empty())
    for (const auto& [i, li] : da)
      for (int j = 0; j < b.atom_count(); ++j)
        if (has_free_valence(b, j)) out.push_back({Junction::Kind::kDummyToHydrogen, i, j});
  if (da.empty())
    for (const auto& [j, lj] : db)
      for (int i = 0; i < a.atom_count(); ++i)
        if (has_free_valence(a, i)) out.push_back({Junction::Kind::kDummyToHydrogen, i, j});
  if (da.empty() && db.empty())
    for (int i = 0; i < a.atom_count(); ++i)
      for (int j = 0; j < b.atom_count(); ++j)
        if (has_free_valence(a, i) && has_free_valence(b, j)) out.push_back({Junction::Kind::kHydrogens, i, j});
  return out;
}

// Joins two fragments through a junction, keeping the remaining dummies.
// Returns nullopt if the result cannot be sanitized.
inline std::optional<Molecule> join_at(const Molecule& a, const Molecule& b, const Junction& j) {
  Molecule m = a;
  const int off = m.append(b);
  const int ja = j.a, jb = j.b + off;
  std::vector<int> doomed;
  auto anchor = [&](int x) {
    if (m.atom(x).is_dummy()) {
      doomed.push_back(x);
      return m.neighbors(x).front().atom;
    }
    if (m.atom(x).hcount < 1) return -1;
    --m.atom(x).hcount;
    return x;
  };
  if (m.degree(ja) == 0 && m.atom(ja).is_dummy()) return std::nullopt;
  if (m.degree(jb) == 0 && m.atom(jb).is_dummy()) return std::nullopt;
  const int x = anchor(ja), y = anchor(jb);
  if (x < 0 || y < 0 || x == y || m.bond_between(x, y)) return std::nullopt;
  m.add_bond(x, y, 1);
  if (!doomed.empty()) m.remove_atoms(doomed);
  try {
    return sanitize(std::move(m));
  } catch (const SanitizeError&) {
    return std::nullopt;
  }
}

// First junction (in preference order) that yields a valid molecule; dummies kept.
inline std::optional<Molecule> join_fragments(const Molecule& a, const Molecule& b) {
  for (const auto& j : junctions(a, b))
    if (auto m = join_at(a, b, j)) return m;
  return std::nullopt;
}

// Joins and caps remaining attachment points; nullopt when no valence-legal
// junction exists.
inline std::optional<Molecule> safe_merge(const Molecule& a, const Molecule& b) {
  for (const auto& j : junctions(a, b)) {
    auto joined = join_at(a, b, j);
    if (!joined) continue;
    try {
      return sanitize(cap_dummies(std::move(*joined)));
    } catch (const SanitizeError&) {
    }
  }
  return std::nullopt;
}

}  // namespace lforge::chem
