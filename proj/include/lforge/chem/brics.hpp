#pragma once

// Subset of the BRICS retrosynthetic cleavage rules. Each cut leaves a pair of
// labelled attachment points [n*]; labels 2k-1 and 2k are complementary.

#include <algorithm>
#include <set>
#include <utility>
#include <vector>

#include "lforge/chem/molecule.hpp"
#include "lforge/chem/pattern.hpp"
#include "lforge/chem/sanitize.hpp"

namespace lforge::chem {

struct BricsRule {
  const char* name;
  const char* pattern;  // map 1 and map 2 mark the cleaved bond
  int label_1;
  int label_2;
  bool once_per_map2;   // at most one cut per atom carrying map 2
};

inline constexpr BricsRule kBricsRules[] = {
    {"amide", "[C:1](=O)-!@[N:2]", 1, 2, false},
    {"ester", "[C:1](=O)-!@[O;D2:2]", 3, 4, false},
    {"ring_linker", "[R:1]-!@[C;X4;!R;D2,D3,D4:2]", 5, 6, false},
    {"ether", "[R:1]-!@[O;D2;!R:2]-!@[R]", 7, 8, true},
    {"sulfonamide", "[S:1](=O)(=O)-!@[N:2]", 9, 10, false},
};

inline bool compatible_labels(int a, int b) {
  if (a <= 0 || b <= 0) return false;
  return std::min(a, b) % 2 == 1 && std::max(a, b) == std::min(a, b) + 1;
}

struct BricsCut {
  int bond;
  int atom_1;  // receives label_1
  int atom_2;  // receives label_2
  int label_1;
  int label_2;
};

inline const std::vector<Pattern>& brics_patterns() {
  static const std::vector<Pattern> ps = [] {
    std::vector<Pattern> v;
    for (const auto& r : kBricsRules) v.emplace_back(r.pattern);
    return v;
  }();
  return ps;
}

// Cleavable bonds in rule order; a bond claimed by an earlier rule is not
// reconsidered.
inline std::vector<BricsCut> brics_bonds(const Molecule& m) {
  std::vector<BricsCut> cuts;
  std::set<int> claimed;
  const auto& ps = brics_patterns();
  for (std::size_t r = 0; r < ps.size(); ++r) {
    const auto& rule = kBricsRules[r];
    const int p1 = ps[r].atom_with_map(1), p2 = ps[r].atom_with_map(2);
    std::set<int> used_map2;
    for (const auto& match : ps[r].match(m)) {
      const int a = match[static_cast<std::size_t>(p1)], b = match[static_cast<std::size_t>(p2)];
      const auto bond = m.bond_between(a, b);
      if (!bond || claimed.count(*bond)) continue;
      if (rule.once_per_map2 && used_map2.count(b)) continue;
      claimed.insert(*bond);
      used_map2.insert(b);
      cuts.push_back({*bond, a, b, rule.label_1, rule.label_2});
    }
  }
  std::sort(cuts.begin(), cuts.end(), [](const BricsCut& x, const BricsCut& y) { return x.bond < y.bond; });
  return cuts;
}

// Breaks the given cuts, capping both ends with labelled dummy atoms, and
// returns the connected pieces (ordered by their lowest original atom).
inline std::vector<Molecule> apply_cuts(const Molecule& m, const std::vector<BricsCut>& cuts) {
  if (cuts.empty()) return {m};
  Molecule broken;
  for (const auto& a : m.atoms()) broken.add_atom(a);
  std::set<int> cut_bonds;
  for (const auto& c : cuts) cut_bonds.insert(c.bond);
  for (int b = 0; b < m.bond_count(); ++b) {
    if (cut_bonds.count(b)) continue;
    const auto& bond = m.bond(b);
    broken.add_bond(bond.a, bond.b, bond.order, bond.aromatic);
  }
  for (const auto& c : cuts) {
    Atom d1;
    d1.element = 0;
    d1.label = c.label_1;
    Atom d2 = d1;
    d2.label = c.label_2;
    broken.add_bond(c.atom_1, broken.add_atom(d1), 1);
    broken.add_bond(c.atom_2, broken.add_atom(d2), 1);
  }
  std::vector<Molecule> out;
  for (const auto& comp : broken.components()) out.push_back(sanitize(broken.subgraph(comp)));
  return out;
}

inline std::vector<Molecule> brics_decompose(const Molecule& m) { return apply_cuts(m, brics_bonds(m)); }

// Original atom indices of each piece, in the same order as apply_cuts.
inline std::vector<std::vector<int>> piece_atoms(const Molecule& m, const std::vector<BricsCut>& cuts) {
  Molecule broken;
  for (const auto& a : m.atoms()) broken.add_atom(a);
  std::set<int> cut_bonds;
  for (const auto& c : cuts) cut_bonds.insert(c.bond);
  for (int b = 0; b < m.bond_count(); ++b)
    if (!cut_bonds.count(b)) broken.add_bond(m.bond(b).a, m.bond(b).b, m.bond(b).order, m.bond(b).aromatic);
  return broken.components();
}

// Dummy atoms of a fragment with their labels, in atom order.
inline std::vector<std::pair<int, int>> attachment_points(const Molecule& m) {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < m.atom_count(); ++i)
    if (m.atom(i).is_dummy()) out.emplace_back(i, m.atom(i).label);
  return out;
}

}  // namespace lforge::chem
