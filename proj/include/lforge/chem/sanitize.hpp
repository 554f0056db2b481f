#pragma once

// Hydrogen assignment, kekulization, valence checks and aromaticity perception.

#include <algorithm>
#include <string>
#include <string_view>
#include <vector>

#include "lforge/chem/molecule.hpp"
#include "lforge/chem/smiles.hpp"
#include "lforge/core/error.hpp"

namespace lforge::chem {

// Hydrogen count a SMILES reader infers for an unbracketed atom in its current
// bonding. Aromatic bonds count 1 and an aromatic atom reserves one more
// valence unit for its share of the pi system.
inline int implied_hydrogens(const Molecule& m, int i) {
  const auto& a = m.atom(i);
  if (a.is_dummy()) return 0;
  const auto vals = allowed_valences(a.element, a.charge);
  if (vals.empty()) return 0;
  int sum = 0;
  for (const auto& n : m.neighbors(i)) {
    const auto& b = m.bond(n.bond);
    sum += (b.aromatic || b.order == 0) && a.aromatic ? 1 : (b.order == 0 ? 1 : b.order);
  }
  if (a.aromatic) {
    const int lv = vals.front();
    return sum + 1 <= lv ? lv - sum - 1 : 0;
  }
  for (int v : vals)
    if (v >= sum) return v - sum;
  return 0;
}

namespace detail {

inline void assign_hydrogens(Molecule& m) {
  for (int i = 0; i < m.atom_count(); ++i) {
    if (!m.atom(i).implicit_h) continue;
    const int h = implied_hydrogens(m, i);
    auto& a = m.atom(i);
    a.hcount = h;
    a.implicit_h = false;
  }
}

// Finds a perfect matching of the atoms that need one double bond over the
// pending aromatic bonds, by backtracking from the most constrained atom.
class Kekulizer {
 public:
  explicit Kekulizer(Molecule& m) : m_(m) {}

  void run() {
    const int n = m_.atom_count();
    need_.assign(static_cast<std::size_t>(n), false);
    bool any = false;
    for (int i = 0; i < n; ++i) {
      int fixed = m_.atom(i).hcount, pending = 0;
      for (const auto& nb : m_.neighbors(i)) {
        const int o = m_.bond(nb.bond).order;
        if (o == 0)
          ++pending;
        else
          fixed += o;
      }
      if (pending == 0) continue;
      any = true;
      const auto vals = allowed_valences(m_.atom(i).element, m_.atom(i).charge);
      const int total = fixed + pending;
      int target = -1;
      for (int v : vals)
        if (v >= total) {
          target = v;
          break;
        }
      if (target < 0) throw SanitizeError("aromatic atom exceeds its valence", i);
      need_[static_cast<std::size_t>(i)] = target - total >= 1;
    }
    if (!any) return;
    matched_.assign(static_cast<std::size_t>(n), -1);
    if (!solve()) {
      int culprit = -1;
      for (int i = 0; i < n && culprit < 0; ++i)
        if (need_[static_cast<std::size_t>(i)]) culprit = i;
      throw SanitizeError("cannot kekulize aromatic system", culprit);
    }
    for (int b = 0; b < m_.bond_count(); ++b)
      if (m_.bond(b).order == 0) m_.bond(b).order = 1;
    for (int i = 0; i < n; ++i) {
      const int b = matched_[static_cast<std::size_t>(i)];
      if (b >= 0) m_.bond(b).order = 2;
    }
  }

 private:
  std::vector<int> options(int i) const {
    std::vector<int> out;
    for (const auto& nb : m_.neighbors(i)) {
      if (m_.bond(nb.bond).order != 0) continue;
      if (!need_[static_cast<std::size_t>(nb.atom)] || matched_[static_cast<std::size_t>(nb.atom)] >= 0) continue;
      out.push_back(nb.bond);
    }
    return out;
  }

  bool solve() {
    int pick = -1;
    std::vector<int> best;
    for (int i = 0; i < m_.atom_count(); ++i) {
      if (!need_[static_cast<std::size_t>(i)] || matched_[static_cast<std::size_t>(i)] >= 0) continue;
      auto opts = options(i);
      if (opts.empty()) return false;
      if (pick < 0 || opts.size() < best.size()) {
        pick = i;
        best = std::move(opts);
      }
    }
    if (pick < 0) return true;
    for (int b : best) {
      const int other = m_.bond(b).other(pick);
      matched_[static_cast<std::size_t>(pick)] = b;
      matched_[static_cast<std::size_t>(other)] = b;
      if (solve()) return true;
      matched_[static_cast<std::size_t>(pick)] = -1;
      matched_[static_cast<std::size_t>(other)] = -1;
    }
    return false;
  }

  Molecule& m_;
  std::vector<bool> need_;
  std::vector<int> matched_;
};

inline void check_valences(const Molecule& m) {
  for (int i = 0; i < m.atom_count(); ++i) {
    const auto& a = m.atom(i);
    if (a.is_dummy()) continue;
    if (a.hcount < 0) throw SanitizeError("negative hydrogen count", i);
    const auto maxv = max_valence(a.element, a.charge);
    if (!maxv)
      throw SanitizeError("unsupported charge state " + std::to_string(a.charge) + " on " +
                              std::string(symbol_of(a.element)),
                          i);
    if (m.valence(i) > *maxv)
      throw SanitizeError(std::string(symbol_of(a.element)) + " valence " + std::to_string(m.valence(i)) +
                              " exceeds " + std::to_string(*maxv),
                          i);
  }
}

inline constexpr int kNotAromatic = -1;

// Pi electrons an atom donates to a ring, or kNotAromatic.
inline int pi_electrons(const Molecule& m, const RingInfo& rings, int i) {
  const auto& a = m.atom(i);
  if (!aromatic_capable(a.element)) return kNotAromatic;
  int ring_double = 0, exo_double_hetero = 0, exo_other = 0;
  for (const auto& nb : m.neighbors(i)) {
    const auto& b = m.bond(nb.bond);
    if (b.order == 3) return kNotAromatic;
    if (b.order != 2) continue;
    if (rings.bond_in_ring[static_cast<std::size_t>(nb.bond)]) {
      ++ring_double;
    } else {
      const int z = m.atom(nb.atom).element;
      if (z == 7 || z == 8 || z == 16)
        ++exo_double_hetero;
      else
        ++exo_other;
    }
  }
  if (exo_other > 0 || ring_double > 1) return kNotAromatic;
  if (ring_double == 1) return exo_double_hetero == 0 ? 1 : kNotAromatic;
  if (exo_double_hetero == 1) return 0;
  if (exo_double_hetero > 1) return kNotAromatic;
  const int connections = m.degree(i) + a.hcount;
  switch (a.element) {
    case 6:
      if (a.charge == -1 && connections == 3) return 2;
      if (a.charge == 1 && connections == 3) return 0;
      return kNotAromatic;
    case 7:
    case 15:
      if (a.charge == 0 && connections == 3) return 2;
      if (a.charge == -1 && connections == 2) return 2;
      return kNotAromatic;
    case 8:
    case 16:
    case 34:
      if (a.charge == 0 && connections == 2) return 2;
      return kNotAromatic;
    case 5:
      if (a.charge == 0 && connections == 3) return 0;
      return kNotAromatic;
    default:
      return kNotAromatic;
  }
}

inline bool huckel(const Molecule& m, const RingInfo& rings, const std::vector<int>& atoms) {
  int e = 0;
  for (int i : atoms) {
    const int p = pi_electrons(m, rings, i);
    if (p == kNotAromatic) return false;
    e += p;
  }
  return e % 4 == 2;
}

// Marks rings satisfying 4n+2 as aromatic, then pairs of fused rings (sharing
// one bond) whose combined perimeter does.
inline void perceive_aromaticity(Molecule& m) {
  const auto rings = m.ring_info();
  std::vector<bool> atom_arom(static_cast<std::size_t>(m.atom_count()), false);
  std::vector<bool> bond_arom(static_cast<std::size_t>(m.bond_count()), false);
  std::vector<bool> ring_arom(rings->atom_rings.size(), false);
  auto mark = [&](std::size_t r) {
    ring_arom[r] = true;
    for (int a : rings->atom_rings[r]) atom_arom[static_cast<std::size_t>(a)] = true;
    for (int b : rings->bond_rings[r]) bond_arom[static_cast<std::size_t>(b)] = true;
  };
  for (std::size_t r = 0; r < rings->atom_rings.size(); ++r)
    if (huckel(m, *rings, rings->atom_rings[r])) mark(r);
  for (std::size_t r = 0; r < rings->atom_rings.size(); ++r) {
    for (std::size_t s = r + 1; s < rings->atom_rings.size(); ++s) {
      if (ring_arom[r] && ring_arom[s]) continue;
      const auto& br = rings->bond_rings[r];
      const auto& bs = rings->bond_rings[s];
      int shared = 0;
      for (int b : br)
        if (std::find(bs.begin(), bs.end(), b) != bs.end()) ++shared;
      if (shared != 1) continue;
      std::vector<int> atoms = rings->atom_rings[r];
      for (int a : rings->atom_rings[s])
        if (std::find(atoms.begin(), atoms.end(), a) == atoms.end()) atoms.push_back(a);
      if (huckel(m, *rings, atoms)) {
        mark(r);
        mark(s);
      }
    }
  }
  for (int i = 0; i < m.atom_count(); ++i) m.atom(i).aromatic = atom_arom[static_cast<std::size_t>(i)];
  for (int b = 0; b < m.bond_count(); ++b) m.bond(b).aromatic = bond_arom[static_cast<std::size_t>(b)];
  m.set_ring_info(rings);
}

}  // namespace detail

// Derives hydrogens, kekulizes, validates valences and perceives aromaticity.
// Idempotent on its own output.
inline Molecule sanitize(Molecule m) {
  std::vector<bool> declared(static_cast<std::size_t>(m.atom_count()));
  for (int i = 0; i < m.atom_count(); ++i) declared[static_cast<std::size_t>(i)] = m.atom(i).aromatic;
  for (int b = 0; b < m.bond_count(); ++b) {
    const auto& bond = m.bond(b);
    if (bond.order == 0 && !(m.atom(bond.a).aromatic && m.atom(bond.b).aromatic))
      throw SanitizeError("aromatic bond between non-aromatic atoms", bond.a);
  }
  detail::assign_hydrogens(m);
  detail::Kekulizer(m).run();
  detail::check_valences(m);
  detail::perceive_aromaticity(m);
  for (int i = 0; i < m.atom_count(); ++i)
    if (declared[static_cast<std::size_t>(i)] && !m.atom(i).aromatic)
      throw SanitizeError("atom marked aromatic is not in an aromatic ring", i);
  return m;
}

inline Molecule parse_smiles(std::string_view s, std::vector<std::string>* warnings = nullptr) {
  return sanitize(read_smiles(s, warnings));
}

inline bool is_sanitizable(const Molecule& m) {
  try {
    sanitize(m);
    return true;
  } catch (const SanitizeError&) {
    return false;
  }
}

}  // namespace lforge::chem
