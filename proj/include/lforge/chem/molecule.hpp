#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <queue>
#include <utility>
#include <vector>

#include "lforge/chem/elements.hpp"
#include "lforge/core/error.hpp"

namespace lforge::chem {

struct Atom {
  int element = 6;  // atomic number; 0 = attachment point
  int charge = 0;
  int hcount = 0;          // attached hydrogens (total once sanitized)
  bool aromatic = false;
  int label = 0;           // isotope field; attachment-point label on dummies
  bool implicit_h = false; // hydrogens still to be derived from valence rules

  bool is_dummy() const noexcept { return element == 0; }
  bool is_heavy() const noexcept { return element > 1; }
  bool operator==(const Atom&) const = default;
};

// Bond orders are stored in Kekulé form once sanitized; order 0 marks an
// aromatic bond whose Kekulé order has not been assigned yet.
struct Bond {
  int a = 0;
  int b = 0;
  int order = 1;
  bool aromatic = false;

  int other(int atom) const noexcept { return atom == a ? b : a; }
  bool operator==(const Bond&) const = default;
};

struct Neighbor {
  int atom;
  int bond;
  bool operator==(const Neighbor&) const = default;
};

// Smallest set of smallest rings plus per-atom / per-bond membership.
struct RingInfo {
  std::vector<std::vector<int>> atom_rings;  // atoms in cyclic order
  std::vector<std::vector<int>> bond_rings;  // bonds of the same rings
  std::vector<int> atom_ring_count;
  std::vector<bool> bond_in_ring;

  bool atom_in_ring(int i) const { return atom_ring_count[static_cast<std::size_t>(i)] > 0; }
};

class Molecule {
 public:
  int add_atom(const Atom& a) {
    atoms_.push_back(a);
    adjacency_.emplace_back();
    rings_.reset();
    return static_cast<int>(atoms_.size()) - 1;
  }

  // Adds a bond; parallel bonds and self-loops are rejected.
  int add_bond(int a, int b, int order, bool aromatic = false) {
    if (a == b) throw ValidationError("self-loop bond on atom " + std::to_string(a));
    if (a < 0 || b < 0 || a >= atom_count() || b >= atom_count()) throw ValidationError("bond endpoint out of range");
    if (bond_between(a, b)) throw ValidationError("duplicate bond between atoms " + std::to_string(a) + " and " + std::to_string(b));
    bonds_.push_back({a, b, order, aromatic});
    const int idx = static_cast<int>(bonds_.size()) - 1;
    adjacency_[static_cast<std::size_t>(a)].push_back({b, idx});
    adjacency_[static_cast<std::size_t>(b)].push_back({a, idx});
    rings_.reset();
    return idx;
  }

  int atom_count() const noexcept { return static_cast<int>(atoms_.size()); }
  int bond_count() const noexcept { return static_cast<int>(bonds_.size()); }
  bool empty() const noexcept { return atoms_.empty(); }

  const Atom& atom(int i) const { return atoms_[static_cast<std::size_t>(i)]; }
  Atom& atom(int i) {
    rings_.reset();
    return atoms_[static_cast<std::size_t>(i)];
  }
  const Bond& bond(int i) const { return bonds_[static_cast<std::size_t>(i)]; }
  Bond& bond(int i) {
    rings_.reset();
    return bonds_[static_cast<std::size_t>(i)];
  }
  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  const std::vector<Bond>& bonds() const noexcept { return bonds_; }
  const std::vector<Neighbor>& neighbors(int i) const { return adjacency_[static_cast<std::size_t>(i)]; }

  std::optional<int> bond_between(int a, int b) const {
    for (const auto& n : neighbors(a))
      if (n.atom == b) return n.bond;
    return std::nullopt;
  }

  int degree(int i) const { return static_cast<int>(neighbors(i).size()); }

  int heavy_degree(int i) const {
    int d = 0;
    for (const auto& n : neighbors(i))
      if (atom(n.atom).is_heavy()) ++d;
    return d;
  }

  // Sum of Kekulé bond orders plus attached hydrogens.
  int valence(int i) const {
    int v = atom(i).hcount;
    for (const auto& n : neighbors(i)) v += bond(n.bond).order == 0 ? 1 : bond(n.bond).order;
    return v;
  }

  int heavy_atom_count() const {
    return static_cast<int>(std::count_if(atoms_.begin(), atoms_.end(), [](const Atom& a) { return a.is_heavy(); }));
  }

  // Removes the listed atoms and their bonds. Returns old-index -> new-index (-1 if removed).
  std::vector<int> remove_atoms(std::vector<int> doomed) {
    std::vector<bool> kill(atoms_.size(), false);
    for (int d : doomed) kill[static_cast<std::size_t>(d)] = true;
    std::vector<int> remap(atoms_.size(), -1);
    Molecule out;
    for (int i = 0; i < atom_count(); ++i)
      if (!kill[static_cast<std::size_t>(i)]) remap[static_cast<std::size_t>(i)] = out.add_atom(atoms_[static_cast<std::size_t>(i)]);
    for (const auto& b : bonds_) {
      const int na = remap[static_cast<std::size_t>(b.a)], nb = remap[static_cast<std::size_t>(b.b)];
      if (na >= 0 && nb >= 0) out.add_bond(na, nb, b.order, b.aromatic);
    }
    *this = std::move(out);
    return remap;
  }

  // Appends a copy of `other`; returns the index offset of its atoms.
  int append(const Molecule& other) {
    const int offset = atom_count();
    for (const auto& a : other.atoms()) add_atom(a);
    for (const auto& b : other.bonds()) add_bond(b.a + offset, b.b + offset, b.order, b.aromatic);
    return offset;
  }

  std::shared_ptr<const RingInfo> ring_info() const;

  // Connected components as sorted atom lists, ordered by smallest member.
  std::vector<std::vector<int>> components() const {
    std::vector<int> comp(atoms_.size(), -1);
    std::vector<std::vector<int>> out;
    for (int s = 0; s < atom_count(); ++s) {
      if (comp[static_cast<std::size_t>(s)] >= 0) continue;
      const int id = static_cast<int>(out.size());
      out.emplace_back();
      std::vector<int> stack{s};
      comp[static_cast<std::size_t>(s)] = id;
      while (!stack.empty()) {
        const int u = stack.back();
        stack.pop_back();
        out.back().push_back(u);
        for (const auto& n : neighbors(u))
          if (comp[static_cast<std::size_t>(n.atom)] < 0) {
            comp[static_cast<std::size_t>(n.atom)] = id;
            stack.push_back(n.atom);
          }
      }
      std::sort(out.back().begin(), out.back().end());
    }
    return out;
  }

  // Copy restricted to the given atoms (in the given order).
  Molecule subgraph(const std::vector<int>& keep) const {
    std::vector<int> remap(atoms_.size(), -1);
    Molecule out;
    for (int i : keep) remap[static_cast<std::size_t>(i)] = out.add_atom(atom(i));
    for (const auto& b : bonds_) {
      const int na = remap[static_cast<std::size_t>(b.a)], nb = remap[static_cast<std::size_t>(b.b)];
      if (na >= 0 && nb >= 0) out.add_bond(na, nb, b.order, b.aromatic);
    }
    return out;
  }

  void set_ring_info(std::shared_ptr<const RingInfo> info) const { std::atomic_store(&rings_, std::move(info)); }

 private:
  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<std::vector<Neighbor>> adjacency_;
  mutable std::shared_ptr<const RingInfo> rings_;  // lazily filled; accessed atomically
};

namespace detail {

using BondSet = std::vector<std::uint64_t>;

inline void set_bit(BondSet& s, int i) { s[static_cast<std::size_t>(i) / 64] |= (std::uint64_t{1} << (i % 64)); }

// Shortest cycle through bond `b`: BFS from one end to the other avoiding b.
inline std::optional<std::vector<int>> shortest_cycle_through(const Molecule& m, int b) {
  const auto& bond = m.bond(b);
  std::vector<int> prev(static_cast<std::size_t>(m.atom_count()), -2);
  std::queue<int> q;
  q.push(bond.a);
  prev[static_cast<std::size_t>(bond.a)] = -1;
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    if (u == bond.b) break;
    auto nbrs = m.neighbors(u);
    std::sort(nbrs.begin(), nbrs.end(), [](const Neighbor& x, const Neighbor& y) { return x.atom < y.atom; });
    for (const auto& n : nbrs) {
      if (n.bond == b || prev[static_cast<std::size_t>(n.atom)] != -2) continue;
      prev[static_cast<std::size_t>(n.atom)] = u;
      q.push(n.atom);
    }
  }
  if (prev[static_cast<std::size_t>(bond.b)] == -2) return std::nullopt;
  std::vector<int> path;
  for (int v = bond.b; v != -1; v = prev[static_cast<std::size_t>(v)]) path.push_back(v);
  return path;  // from b back to a; closing bond is `b`
}

}  // namespace detail

// SSSR by candidate shortest cycles (one per bond) reduced with GF(2)
// elimination, smallest first, until the cyclomatic number is reached.
inline RingInfo find_rings(const Molecule& m) {
  RingInfo info;
  info.atom_ring_count.assign(static_cast<std::size_t>(m.atom_count()), 0);
  info.bond_in_ring.assign(static_cast<std::size_t>(m.bond_count()), false);
  const int needed = m.bond_count() - m.atom_count() + static_cast<int>(m.components().size());
  if (needed <= 0) return info;

  const std::size_t words = (static_cast<std::size_t>(m.bond_count()) + 63) / 64;
  struct Candidate {
    std::vector<int> atoms;
    std::vector<int> bonds;
    detail::BondSet set;
  };
  std::vector<Candidate> cands;
  for (int b = 0; b < m.bond_count(); ++b) {
    auto path = detail::shortest_cycle_through(m, b);
    if (!path) continue;
    Candidate c;
    c.atoms = *path;
    c.set.assign(words, 0);
    for (std::size_t i = 0; i + 1 < c.atoms.size(); ++i) {
      const int bi = *m.bond_between(c.atoms[i], c.atoms[i + 1]);
      c.bonds.push_back(bi);
      detail::set_bit(c.set, bi);
    }
    c.bonds.push_back(b);
    detail::set_bit(c.set, b);
    bool dup = false;
    for (const auto& o : cands)
      if (o.set == c.set) dup = true;
    if (!dup) cands.push_back(std::move(c));
  }
  std::stable_sort(cands.begin(), cands.end(), [](const Candidate& x, const Candidate& y) { return x.atoms.size() < y.atoms.size(); });

  // Gaussian elimination basis keyed by pivot bit.
  std::vector<detail::BondSet> basis;
  std::vector<int> pivots;
  for (auto& c : cands) {
    if (static_cast<int>(info.atom_rings.size()) >= needed) break;
    auto v = c.set;
    for (std::size_t k = 0; k < basis.size(); ++k) {
      const int p = pivots[k];
      if (v[static_cast<std::size_t>(p) / 64] >> (p % 64) & 1) {
        for (std::size_t w = 0; w < words; ++w) v[w] ^= basis[k][w];
      }
    }
    int pivot = -1;
    for (std::size_t w = 0; w < words && pivot < 0; ++w)
      if (v[w]) pivot = static_cast<int>(w * 64) + __builtin_ctzll(v[w]);
    if (pivot < 0) continue;
    basis.push_back(v);
    pivots.push_back(pivot);
    info.atom_rings.push_back(c.atoms);
    info.bond_rings.push_back(c.bonds);
  }
  for (const auto& r : info.atom_rings)
    for (int a : r) ++info.atom_ring_count[static_cast<std::size_t>(a)];
  // Bond ring membership covers every cyclic bond, not only SSSR members.
  for (const auto& c : cands)
    for (int b : c.bonds) info.bond_in_ring[static_cast<std::size_t>(b)] = true;
  return info;
}

inline std::shared_ptr<const RingInfo> Molecule::ring_info() const {
  if (auto cached = std::atomic_load(&rings_)) return cached;
  auto info = std::make_shared<const RingInfo>(find_rings(*this));
  std::atomic_store(&rings_, info);
  return info;
}

}  // namespace lforge::chem
