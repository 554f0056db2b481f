#pragma once

// Canonical atom ranking and SMILES writer.

#include <algorithm>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "lforge/chem/molecule.hpp"
#include "lforge/chem/sanitize.hpp"

namespace lforge::chem {

inline int bond_code(const Bond& b) { return b.aromatic ? 4 : b.order; }

namespace detail {

// Dense ranks (0-based) of the keys, equal keys sharing a rank.
template <typename Key>
std::vector<int> dense_ranks(const std::vector<Key>& keys) {
  std::vector<int> idx(keys.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) { return keys[static_cast<std::size_t>(a)] < keys[static_cast<std::size_t>(b)]; });
  std::vector<int> ranks(keys.size());
  int r = 0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (k > 0 && keys[static_cast<std::size_t>(idx[k - 1])] < keys[static_cast<std::size_t>(idx[k])]) ++r;
    ranks[static_cast<std::size_t>(idx[k])] = r;
  }
  return ranks;
}

inline int class_count(const std::vector<int>& ranks) {
  return ranks.empty() ? 0 : *std::max_element(ranks.begin(), ranks.end()) + 1;
}

inline std::vector<int> refine(const Molecule& m, std::vector<int> ranks) {
  int classes = class_count(ranks);
  while (true) {
    std::vector<std::pair<int, std::vector<std::pair<int, int>>>> keys(ranks.size());
    for (int i = 0; i < m.atom_count(); ++i) {
      auto& k = keys[static_cast<std::size_t>(i)];
      k.first = ranks[static_cast<std::size_t>(i)];
      for (const auto& n : m.neighbors(i)) k.second.emplace_back(ranks[static_cast<std::size_t>(n.atom)], bond_code(m.bond(n.bond)));
      std::sort(k.second.begin(), k.second.end());
    }
    auto next = dense_ranks(keys);
    const int c = class_count(next);
    ranks = std::move(next);
    if (c == classes) return ranks;
    classes = c;
  }
}

}  // namespace detail

// Canonical ranks: graph invariants refined by neighbour ranks until stable,
// then ties broken one atom at a time.
inline std::vector<int> canonical_ranks(const Molecule& m) {
  const auto rings = m.ring_info();
  using Inv = std::tuple<int, int, int, int, int, int, int>;
  std::vector<Inv> inv(static_cast<std::size_t>(m.atom_count()));
  for (int i = 0; i < m.atom_count(); ++i) {
    const auto& a = m.atom(i);
    inv[static_cast<std::size_t>(i)] = {m.degree(i), a.element, a.aromatic ? 1 : 0, a.charge, a.hcount, a.label,
                                        rings->atom_ring_count[static_cast<std::size_t>(i)]};
  }
  auto ranks = detail::refine(m, detail::dense_ranks(inv));
  while (detail::class_count(ranks) < m.atom_count()) {
    // Lowest rank shared by more than one atom; split off its lowest-index member.
    std::vector<int> seen(ranks.size(), 0);
    for (int r : ranks) ++seen[static_cast<std::size_t>(r)];
    int tied = 0;
    while (seen[static_cast<std::size_t>(tied)] < 2) ++tied;
    std::vector<int> doubled(ranks.size());
    bool split = false;
    for (std::size_t i = 0; i < ranks.size(); ++i) {
      doubled[i] = 2 * ranks[i] + 1;
      if (!split && ranks[i] == tied) {
        doubled[i] -= 1;
        split = true;
      }
    }
    ranks = detail::refine(m, detail::dense_ranks(doubled));
  }
  return ranks;
}

namespace detail {

inline std::string atom_token(const Molecule& m, int i) {
  const auto& a = m.atom(i);
  std::string sym(symbol_of(a.element));
  if (a.aromatic) std::transform(sym.begin(), sym.end(), sym.begin(), [](char c) { return static_cast<char>(std::tolower(c)); });
  if (a.is_dummy()) {
    if (a.label == 0 && a.charge == 0 && a.hcount == 0) return "*";
  } else {
    const bool plain = organic_subset(a.element) && a.charge == 0 && a.label == 0 &&
                       (!a.aromatic || aromatic_capable(a.element)) && a.hcount == implied_hydrogens(m, i);
    if (plain) return sym;
  }
  std::string out = "[";
  if (a.label != 0) out += std::to_string(a.label);
  out += sym;
  if (a.hcount > 0) {
    out += 'H';
    if (a.hcount > 1) out += std::to_string(a.hcount);
  }
  if (a.charge != 0) {
    out += a.charge > 0 ? '+' : '-';
    if (std::abs(a.charge) > 1) out += std::to_string(std::abs(a.charge));
  }
  out += ']';
  return out;
}

inline std::string bond_token(const Molecule& m, const Bond& b) {
  if (b.aromatic) return "";
  switch (b.order) {
    case 2: return "=";
    case 3: return "#";
    default: return m.atom(b.a).aromatic && m.atom(b.b).aromatic ? "-" : "";
  }
}

inline std::string ring_label(int d) { return d < 10 ? std::to_string(d) : "%" + std::to_string(d); }

class SmilesWriter {
 public:
  SmilesWriter(const Molecule& m, const std::vector<int>& ranks) : m_(m), ranks_(ranks) {
    const auto n = static_cast<std::size_t>(m.atom_count());
    visited_.assign(n, false);
    children_.assign(n, {});
    closures_.assign(n, {});
    tree_bond_.assign(static_cast<std::size_t>(m.bond_count()), false);
  }

  std::string run() {
    std::vector<int> order(static_cast<std::size_t>(m_.atom_count()));
    for (int i = 0; i < m_.atom_count(); ++i) order[static_cast<std::size_t>(i)] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) { return rank(a) < rank(b); });
    std::string out;
    for (int start : order) {
      if (visited_[static_cast<std::size_t>(start)]) continue;
      plan(start, -1);
      if (!out.empty()) out += '.';
      emit(start, out);
    }
    return out;
  }

 private:
  int rank(int i) const { return ranks_[static_cast<std::size_t>(i)]; }

  std::vector<Neighbor> sorted_neighbors(int i) const {
    auto nbrs = m_.neighbors(i);
    std::sort(nbrs.begin(), nbrs.end(), [&](const Neighbor& x, const Neighbor& y) { return rank(x.atom) < rank(y.atom); });
    return nbrs;
  }

  // First pass: spanning tree and ring-closure bonds.
  void plan(int i, int parent_bond) {
    visited_[static_cast<std::size_t>(i)] = true;
    for (const auto& n : sorted_neighbors(i)) {
      if (n.bond == parent_bond) continue;
      if (visited_[static_cast<std::size_t>(n.atom)]) {
        if (!tree_bond_[static_cast<std::size_t>(n.bond)] &&
            std::find(closures_[static_cast<std::size_t>(i)].begin(), closures_[static_cast<std::size_t>(i)].end(), n) ==
                closures_[static_cast<std::size_t>(i)].end()) {
          closures_[static_cast<std::size_t>(i)].push_back(n);
          closures_[static_cast<std::size_t>(n.atom)].push_back({i, n.bond});
        }
        continue;
      }
      tree_bond_[static_cast<std::size_t>(n.bond)] = true;
      children_[static_cast<std::size_t>(i)].push_back(n);
      plan(n.atom, n.bond);
    }
  }

  void emit(int i, std::string& out) {
    out += atom_token(m_, i);
    auto& cl = closures_[static_cast<std::size_t>(i)];
    std::sort(cl.begin(), cl.end(), [&](const Neighbor& x, const Neighbor& y) { return rank(x.atom) < rank(y.atom); });
    for (const auto& c : cl) {
      auto it = open_.find(c.bond);
      if (it != open_.end()) {
        out += bond_token(m_, m_.bond(c.bond)) + ring_label(it->second);
        free_.push_back(it->second);
        open_.erase(it);
      } else {
        std::sort(free_.begin(), free_.end());
        int d;
        if (!free_.empty()) {
          d = free_.front();
          free_.erase(free_.begin());
        } else {
          d = ++max_digit_;
        }
        open_[c.bond] = d;
        out += ring_label(d);
      }
    }
    const auto& kids = children_[static_cast<std::size_t>(i)];
    for (std::size_t k = 0; k < kids.size(); ++k) {
      const bool last = k + 1 == kids.size();
      if (!last) out += '(';
      out += bond_token(m_, m_.bond(kids[k].bond));
      emit(kids[k].atom, out);
      if (!last) out += ')';
    }
  }

  const Molecule& m_;
  const std::vector<int>& ranks_;
  std::vector<bool> visited_;
  std::vector<std::vector<Neighbor>> children_;
  std::vector<std::vector<Neighbor>> closures_;
  std::vector<bool> tree_bond_;
  std::map<int, int> open_;  // bond -> ring digit
  std::vector<int> free_;
  int max_digit_ = 0;
};

}  // namespace detail

// Canonical SMILES of a sanitized molecule.
inline std::string write_smiles(const Molecule& m) {
  if (m.empty()) return "";
  const auto ranks = canonical_ranks(m);
  return detail::SmilesWriter(m, ranks).run();
}

// Parses and sanitizes, then writes canonically.
inline std::string canonical_smiles(std::string_view s) { return write_smiles(parse_smiles(s)); }

}  // namespace lforge::chem
