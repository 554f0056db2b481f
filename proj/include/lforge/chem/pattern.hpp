#pragma once

// Restricted SMARTS-like patterns: element, aromaticity, degree, H count,
// connectivity, ring membership and charge, combined with ! & , ; operators.

#include <cctype>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "lforge/chem/molecule.hpp"
#include "lforge/core/error.hpp"

namespace lforge::chem {

namespace detail {

struct AtomExpr {
  enum class Kind { kTrue, kAnd, kOr, kNot, kElement, kAromatic, kAliphatic, kDegree, kHCount, kConnections, kRing, kCharge };
  Kind kind = Kind::kTrue;
  int value = 0;
  std::vector<AtomExpr> children;

  bool eval(const Molecule& m, const RingInfo& rings, int i) const {
    const auto& a = m.atom(i);
    switch (kind) {
      case Kind::kTrue: return true;
      case Kind::kAnd:
        for (const auto& c : children)
          if (!c.eval(m, rings, i)) return false;
        return true;
      case Kind::kOr:
        for (const auto& c : children)
          if (c.eval(m, rings, i)) return true;
        return false;
      case Kind::kNot: return !children.front().eval(m, rings, i);
      case Kind::kElement: return a.element == value;
      case Kind::kAromatic: return a.aromatic;
      case Kind::kAliphatic: return !a.aromatic;
      case Kind::kDegree: return m.degree(i) == value;
      case Kind::kHCount: return a.hcount == value;
      case Kind::kConnections: return m.degree(i) + a.hcount == value;
      case Kind::kRing: return value < 0 ? rings.atom_in_ring(i) : rings.atom_ring_count[static_cast<std::size_t>(i)] == value;
      case Kind::kCharge: return a.charge == value;
    }
    return false;
  }
};

struct BondPrim {
  enum class Kind { kSingle, kDouble, kTriple, kAromatic, kAny, kRing };
  Kind kind;
  bool negated = false;

  bool eval(const Bond& b, bool in_ring) const {
    bool r = false;
    switch (kind) {
      case Kind::kSingle: r = !b.aromatic && b.order == 1; break;
      case Kind::kDouble: r = !b.aromatic && b.order == 2; break;
      case Kind::kTriple: r = b.order == 3; break;
      case Kind::kAromatic: r = b.aromatic; break;
      case Kind::kAny: r = true; break;
      case Kind::kRing: r = in_ring; break;
    }
    return negated ? !r : r;
  }
};

struct BondExpr {
  std::vector<BondPrim> prims;  // conjunction; empty = single or aromatic

  bool eval(const Bond& b, bool in_ring) const {
    if (prims.empty()) return b.aromatic || b.order == 1;
    bool has_order = false;
    for (const auto& p : prims) {
      if (!p.eval(b, in_ring)) return false;
      if (p.kind != BondPrim::Kind::kRing) has_order = true;
    }
    return has_order || b.aromatic || b.order == 1;
  }
};

}  // namespace detail

struct PatternAtom {
  detail::AtomExpr expr;
  int map = 0;
};

struct PatternBond {
  int a;
  int b;
  detail::BondExpr expr;
};

class Pattern {
 public:
  Pattern() = default;
  explicit Pattern(std::string_view text);

  const std::string& text() const noexcept { return text_; }
  int atom_count() const noexcept { return static_cast<int>(atoms_.size()); }
  const std::vector<PatternAtom>& atoms() const noexcept { return atoms_; }
  const std::vector<PatternBond>& bonds() const noexcept { return bonds_; }

  // Pattern atom index carrying the given map number, or -1.
  int atom_with_map(int map) const {
    for (int i = 0; i < atom_count(); ++i)
      if (atoms_[static_cast<std::size_t>(i)].map == map) return i;
    return -1;
  }

  // All matches (pattern atom -> molecule atom), lexicographic in the molecule
  // indices of pattern atoms 0, 1, ... Stops after `limit` matches when > 0.
  std::vector<std::vector<int>> match(const Molecule& m, std::size_t limit = 0) const;

  bool matches(const Molecule& m) const { return !match(m, 1).empty(); }

 private:
  friend class PatternParser;
  std::string text_;
  std::vector<PatternAtom> atoms_;
  std::vector<PatternBond> bonds_;
};

class PatternParser {
 public:
  explicit PatternParser(std::string_view s) : s_(s) {}

  Pattern run() {
    Pattern p;
    p.text_ = std::string(s_);
    if (s_.empty()) fail("empty pattern", 0);
    int prev = -1;
    std::vector<int> stack;
    detail::BondExpr pending;
    bool have_bond = false;
    while (i_ < s_.size()) {
      const char c = s_[i_];
      if (c == '(') {
        if (prev < 0) fail("branch without atom", i_);
        stack.push_back(prev);
        ++i_;
      } else if (c == ')') {
        if (stack.empty()) fail("unmatched ')'", i_);
        prev = stack.back();
        stack.pop_back();
        ++i_;
      } else if (c == '-' || c == '=' || c == '#' || c == ':' || c == '~' || c == '@' || c == '!') {
        if (prev < 0) fail("bond without atom", i_);
        pending = bond_expr();
        have_bond = true;
      } else {
        PatternAtom a = c == '[' ? bracket() : bare();
        p.atoms_.push_back(std::move(a));
        const int idx = p.atom_count() - 1;
        if (prev >= 0) p.bonds_.push_back({prev, idx, have_bond ? pending : detail::BondExpr{}});
        have_bond = false;
        pending = {};
        prev = idx;
      }
    }
    if (!stack.empty()) fail("unclosed branch", s_.size());
    if (have_bond) fail("dangling bond", s_.size());
    return p;
  }

 private:
  using K = detail::AtomExpr::Kind;

  [[noreturn]] void fail(const std::string& what, std::size_t pos) const {
    throw ParseError("pattern '" + std::string(s_) + "': " + what + " at position " + std::to_string(pos + 1));
  }

  static detail::AtomExpr prim(K k, int v = 0) { return {k, v, {}}; }
  static detail::AtomExpr both(detail::AtomExpr x, detail::AtomExpr y) { return {K::kAnd, 0, {std::move(x), std::move(y)}}; }

  detail::BondExpr bond_expr() {
    detail::BondExpr e;
    bool neg = false;
    while (i_ < s_.size()) {
      const char c = s_[i_];
      using BK = detail::BondPrim::Kind;
      BK k;
      if (c == '!') {
        neg = !neg;
        ++i_;
        continue;
      }
      if (c == '-') k = BK::kSingle;
      else if (c == '=') k = BK::kDouble;
      else if (c == '#') k = BK::kTriple;
      else if (c == ':') k = BK::kAromatic;
      else if (c == '~') k = BK::kAny;
      else if (c == '@') k = BK::kRing;
      else break;
      e.prims.push_back({k, neg});
      neg = false;
      ++i_;
    }
    if (neg) fail("'!' without bond primitive", i_);
    return e;
  }

  // Element symbol at the cursor; aromatic lowercase forms allowed.
  bool element(detail::AtomExpr& out) {
    static constexpr std::string_view two[] = {"Cl", "Br", "Si", "Se"};
    for (auto t : two)
      if (s_.substr(i_, 2) == t) {
        out = both(prim(K::kElement, element_by_symbol(t)->z), prim(K::kAliphatic));
        i_ += 2;
        return true;
      }
    if (s_.substr(i_, 2) == "se") {
      out = both(prim(K::kElement, 34), prim(K::kAromatic));
      i_ += 2;
      return true;
    }
    const char c = s_[i_];
    static constexpr std::string_view upper = "BCNOPSFI";
    static constexpr std::string_view lower = "bcnops";
    if (upper.find(c) != std::string_view::npos) {
      out = both(prim(K::kElement, element_by_symbol(std::string(1, c))->z), prim(K::kAliphatic));
      ++i_;
      return true;
    }
    if (lower.find(c) != std::string_view::npos) {
      out = both(prim(K::kElement, element_by_symbol(std::string(1, static_cast<char>(std::toupper(c))))->z), prim(K::kAromatic));
      ++i_;
      return true;
    }
    return false;
  }

  PatternAtom bare() {
    PatternAtom a;
    if (s_[i_] == '*') {
      ++i_;
      return a;
    }
    if (s_[i_] == 'a' || s_[i_] == 'A') {
      a.expr = prim(s_[i_] == 'a' ? K::kAromatic : K::kAliphatic);
      ++i_;
      return a;
    }
    if (!element(a.expr)) fail(std::string("unexpected character '") + s_[i_] + "'", i_);
    return a;
  }

  int number(int fallback) {
    int v = 0;
    bool any = false;
    while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) {
      v = v * 10 + (s_[i_] - '0');
      ++i_;
      any = true;
    }
    return any ? v : fallback;
  }

  PatternAtom bracket() {
    const std::size_t open = i_;
    ++i_;
    PatternAtom a;
    a.expr = low();
    if (i_ < s_.size() && s_[i_] == ':') {
      ++i_;
      a.map = number(-1);
      if (a.map < 0) fail("map number expected", i_);
    }
    if (i_ >= s_.size() || s_[i_] != ']') fail("unterminated bracket", open);
    ++i_;
    return a;
  }

  bool at_end_of_expr() const { return i_ >= s_.size() || s_[i_] == ']' || s_[i_] == ':'; }

  detail::AtomExpr low() {
    detail::AtomExpr e = orx();
    while (!at_end_of_expr() && s_[i_] == ';') {
      ++i_;
      e = both(std::move(e), orx());
    }
    return e;
  }

  detail::AtomExpr orx() {
    detail::AtomExpr e = high();
    if (at_end_of_expr() || s_[i_] != ',') return e;
    detail::AtomExpr any{K::kOr, 0, {std::move(e)}};
    while (!at_end_of_expr() && s_[i_] == ',') {
      ++i_;
      any.children.push_back(high());
    }
    return any;
  }

  detail::AtomExpr high() {
    detail::AtomExpr e = unary();
    while (!at_end_of_expr() && s_[i_] != ',' && s_[i_] != ';') {
      if (s_[i_] == '&') ++i_;
      e = both(std::move(e), unary());
    }
    return e;
  }

  detail::AtomExpr unary() {
    if (at_end_of_expr()) fail("atom primitive expected", i_);
    if (s_[i_] == '!') {
      ++i_;
      return {K::kNot, 0, {unary()}};
    }
    const char c = s_[i_];
    switch (c) {
      case '*': ++i_; return prim(K::kTrue);
      case 'a': ++i_; return prim(K::kAromatic);
      case 'A': ++i_; return prim(K::kAliphatic);
      case '#': ++i_; return prim(K::kElement, number(-1));
      case 'D': ++i_; return prim(K::kDegree, number(1));
      case 'H': ++i_; return prim(K::kHCount, number(1));
      case 'X': ++i_; return prim(K::kConnections, number(1));
      case 'R': ++i_; return prim(K::kRing, number(-1));
      case '+':
      case '-': {
        ++i_;
        int mag = 1;
        while (i_ < s_.size() && s_[i_] == c) {
          ++mag;
          ++i_;
        }
        if (mag == 1) mag = number(1);
        return prim(K::kCharge, c == '+' ? mag : -mag);
      }
      default: break;
    }
    detail::AtomExpr e;
    if (!element(e)) fail(std::string("unknown primitive '") + c + "'", i_);
    return e;
  }

  std::string_view s_;
  std::size_t i_ = 0;
};

inline Pattern::Pattern(std::string_view text) : Pattern(PatternParser(text).run()) {}

inline std::vector<std::vector<int>> Pattern::match(const Molecule& m, std::size_t limit) const {
  std::vector<std::vector<int>> out;
  if (atoms_.empty() || m.empty()) return out;
  const auto rings = m.ring_info();
  const int np = atom_count();
  // Bonds to earlier pattern atoms, per pattern atom.
  std::vector<std::vector<std::pair<int, const detail::BondExpr*>>> back(static_cast<std::size_t>(np));
  for (const auto& b : bonds_) {
    const int lo = std::min(b.a, b.b), hi = std::max(b.a, b.b);
    back[static_cast<std::size_t>(hi)].push_back({lo, &b.expr});
  }
  std::vector<int> assign(static_cast<std::size_t>(np), -1);
  std::vector<bool> used(static_cast<std::size_t>(m.atom_count()), false);

  auto rec = [&](auto&& self, int k) -> bool {
    if (k == np) {
      out.push_back(assign);
      return limit > 0 && out.size() >= limit;
    }
    for (int t = 0; t < m.atom_count(); ++t) {
      if (used[static_cast<std::size_t>(t)]) continue;
      if (!atoms_[static_cast<std::size_t>(k)].expr.eval(m, *rings, t)) continue;
      bool ok = true;
      for (const auto& [j, expr] : back[static_cast<std::size_t>(k)]) {
        const auto bond = m.bond_between(t, assign[static_cast<std::size_t>(j)]);
        if (!bond || !expr->eval(m.bond(*bond), rings->bond_in_ring[static_cast<std::size_t>(*bond)])) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      assign[static_cast<std::size_t>(k)] = t;
      used[static_cast<std::size_t>(t)] = true;
      const bool stop = self(self, k + 1);
      used[static_cast<std::size_t>(t)] = false;
      assign[static_cast<std::size_t>(k)] = -1;
      if (stop) return true;
    }
    return false;
  };
  rec(rec, 0);
  return out;
}

}  // namespace lforge::chem
