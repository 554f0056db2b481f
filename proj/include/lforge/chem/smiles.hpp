#pragma once

// SMILES reader. Stereo markers are accepted and dropped.

#include <cctype>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "lforge/chem/molecule.hpp"
#include "lforge/core/error.hpp"

namespace lforge::chem {

namespace detail {

struct RingOpen {
  int atom;
  int order;  // -1 = unspecified
  bool aromatic;
  std::size_t pos;
};

class SmilesReader {
 public:
  SmilesReader(std::string_view s, std::vector<std::string>* warnings) : s_(s), warnings_(warnings) {}

  Molecule run() {
    if (s_.empty()) throw ParseError("empty SMILES");
    while (i_ < s_.size()) step();
    if (!branches_.empty()) fail("unclosed branch", branches_.back().pos);
    if (!rings_.empty()) {
      const auto& [digit, open] = *rings_.begin();
      fail("unclosed ring bond " + std::to_string(digit), open.pos);
    }
    if (pending_order_ != -1 || pending_aromatic_) fail("bond without a following atom", i_);
    if (m_.empty()) fail("no atoms", 0);
    absorb_hydrogens();
    return std::move(m_);
  }

 private:
  struct Branch {
    int atom;
    std::size_t pos;
  };

  [[noreturn]] void fail(const std::string& what, std::size_t pos) const {
    throw ParseError("SMILES '" + std::string(s_) + "': " + what + " at position " + std::to_string(pos + 1));
  }

  void warn(const std::string& w) {
    if (warnings_) warnings_->push_back(w);
  }

  void step() {
    const char c = s_[i_];
    switch (c) {
      case '(':
        if (prev_ < 0) fail("branch without a preceding atom", i_);
        if (pending_order_ != -1) fail("bond before branch", i_);
        branches_.push_back({prev_, i_});
        ++i_;
        if (i_ >= s_.size() || s_[i_] == ')') fail("empty branch", i_ - 1);
        return;
      case ')':
        if (branches_.empty()) fail("unmatched ')'", i_);
        if (pending_order_ != -1 || pending_aromatic_) fail("bond without a following atom", i_);
        prev_ = branches_.back().atom;
        branches_.pop_back();
        ++i_;
        return;
      case '.':
        if (pending_order_ != -1) fail("bond before '.'", i_);
        prev_ = -1;
        ++i_;
        return;
      case '-': set_bond(1, false); return;
      case '=': set_bond(2, false); return;
      case '#': set_bond(3, false); return;
      case ':': set_bond(0, true); return;
      case '/':
      case '\\':
        warn("directional bond ignored");
        set_bond(1, false);
        return;
      case '%':
      case '0': case '1': case '2': case '3': case '4': case '5': case '6': case '7': case '8': case '9':
        ring_closure();
        return;
      case '[':
        add_atom(bracket_atom());
        return;
      default:
        add_atom(organic_atom());
    }
  }

  void set_bond(int order, bool aromatic) {
    if (pending_order_ != -1 || pending_aromatic_) fail("two consecutive bond symbols", i_);
    if (prev_ < 0) fail("bond without a preceding atom", i_);
    pending_order_ = order;
    pending_aromatic_ = aromatic;
    ++i_;
  }

  void ring_closure() {
    const std::size_t start = i_;
    if (prev_ < 0) fail("ring bond without an atom", i_);
    int digit = 0;
    if (s_[i_] == '%') {
      if (i_ + 2 >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[i_ + 1])) ||
          !std::isdigit(static_cast<unsigned char>(s_[i_ + 2])))
        fail("'%' must be followed by two digits", i_);
      digit = (s_[i_ + 1] - '0') * 10 + (s_[i_ + 2] - '0');
      i_ += 3;
    } else {
      digit = s_[i_] - '0';
      ++i_;
    }
    auto it = rings_.find(digit);
    if (it == rings_.end()) {
      rings_[digit] = {prev_, pending_order_, pending_aromatic_, start};
    } else {
      const RingOpen open = it->second;
      rings_.erase(it);
      int order = pending_order_;
      bool aromatic = pending_aromatic_;
      if (open.order != -1 || open.aromatic) {
        if ((order != -1 || aromatic) && (order != open.order || aromatic != open.aromatic))
          fail("conflicting ring bond symbols", start);
        order = open.order;
        aromatic = open.aromatic;
      }
      if (open.atom == prev_) fail("ring bond to itself", start);
      if (m_.bond_between(open.atom, prev_)) fail("duplicate ring bond", start);
      connect(open.atom, prev_, order, aromatic);
    }
    pending_order_ = -1;
    pending_aromatic_ = false;
  }

  void connect(int a, int b, int order, bool aromatic) {
    if (order == -1 && !aromatic) {
      if (m_.atom(a).aromatic && m_.atom(b).aromatic) {
        order = 0;
        aromatic = true;
      } else {
        order = 1;
      }
    }
    m_.add_bond(a, b, order, aromatic);
  }

  void add_atom(const Atom& a) {
    const int idx = m_.add_atom(a);
    if (prev_ >= 0) connect(prev_, idx, pending_order_, pending_aromatic_);
    pending_order_ = -1;
    pending_aromatic_ = false;
    prev_ = idx;
  }

  Atom organic_atom() {
    const std::size_t start = i_;
    Atom a;
    a.implicit_h = true;
    const char c = s_[i_];
    auto two = s_.substr(i_, 2);
    if (two == "Cl" || two == "Br") {
      a.element = two == "Cl" ? 17 : 35;
      i_ += 2;
      return a;
    }
    ++i_;
    switch (c) {
      case '*': a.element = 0; a.implicit_h = false; return a;
      case 'B': a.element = 5; return a;
      case 'C': a.element = 6; return a;
      case 'N': a.element = 7; return a;
      case 'O': a.element = 8; return a;
      case 'P': a.element = 15; return a;
      case 'S': a.element = 16; return a;
      case 'F': a.element = 9; return a;
      case 'I': a.element = 53; return a;
      case 'b': a.element = 5; a.aromatic = true; return a;
      case 'c': a.element = 6; a.aromatic = true; return a;
      case 'n': a.element = 7; a.aromatic = true; return a;
      case 'o': a.element = 8; a.aromatic = true; return a;
      case 'p': a.element = 15; a.aromatic = true; return a;
      case 's': a.element = 16; a.aromatic = true; return a;
      default: break;
    }
    fail(std::string("unexpected character '") + c + "'", start);
  }

  int read_number() {
    int v = 0;
    bool any = false;
    while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) {
      v = v * 10 + (s_[i_] - '0');
      ++i_;
      any = true;
    }
    return any ? v : -1;
  }

  Atom bracket_atom() {
    const std::size_t open = i_;
    ++i_;
    Atom a;
    if (const int iso = read_number(); iso >= 0) a.label = iso;
    if (i_ >= s_.size()) fail("unterminated bracket atom", open);

    const char c = s_[i_];
    if (c == '*') {
      a.element = 0;
      ++i_;
    } else if (std::islower(static_cast<unsigned char>(c))) {
      if (s_.substr(i_, 2) == "se") {
        a.element = 34;
        i_ += 2;
      } else {
        const auto* e = element_by_symbol(std::string(1, static_cast<char>(std::toupper(c))));
        if (!e || !aromatic_capable(e->z)) fail(std::string("unknown aromatic element '") + c + "'", i_);
        a.element = e->z;
        ++i_;
      }
      a.aromatic = true;
    } else if (std::isupper(static_cast<unsigned char>(c))) {
      const ElementInfo* e = nullptr;
      if (i_ + 1 < s_.size() && std::islower(static_cast<unsigned char>(s_[i_ + 1])))
        e = element_by_symbol(s_.substr(i_, 2));
      if (e) {
        i_ += 2;
      } else {
        e = element_by_symbol(s_.substr(i_, 1));
        if (!e) {
          std::size_t len = 1;
          while (i_ + len < s_.size() && std::islower(static_cast<unsigned char>(s_[i_ + len]))) ++len;
          fail("unknown element '" + std::string(s_.substr(i_, len)) + "'", i_);
        }
        ++i_;
      }
      a.element = e->z;
    } else {
      fail("missing element symbol", i_);
    }

    if (i_ < s_.size() && s_[i_] == '@') {
      warn("chirality ignored");
      while (i_ < s_.size() && s_[i_] == '@') ++i_;
    }
    if (i_ < s_.size() && s_[i_] == 'H') {
      ++i_;
      const int h = read_number();
      a.hcount = h < 0 ? 1 : h;
    }
    if (i_ < s_.size() && (s_[i_] == '+' || s_[i_] == '-')) {
      const char sign = s_[i_];
      int mag = 0;
      while (i_ < s_.size() && s_[i_] == sign) {
        ++mag;
        ++i_;
      }
      if (mag == 1) {
        if (const int n = read_number(); n >= 0) mag = n;
      }
      a.charge = sign == '+' ? mag : -mag;
    }
    if (i_ < s_.size() && s_[i_] == ':') {
      ++i_;
      const int map = read_number();
      if (map < 0) fail("atom class without digits", i_);
      if (a.element == 0 && a.label == 0) a.label = map;
    }
    if (i_ >= s_.size() || s_[i_] != ']') fail("unterminated bracket atom", open);
    ++i_;
    return a;
  }

  // Neutral [H] atoms hanging off another atom become hydrogen counts.
  void absorb_hydrogens() {
    std::vector<int> doomed;
    for (int i = 0; i < m_.atom_count(); ++i) {
      const auto& a = m_.atom(i);
      if (a.element != 1 || a.charge != 0 || a.label != 0 || a.hcount != 0 || m_.degree(i) != 1) continue;
      const auto& nb = m_.neighbors(i).front();
      if (m_.bond(nb.bond).order != 1 || m_.atom(nb.atom).element <= 1) continue;
      if (!m_.atom(nb.atom).implicit_h) ++m_.atom(nb.atom).hcount;
      doomed.push_back(i);
    }
    if (!doomed.empty()) m_.remove_atoms(doomed);
  }

  std::string_view s_;
  std::vector<std::string>* warnings_;
  std::size_t i_ = 0;
  Molecule m_;
  int prev_ = -1;
  int pending_order_ = -1;
  bool pending_aromatic_ = false;
  std::vector<Branch> branches_;
  std::map<int, RingOpen> rings_;
};

}  // namespace detail

// Graph as written, hydrogens not yet derived. Most callers want parse_smiles.
inline Molecule read_smiles(std::string_view s, std::vector<std::string>* warnings = nullptr) {
  return detail::SmilesReader(s, warnings).run();
}

}  // namespace lforge::chem
