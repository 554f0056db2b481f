#pragma once

// Circular (Morgan/ECFP-style) fingerprints and Tanimoto similarity.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <set>
#include <vector>

#include "lforge/chem/canonical.hpp"
#include "lforge/chem/molecule.hpp"
#include "lforge/core/error.hpp"
#include "lforge/core/random.hpp"

namespace lforge::chem {

inline constexpr std::uint64_t kMorganHashSeed = 0x4c464f5247450001ULL;

class Fingerprint {
 public:
  Fingerprint() = default;
  Fingerprint(std::size_t nbits, int radius) : nbits_(nbits), radius_(radius), words_((nbits + 63) / 64, 0) {
    if (nbits == 0 || (nbits & (nbits - 1)) != 0) throw ValidationError("fingerprint length must be a power of two");
  }

  std::size_t size() const noexcept { return nbits_; }
  int radius() const noexcept { return radius_; }
  const std::vector<std::uint64_t>& words() const noexcept { return words_; }

  void set(std::size_t i) { words_[i / 64] |= std::uint64_t{1} << (i % 64); }
  bool test(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1U; }

  std::size_t count() const {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }

  std::vector<std::size_t> on_bits() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < nbits_; ++i)
      if (test(i)) out.push_back(i);
    return out;
  }

  bool operator==(const Fingerprint&) const = default;

 private:
  std::size_t nbits_ = 0;
  int radius_ = 0;
  std::vector<std::uint64_t> words_;
};

inline double tanimoto(const Fingerprint& a, const Fingerprint& b) {
  if (a.size() != b.size()) throw ValidationError("fingerprint lengths differ");
  std::size_t both = 0, any = 0;
  for (std::size_t w = 0; w < a.words().size(); ++w) {
    both += static_cast<std::size_t>(std::popcount(a.words()[w] & b.words()[w]));
    any += static_cast<std::size_t>(std::popcount(a.words()[w] | b.words()[w]));
  }
  return any == 0 ? 1.0 : static_cast<double>(both) / static_cast<double>(any);
}

namespace detail {

inline std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) { return mix64(h ^ mix64(v + 0x9e3779b97f4a7c15ULL)); }

inline std::uint64_t atom_invariant(const Molecule& m, const RingInfo& rings, int i) {
  const auto& a = m.atom(i);
  std::uint64_t h = kMorganHashSeed;
  h = hash_combine(h, static_cast<std::uint64_t>(a.element));
  h = hash_combine(h, static_cast<std::uint64_t>(m.degree(i)));
  h = hash_combine(h, static_cast<std::uint64_t>(a.hcount));
  h = hash_combine(h, static_cast<std::uint64_t>(a.charge + 16));
  h = hash_combine(h, a.aromatic ? 1U : 0U);
  h = hash_combine(h, rings.atom_in_ring(i) ? 1U : 0U);
  return h;
}

}  // namespace detail

// Environment identifiers of every radius 0..radius, with environments that
// cover exactly the same bond set as an earlier one dropped.
inline std::vector<std::uint64_t> morgan_environments(const Molecule& m, int radius = 2) {
  const auto rings = m.ring_info();
  const int n = m.atom_count();
  std::vector<std::uint64_t> ids(static_cast<std::size_t>(n));
  std::vector<std::uint64_t> out;
  for (int i = 0; i < n; ++i) {
    ids[static_cast<std::size_t>(i)] = detail::atom_invariant(m, *rings, i);
    out.push_back(ids[static_cast<std::size_t>(i)]);
  }
  std::vector<std::vector<bool>> env(static_cast<std::size_t>(n), std::vector<bool>(static_cast<std::size_t>(m.bond_count()), false));
  std::set<std::vector<bool>> seen;
  for (int r = 1; r <= radius; ++r) {
    std::vector<std::uint64_t> next(ids.size());
    std::vector<std::vector<bool>> next_env = env;
    std::vector<std::pair<std::vector<bool>, std::uint64_t>> round;
    for (int i = 0; i < n; ++i) {
      std::vector<std::pair<int, std::uint64_t>> nb;
      auto& e = next_env[static_cast<std::size_t>(i)];
      for (const auto& x : m.neighbors(i)) {
        nb.emplace_back(bond_code(m.bond(x.bond)), ids[static_cast<std::size_t>(x.atom)]);
        e[static_cast<std::size_t>(x.bond)] = true;
        const auto& ne = env[static_cast<std::size_t>(x.atom)];
        for (std::size_t b = 0; b < ne.size(); ++b)
          if (ne[b]) e[b] = true;
      }
      std::sort(nb.begin(), nb.end());
      std::uint64_t h = detail::hash_combine(kMorganHashSeed, static_cast<std::uint64_t>(r));
      h = detail::hash_combine(h, ids[static_cast<std::size_t>(i)]);
      for (const auto& [code, id] : nb) h = detail::hash_combine(detail::hash_combine(h, static_cast<std::uint64_t>(code)), id);
      next[static_cast<std::size_t>(i)] = h;
      if (!nb.empty()) round.emplace_back(e, h);
    }
    // Within a round, equal bond sets keep the smallest identifier.
    std::sort(round.begin(), round.end(), [](const auto& x, const auto& y) { return x.second < y.second; });
    for (auto& [e, h] : round)
      if (seen.insert(e).second) out.push_back(h);
    ids = std::move(next);
    env = std::move(next_env);
  }
  return out;
}

inline Fingerprint morgan_fingerprint(const Molecule& m, int radius = 2, std::size_t nbits = 2048) {
  Fingerprint fp(nbits, radius);
  for (auto id : morgan_environments(m, radius)) fp.set(static_cast<std::size_t>(id % nbits));
  return fp;
}

}  // namespace lforge::chem
