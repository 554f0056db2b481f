#pragma once

// Candidates, evaluation context and the genetic operators.

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lforge/chem/brics.hpp"
#include "lforge/chem/canonical.hpp"
#include "lforge/chem/descriptors.hpp"
#include "lforge/chem/fingerprint.hpp"
#include "lforge/chem/library.hpp"
#include "lforge/chem/merge.hpp"
#include "lforge/chem/reactions.hpp"
#include "lforge/core/random.hpp"
#include "lforge/evolve/fitness.hpp"
#include "lforge/geom/conformer.hpp"
#include "lforge/structure/pockets.hpp"

namespace lforge::evolve {

struct Lineage {
  std::vector<std::string> parents;
  std::string op;
};

struct Candidate {
  chem::Molecule mol;
  conformer::Conformer conf;
  FitnessBreakdown fitness;
  std::string smiles;
  Lineage lineage;
  chem::Fingerprint fp;
  chem::DescriptorRecord desc;
  double qed = 0.0;
  double sa = 0.0;
  int generation = 0;
};

struct ScaffoldPiece {
  std::string smiles;
  chem::Molecule mol;
};

// Library BRICS pieces grouped by their sorted attachment labels.
using ScaffoldPool = std::map<std::vector<int>, std::vector<ScaffoldPiece>>;

inline std::vector<int> attachment_signature(const chem::Molecule& piece) {
  std::vector<int> labels;
  for (const auto& [idx, label] : chem::attachment_points(piece)) labels.push_back(label);
  std::sort(labels.begin(), labels.end());
  return labels;
}

inline ScaffoldPool build_scaffold_pool(const chem::FragmentLibrary& lib) {
  ScaffoldPool pool;
  for (const auto& e : lib.entries)
    for (auto& piece : chem::brics_decompose(e.mol)) {
      auto key = attachment_signature(piece);
      if (key.empty()) continue;
      std::string smi = chem::write_smiles(piece);
      auto& bucket = pool[key];
      if (std::none_of(bucket.begin(), bucket.end(), [&](const auto& p) { return p.smiles == smi; }))
        bucket.push_back({std::move(smi), std::move(piece)});
    }
  return pool;
}

struct EvalContext {
  structure::HotspotSet hotspots;
  std::vector<chem::Fingerprint> refs;
  Weights weights;
  conformer::ForceField ff;
  chem::ReactionTemplateSet reactions;
  const chem::FragmentLibrary* library = nullptr;
  ScaffoldPool pool;
  double p_reaction_first = 0.8;
  int fp_bits = 2048;
  int fp_radius = 2;
  int max_heavy_atoms = 50;
};

inline chem::Fingerprint fingerprint_of(const chem::Molecule& m, const EvalContext& ctx) {
  return chem::morgan_fingerprint(m, ctx.fp_radius, static_cast<std::size_t>(ctx.fp_bits));
}

// Library fingerprints plus any extra reference molecules.
inline EvalContext make_context(const GAConfig& cfg, const chem::FragmentLibrary& lib, structure::HotspotSet hs,
                                const std::vector<chem::Molecule>& extra_refs = {},
                                conformer::ForceField ff = conformer::default_force_field(),
                                chem::ReactionTemplateSet reactions = chem::default_reaction_templates()) {
  if (hs.centroids.empty()) throw ValidationError("hotspot set has no centroids");
  EvalContext ctx;
  ctx.hotspots = std::move(hs);
  ctx.weights = cfg.weights;
  ctx.ff = std::move(ff);
  ctx.reactions = std::move(reactions);
  ctx.library = &lib;
  ctx.pool = build_scaffold_pool(lib);
  ctx.p_reaction_first = cfg.p_reaction_first;
  ctx.fp_bits = cfg.fingerprint_bits;
  ctx.fp_radius = cfg.fingerprint_radius;
  ctx.max_heavy_atoms = cfg.max_heavy_atoms;
  for (const auto& e : lib.entries) ctx.refs.push_back(fingerprint_of(e.mol, ctx));
  for (const auto& m : extra_refs) ctx.refs.push_back(fingerprint_of(m, ctx));
  return ctx;
}

inline void evaluate(Candidate& c, const EvalContext& ctx) {
  c.desc = chem::descriptors(c.mol);
  c.qed = chem::qed(c.mol);
  c.sa = chem::sa_score(c.mol);
  c.fp = fingerprint_of(c.mol, ctx);
  auto& f = c.fitness;
  f.s_proxy = proxy_score(c.desc, c.qed);
  f.s_fit = conformer::pocket_fit(c.conf, ctx.hotspots);
  f.s_novelty = novelty(c.fp, ctx.refs);
  f.s_strain = conformer::strain_penalty(c.conf, ctx.ff.strain_scale);
  f.p_sa = c.sa;
  f.total = combine(f, ctx.weights);
}

// Embeds the molecule, aligns it to a uniformly chosen hotspot and evaluates
// it. nullopt for molecules outside the size limit, with leftover attachment
// points, or whose embedding is not finite.
inline std::optional<Candidate> realize(chem::Molecule mol, Lineage lineage, Rng& rng, const EvalContext& ctx) {
  const int heavy = mol.heavy_atom_count();
  if (heavy == 0 || heavy > ctx.max_heavy_atoms) return std::nullopt;
  for (const auto& a : mol.atoms())
    if (a.is_dummy()) return std::nullopt;
  Candidate c;
  c.smiles = chem::write_smiles(mol);
  c.mol = std::move(mol);
  c.lineage = std::move(lineage);
  const std::uint64_t embed_seed = rng();
  const auto& hs = ctx.hotspots;
  const Vec3 hotspot = hs.centroids[uniform_index(rng, hs.centroids.size())];
  try {
    c.conf = conformer::embed3d(c.mol, embed_seed, ctx.ff);
    if (c.conf.positions.size() >= 2) {
      c.conf = conformer::align_fragment(std::move(c.conf), hotspot, hs.pocket_center);
    } else {
      for (auto& p : c.conf.positions) p = hs.pocket_center;
    }
  } catch (const ValidationError&) {
    return std::nullopt;
  }
  for (const auto& p : c.conf.positions)
    if (!finite(p)) return std::nullopt;
  if (!std::isfinite(c.conf.residual_energy)) return std::nullopt;
  evaluate(c, ctx);
  return c;
}

// Sorted canonical SMILES of the BRICS pieces.
inline std::vector<std::string> fragment_multiset(const chem::Molecule& m) {
  std::vector<std::string> out;
  for (const auto& p : chem::brics_decompose(m)) out.push_back(chem::write_smiles(p));
  std::sort(out.begin(), out.end());
  return out;
}

inline std::size_t multiset_symmetric_difference(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::string> d;
  std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(d));
  return d.size();
}

inline std::optional<chem::Molecule> crossover(const chem::Molecule& a, const chem::Molecule& b, Rng& rng,
                                               const EvalContext& ctx, std::string* op = nullptr) {
  if (uniform01(rng) < ctx.p_reaction_first) {
    if (op) *op = "reaction_link";
    if (auto r = chem::reaction_link(a, b, ctx.reactions)) return r;
  }
  if (op) *op = "brics_crossover";
  std::vector<chem::Molecule> pieces = chem::brics_decompose(a);
  for (auto& p : chem::brics_decompose(b)) pieces.push_back(std::move(p));
  shuffle(pieces, rng);
  const std::size_t limit = std::min<std::size_t>(pieces.size(), 4);
  const std::size_t want = 2 + uniform_index(rng, limit - 1);
  chem::Molecule cur = pieces.front();
  std::size_t used = 1;
  for (std::size_t i = 1; i < pieces.size() && used < want; ++i)
    if (auto j = chem::join_fragments(cur, pieces[i])) {
      cur = std::move(*j);
      ++used;
    }
  if (used < 2) return std::nullopt;
  try {
    return chem::sanitize(chem::cap_dummies(std::move(cur)));
  } catch (const SanitizeError&) {
    return std::nullopt;
  }
}

inline std::optional<chem::Molecule> inject_fragment(const chem::Molecule& m, Rng& rng, const EvalContext& ctx) {
  const auto& entries = ctx.library->entries;
  if (entries.empty()) return std::nullopt;
  const auto& frag = entries[uniform_index(rng, entries.size())].mol;
  if (auto r = chem::reaction_link(m, frag, ctx.reactions)) return r;
  return chem::safe_merge(m, frag);
}

// Replaces one BRICS piece by a library piece with the same attachment
// labels. The result is rejected unless its fragment multiset differs from the
// input's by exactly the swapped pair.
inline std::optional<chem::Molecule> scaffold_hop(const chem::Molecule& m, Rng& rng, const EvalContext& ctx) {
  const auto cuts = chem::brics_bonds(m);
  if (cuts.empty()) return std::nullopt;
  const auto atoms = chem::piece_atoms(m, cuts);
  const auto pieces = chem::apply_cuts(m, cuts);
  const std::size_t j = uniform_index(rng, pieces.size());
  const auto& members = atoms[j];
  auto inside = [&](int x) { return std::binary_search(members.begin(), members.end(), x); };
  std::vector<std::pair<int, int>> anchors;  // (label on the piece side, outside atom)
  for (const auto& c : cuts) {
    if (inside(c.atom_1)) anchors.emplace_back(c.label_1, c.atom_2);
    if (inside(c.atom_2)) anchors.emplace_back(c.label_2, c.atom_1);
  }
  std::sort(anchors.begin(), anchors.end());
  std::vector<int> key;
  for (const auto& [label, atom] : anchors) key.push_back(label);
  const auto bucket = ctx.pool.find(key);
  if (bucket == ctx.pool.end()) return std::nullopt;
  const std::string old_smiles = chem::write_smiles(pieces[j]);
  std::vector<const ScaffoldPiece*> options;
  for (const auto& p : bucket->second)
    if (p.smiles != old_smiles) options.push_back(&p);
  if (options.empty()) return std::nullopt;
  const auto& repl = options[uniform_index(rng, options.size())]->mol;

  chem::Molecule out = m;
  const auto remap = out.remove_atoms(members);
  const int off = out.append(repl);
  std::vector<std::pair<int, int>> dummies;  // (label, atom in out)
  for (const auto& [idx, label] : chem::attachment_points(repl)) dummies.emplace_back(label, idx + off);
  std::sort(dummies.begin(), dummies.end());
  std::vector<int> doomed;
  for (std::size_t k = 0; k < anchors.size(); ++k) {
    const int d = dummies[k].second;
    const int inner = out.neighbors(d).front().atom;
    const int outer = remap[static_cast<std::size_t>(anchors[k].second)];
    if (out.bond_between(inner, outer)) return std::nullopt;
    out.add_bond(inner, outer, 1);
    doomed.push_back(d);
  }
  out.remove_atoms(doomed);
  if (out.components().size() != 1) return std::nullopt;
  try {
    out = chem::sanitize(std::move(out));
  } catch (const SanitizeError&) {
    return std::nullopt;
  }
  if (multiset_symmetric_difference(fragment_multiset(m), fragment_multiset(out)) != 2) return std::nullopt;
  return out;
}

enum class MutationKind { kInject, kRelax, kScaffoldHop };

inline const char* mutation_name(MutationKind k) {
  switch (k) {
    case MutationKind::kInject: return "inject";
    case MutationKind::kRelax: return "relax";
    case MutationKind::kScaffoldHop: return "scaffold_hop";
  }
  return "?";
}

// Uniformly picks one of the three mutations. kRelax returns the graph
// unchanged; the caller re-embeds it with a fresh seed.
inline std::optional<chem::Molecule> mutate(const chem::Molecule& m, Rng& rng, const EvalContext& ctx,
                                            MutationKind* kind = nullptr) {
  const auto k = static_cast<MutationKind>(uniform_index(rng, 3));
  if (kind) *kind = k;
  switch (k) {
    case MutationKind::kInject: return inject_fragment(m, rng, ctx);
    case MutationKind::kRelax: return m;
    case MutationKind::kScaffoldHop: return scaffold_hop(m, rng, ctx);
  }
  return std::nullopt;
}

}  // namespace lforge::evolve
