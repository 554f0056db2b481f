#pragma once

// Population initialization, generational step, full run and run outputs.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "lforge/core/parallel.hpp"
#include "lforge/core/table.hpp"
#include "lforge/evolve/operators.hpp"

namespace lforge::evolve {

inline constexpr std::uint64_t kInitStream = 0x696e6974;     // "init"
inline constexpr std::uint64_t kOffspringStream = 0x6f6666;  // "off"
inline constexpr std::uint64_t kRefillStream = 0x726566;     // "ref"

struct OperatorStats {
  int attempts = 0;
  int successes = 0;
};

struct GenerationStats {
  int generation = 0;
  double best_fitness = 0.0;
  double mean_fitness = 0.0;
  double mean_pairwise_tanimoto = 0.0;
  double valid_fraction = 0.0;
  int offspring_attempts = 0;
  int offspring_valid = 0;
  bool kept_parents = false;
  std::map<std::string, OperatorStats> operators;
};

struct RunResult {
  std::vector<Candidate> top;
  std::vector<Candidate> final_population;
  std::vector<Candidate> initial_population;
  std::vector<GenerationStats> stats;
  std::vector<std::string> warnings;
};

// Higher total first; canonical SMILES breaks ties.
inline bool ranks_before(const Candidate& a, const Candidate& b) {
  if (a.fitness.total != b.fitness.total) return a.fitness.total > b.fitness.total;
  return a.smiles < b.smiles;
}

inline std::vector<Candidate> rank_unique(std::vector<Candidate> cs, std::size_t limit) {
  std::stable_sort(cs.begin(), cs.end(), ranks_before);
  std::vector<Candidate> out;
  std::set<std::string> seen;
  for (auto& c : cs) {
    if (out.size() >= limit) break;
    if (seen.insert(c.smiles).second) out.push_back(std::move(c));
  }
  return out;
}

inline double mean_pairwise_tanimoto(const std::vector<Candidate>& pop) {
  if (pop.size() < 2) return 0.0;
  double s = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < pop.size(); ++i)
    for (std::size_t j = i + 1; j < pop.size(); ++j, ++n) s += chem::tanimoto(pop[i].fp, pop[j].fp);
  return s / static_cast<double>(n);
}

inline std::vector<Candidate> init_population(const GAConfig& cfg, const EvalContext& ctx,
                                              std::vector<std::string>* warnings = nullptr) {
  const auto& entries = ctx.library->entries;
  if (entries.empty()) throw InitializationError("fragment library is empty");
  const std::size_t target = static_cast<std::size_t>(cfg.population);
  const std::size_t cap = 50 * target;
  std::vector<Candidate> pop, duplicates;
  std::set<std::string> seen;
  for (std::size_t start = 0; start < cap && pop.size() < target; start += target) {
    const std::size_t batch = std::min(target, cap - start);
    std::vector<std::optional<Candidate>> slots(batch);
    parallel_for(batch, cfg.threads, [&](std::size_t k) {
      Rng rng = substream(cfg.seed, {kInitStream, start + k});
      const auto& f1 = entries[uniform_index(rng, entries.size())];
      if (uniform01(rng) < 0.5) {
        slots[k] = realize(f1.mol, {{f1.canonical}, "init_fragment"}, rng, ctx);
        return;
      }
      const auto& f2 = entries[uniform_index(rng, entries.size())];
      if (auto linked = chem::reaction_link(f1.mol, f2.mol, ctx.reactions))
        slots[k] = realize(std::move(*linked), {{f1.canonical, f2.canonical}, "init_link"}, rng, ctx);
    });
    for (auto& s : slots) {
      if (!s || pop.size() >= target) continue;
      if (seen.insert(s->smiles).second) {
        pop.push_back(std::move(*s));
      } else if (duplicates.size() < target) {
        duplicates.push_back(std::move(*s));
      }
    }
  }
  if (pop.size() < 2) {
    for (auto& d : duplicates) {
      if (pop.size() >= 2) break;
      pop.push_back(std::move(d));
    }
    if (pop.size() >= 2 && warnings) warnings->push_back("initial population contains duplicate SMILES");
  }
  if (pop.size() < 2)
    throw InitializationError("only " + std::to_string(pop.size()) + " valid candidates after " +
                              std::to_string(cap) + " attempts");
  if (pop.size() < target && warnings)
    warnings->push_back("initial population has " + std::to_string(pop.size()) + " of " + std::to_string(target) +
                        " candidates");
  return pop;
}

inline std::size_t tournament(const std::vector<Candidate>& pop, int size, Rng& rng) {
  std::size_t best = uniform_index(rng, pop.size());
  for (int t = 1; t < size; ++t) {
    const std::size_t k = uniform_index(rng, pop.size());
    if (pop[k].fitness.total > pop[best].fitness.total || (pop[k].fitness.total == pop[best].fitness.total && k < best))
      best = k;
  }
  return best;
}

struct Offspring {
  std::optional<Candidate> child;
  std::string op;
};

inline Offspring make_offspring(const std::vector<Candidate>& pop, const GAConfig& cfg, const EvalContext& ctx,
                                Rng& rng, int generation, bool mutation_only) {
  Offspring out;
  const auto& a = pop[tournament(pop, cfg.tournament_size, rng)];
  const double u = uniform01(rng);
  std::optional<chem::Molecule> mol;
  std::vector<std::string> parents{a.smiles};
  if (!mutation_only && u < cfg.p_crossover) {
    const auto& b = pop[tournament(pop, cfg.tournament_size, rng)];
    parents.push_back(b.smiles);
    mol = crossover(a.mol, b.mol, rng, ctx, &out.op);
  } else if (mutation_only || u < cfg.p_crossover + cfg.p_mutation) {
    MutationKind kind;
    mol = mutate(a.mol, rng, ctx, &kind);
    out.op = mutation_name(kind);
  } else {
    out.op = "reproduction";
    mol = a.mol;
  }
  if (mol) {
    out.child = realize(std::move(*mol), {parents, out.op}, rng, ctx);
    if (out.child) out.child->generation = generation;
  }
  return out;
}

inline std::vector<Offspring> breed(const std::vector<Candidate>& pop, const GAConfig& cfg, const EvalContext& ctx,
                                    int generation, std::uint64_t stream, bool mutation_only) {
  const std::size_t n = static_cast<std::size_t>(cfg.population);
  std::vector<Offspring> out(n);
  parallel_for(n, cfg.threads, [&](std::size_t slot) {
    Rng rng = substream(cfg.seed, {stream, static_cast<std::uint64_t>(generation), slot});
    out[slot] = make_offspring(pop, cfg, ctx, rng, generation, mutation_only);
  });
  return out;
}

inline void tally(const std::vector<Offspring>& kids, GenerationStats& st, std::vector<Candidate>& pool) {
  for (const auto& k : kids) {
    auto& op = st.operators[k.op];
    ++op.attempts;
    ++st.offspring_attempts;
    if (!k.child) continue;
    ++op.successes;
    ++st.offspring_valid;
    pool.push_back(*k.child);
  }
}

// One generation: offspring by tournament selection and variation, then the
// best unique candidates of parents and offspring survive. If deduplication
// leaves the population short, extra mutation-only rounds refill it.
inline std::vector<Candidate> step_generation(const std::vector<Candidate>& pop, const EvalContext& ctx,
                                              const GAConfig& cfg, int generation, GenerationStats* stats = nullptr,
                                              std::vector<Candidate>* evaluated = nullptr) {
  if (pop.size() < 2) throw ValidationError("step_generation needs at least two candidates");
  GenerationStats st;
  st.generation = generation;
  std::vector<Candidate> offspring;
  tally(breed(pop, cfg, ctx, generation, kOffspringStream, false), st, offspring);

  std::vector<Candidate> next;
  const std::size_t target = static_cast<std::size_t>(cfg.population);
  if (offspring.empty()) {
    st.kept_parents = true;
    next = pop;
  } else {
    std::vector<Candidate> all = pop;
    all.insert(all.end(), offspring.begin(), offspring.end());
    next = rank_unique(std::move(all), target);
    for (int round = 0; round < cfg.refill_rounds && next.size() < target; ++round) {
      std::vector<Candidate> extra;
      tally(breed(next, cfg, ctx, generation, kRefillStream + static_cast<std::uint64_t>(round), true), st, extra);
      offspring.insert(offspring.end(), extra.begin(), extra.end());
      std::vector<Candidate> merged = next;
      merged.insert(merged.end(), extra.begin(), extra.end());
      next = rank_unique(std::move(merged), target);
    }
  }
  st.valid_fraction = st.offspring_attempts ? static_cast<double>(st.offspring_valid) / st.offspring_attempts : 0.0;
  double sum = 0.0;
  st.best_fitness = next.front().fitness.total;
  for (const auto& c : next) {
    sum += c.fitness.total;
    st.best_fitness = std::max(st.best_fitness, c.fitness.total);
  }
  st.mean_fitness = sum / static_cast<double>(next.size());
  st.mean_pairwise_tanimoto = mean_pairwise_tanimoto(next);
  if (stats) *stats = std::move(st);
  if (evaluated) evaluated->insert(evaluated->end(), offspring.begin(), offspring.end());
  return next;
}

// Best unique candidates over everything evaluated; with references present,
// candidates identical to a reference (novelty 0) are not reported.
inline std::vector<Candidate> aggregate_top(const std::vector<Candidate>& archive, const EvalContext& ctx, int k) {
  std::vector<Candidate> eligible;
  for (const auto& c : archive)
    if (ctx.refs.empty() || c.fitness.s_novelty > 0.0) eligible.push_back(c);
  return rank_unique(std::move(eligible), static_cast<std::size_t>(k));
}

inline RunResult run(const GAConfig& cfg, const EvalContext& ctx) {
  cfg.validate();
  RunResult r;
  auto pop = init_population(cfg, ctx, &r.warnings);
  std::stable_sort(pop.begin(), pop.end(), ranks_before);
  r.initial_population = pop;
  std::vector<Candidate> archive = pop;
  for (int g = 1; g <= cfg.generations; ++g) {
    GenerationStats st;
    pop = step_generation(pop, ctx, cfg, g, &st, &archive);
    if (st.kept_parents) r.warnings.push_back("generation " + std::to_string(g) + ": no valid offspring, parents kept");
    r.stats.push_back(std::move(st));
  }
  r.final_population = pop;
  r.top = aggregate_top(archive, ctx, cfg.top_k_report);
  return r;
}

inline RunResult run(const GAConfig& cfg, const chem::FragmentLibrary& lib, const structure::HotspotSet& hs,
                     const std::vector<chem::Molecule>& refs = {}) {
  cfg.validate();
  const EvalContext ctx = make_context(cfg, lib, hs, refs);
  return run(cfg, ctx);
}

inline nlohmann::json stats_to_json(const RunResult& r, const GAConfig& cfg) {
  nlohmann::json gens = nlohmann::json::array();
  for (const auto& s : r.stats) {
    nlohmann::json ops = nlohmann::json::object();
    for (const auto& [name, o] : s.operators) ops[name] = {{"attempts", o.attempts}, {"successes", o.successes}};
    gens.push_back({{"generation", s.generation},
                    {"best_fitness", s.best_fitness},
                    {"mean_fitness", s.mean_fitness},
                    {"mean_pairwise_tanimoto", s.mean_pairwise_tanimoto},
                    {"valid_fraction", s.valid_fraction},
                    {"offspring_attempts", s.offspring_attempts},
                    {"offspring_valid", s.offspring_valid},
                    {"kept_parents", s.kept_parents},
                    {"operators", ops}});
  }
  return {{"config", to_json(cfg)},
          {"initial_population", r.initial_population.size()},
          {"generations", gens},
          {"warnings", r.warnings}};
}

inline std::string generation_stats_csv(const RunResult& r) {
  std::string out = "generation,best_fitness,mean_fitness,mean_pairwise_tanimoto,valid_fraction,offspring_attempts,offspring_valid\n";
  for (const auto& s : r.stats)
    out += join_row({std::to_string(s.generation), format_double(s.best_fitness), format_double(s.mean_fitness),
                     format_double(s.mean_pairwise_tanimoto), format_double(s.valid_fraction),
                     std::to_string(s.offspring_attempts), std::to_string(s.offspring_valid)},
                    ',');
  return out;
}

inline std::string candidates_csv(const std::vector<Candidate>& cs, bool extended = false) {
  std::string out = extended ? "smiles,pocket_fit,sa_score,qed,logp,fitness,proxy,novelty,strain,mw,tpsa,hbd,hba,rot_bonds,operator\n"
                             : "smiles,pocket_fit,sa_score,qed,logp\n";
  for (const auto& c : cs) {
    std::vector<std::string> row{csv_field(c.smiles), format_double(c.fitness.s_fit), format_double(c.sa),
                                 format_double(c.qed), format_double(c.desc.logp)};
    if (extended) {
      for (double v : {c.fitness.total, c.fitness.s_proxy, c.fitness.s_novelty, c.fitness.s_strain, c.desc.mw, c.desc.tpsa})
        row.push_back(format_double(v));
      for (int v : {c.desc.hbd, c.desc.hba, c.desc.rot_bonds}) row.push_back(std::to_string(v));
      row.push_back(c.lineage.op);
    }
    out += join_row(row, ',');
  }
  return out;
}

inline std::string candidates_smi(const std::vector<Candidate>& cs) {
  std::string out;
  for (std::size_t i = 0; i < cs.size(); ++i) out += cs[i].smiles + " cand_" + std::to_string(i + 1) + "\n";
  return out;
}

inline std::string candidates_sdf(const std::vector<Candidate>& cs) {
  std::string out;
  for (std::size_t i = 0; i < cs.size(); ++i)
    out += conformer::conformer_to_sdf(cs[i].mol, cs[i].conf, "cand_" + std::to_string(i + 1) + " " + cs[i].smiles);
  return out;
}

}  // namespace lforge::evolve
