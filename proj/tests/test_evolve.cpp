#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "lforge/chem/sanitize.hpp"
#include "lforge/evolve/ga.hpp"

namespace {

using namespace lforge;
using namespace lforge::evolve;

const std::filesystem::path kFragments = std::filesystem::path(LFORGE_DATA_DIR) / "fragments.csv";

const chem::FragmentLibrary& library() {
  static const chem::FragmentLibrary lib = chem::load_fragment_library(kFragments);
  return lib;
}

structure::HotspotSet hotspots() {
  structure::HotspotSet hs;
  hs.pocket_center = {0, 0, 0};
  hs.pocket_radius = 6.0;
  hs.centroids = {{2.5, 0, 0}, {-2.5, 0, 0}, {0, 2.5, 0}, {0, -2.5, 0}};
  return hs;
}

GAConfig small_config(std::uint64_t seed = 11) {
  GAConfig cfg;
  cfg.population = 10;
  cfg.generations = 3;
  cfg.top_k_report = 5;
  cfg.seed = seed;
  cfg.threads = 1;
  return cfg;
}

chem::DescriptorRecord ideal_descriptors() {
  chem::DescriptorRecord d;
  d.logp = 2.0;
  d.mw = 350.0;
  d.rot_bonds = 3;
  return d;
}

chem::Fingerprint bits(std::initializer_list<std::size_t> on) {
  chem::Fingerprint fp(64, 2);
  for (auto b : on) fp.set(b);
  return fp;
}

bool same_population(const std::vector<Candidate>& a, const std::vector<Candidate>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].smiles != b[i].smiles || a[i].fitness.total != b[i].fitness.total) return false;
    const auto& pa = a[i].conf.positions;
    const auto& pb = b[i].conf.positions;
    if (pa.size() != pb.size()) return false;
    for (std::size_t k = 0; k < pa.size(); ++k)
      if (pa[k].x != pb[k].x || pa[k].y != pb[k].y || pa[k].z != pb[k].z) return false;
  }
  return true;
}

bool reparses(const Candidate& c) {
  try {
    return chem::write_smiles(chem::parse_smiles(c.smiles)) == c.smiles;
  } catch (const std::exception&) {
    return false;
  }
}

// Multiset difference by explicit counting.
std::size_t count_difference(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::map<std::string, int> n;
  for (const auto& s : a) ++n[s];
  for (const auto& s : b) --n[s];
  std::size_t d = 0;
  for (const auto& [_, v] : n) d += static_cast<std::size_t>(std::abs(v));
  return d;
}

}  // namespace

TEST(Proxy, AllIdealIsOne) { EXPECT_DOUBLE_EQ(proxy_score(ideal_descriptors(), 1.0), 1.0); }

TEST(Proxy, ZeroQedLeavesDesirabilities) { EXPECT_NEAR(proxy_score(ideal_descriptors(), 0.0), 0.6, 1e-12); }

TEST(Proxy, HeavyMoleculeLosesMwTerm) {
  auto d = ideal_descriptors();
  d.mw = 700.0;
  EXPECT_EQ(mw_desirability(700.0), 0.0);
  EXPECT_NEAR(proxy_score(d, 1.0), 0.8, 1e-12);
}

TEST(Proxy, TrapezoidShape) {
  EXPECT_NEAR(logp_desirability(0.3), 0.5, 1e-12);
  EXPECT_NEAR(logp_desirability(4.3), 0.5, 1e-12);
  EXPECT_NEAR(mw_desirability(200.0), 0.5, 1e-12);
  EXPECT_NEAR(mw_desirability(525.0), 0.5, 1e-12);
  EXPECT_EQ(rotb_desirability(7), 1.0);
  EXPECT_NEAR(rotb_desirability(10), 0.4, 1e-12);
  EXPECT_EQ(rotb_desirability(12), 0.0);
  EXPECT_EQ(logp_desirability(-1.0), 0.0);
}

TEST(Proxy, StaysInUnitInterval) {
  Rng rng(3);
  for (int i = 0; i < 2000; ++i) {
    chem::DescriptorRecord d;
    d.logp = normal(rng, 2.0, 4.0);
    d.mw = 100.0 + 700.0 * uniform01(rng);
    d.rot_bonds = static_cast<int>(uniform_index(rng, 20));
    const double s = proxy_score(d, uniform01(rng));
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 1.0);
  }
}

TEST(Novelty, IdenticalIsZero) {
  const auto fp = bits({1, 5, 9});
  EXPECT_EQ(novelty(fp, {bits({2}), fp}), 0.0);
}

TEST(Novelty, EmptyReferencesIsOne) { EXPECT_EQ(novelty(bits({1}), {}), 1.0); }

TEST(Novelty, UsesClosestReference) {
  const auto fp = bits({0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
  const std::vector<chem::Fingerprint> refs{bits({0, 1}), bits({0, 1, 2, 3, 4}), bits({0, 1, 2})};
  ASSERT_NEAR(chem::tanimoto(fp, refs[0]), 0.2, 1e-12);
  ASSERT_NEAR(chem::tanimoto(fp, refs[1]), 0.5, 1e-12);
  ASSERT_NEAR(chem::tanimoto(fp, refs[2]), 0.3, 1e-12);
  EXPECT_NEAR(novelty(fp, refs), 0.5, 1e-12);
}

TEST(Fitness, WorkedCombination) {
  FitnessBreakdown f{0.6, 0.71, 1.0, 0.2, 0.3, 0.0};
  EXPECT_NEAR(combine(f, Weights{}), 0.5985, 1e-12);
}

TEST(Fitness, ZeroTermsGiveZero) { EXPECT_EQ(combine(FitnessBreakdown{}, Weights{}), 0.0); }

TEST(Fitness, SingleWeightProjects) {
  Weights w{0, 1, 0, 0, 0};
  FitnessBreakdown f{0.6, 0.71, 1.0, 0.2, 0.3, 0.0};
  EXPECT_EQ(combine(f, w), 0.71);
}

TEST(Fitness, ZeroedWeightRemovesInfluence) {
  Rng rng(9);
  for (int i = 0; i < 200; ++i) {
    FitnessBreakdown a{uniform01(rng), uniform01(rng), uniform01(rng), uniform01(rng), 1 + 5 * uniform01(rng), 0};
    for (int term = 0; term < 5; ++term) {
      Weights w;
      FitnessBreakdown b = a;
      double* wt[] = {&w.w_p, &w.w_f, &w.w_n, &w.w_s, &w.lambda_sa};
      double* ft[] = {&b.s_proxy, &b.s_fit, &b.s_novelty, &b.s_strain, &b.p_sa};
      *wt[term] = 0.0;
      *ft[term] = uniform01(rng);
      EXPECT_EQ(combine(a, w), combine(b, w));
    }
  }
}

TEST(Config, Validation) {
  EXPECT_NO_THROW(GAConfig{}.validate());
  auto c = GAConfig{};
  c.population = 1;
  EXPECT_THROW(c.validate(), ValidationError);
  c = GAConfig{};
  c.weights.w_n = -0.1;
  EXPECT_THROW(c.validate(), ValidationError);
  c = GAConfig{};
  c.p_reaction_first = 1.5;
  EXPECT_THROW(c.validate(), ValidationError);
  c = GAConfig{};
  c.p_crossover = 0.8;
  c.p_mutation = 0.3;
  EXPECT_THROW(c.validate(), ValidationError);
}

TEST(Evaluate, MatchesComponentsAndIsDeterministic) {
  const auto cfg = small_config();
  const auto ctx = make_context(cfg, library(), hotspots());
  Rng r1(5), r2(5);
  auto a = realize(chem::parse_smiles("CC(=O)Nc1ccc(O)cc1"), {}, r1, ctx);
  auto b = realize(chem::parse_smiles("CC(=O)Nc1ccc(O)cc1"), {}, r2, ctx);
  ASSERT_TRUE(a && b);
  const auto& f = a->fitness;
  EXPECT_EQ(f.total, b->fitness.total);
  EXPECT_NEAR(f.s_proxy, proxy_score(chem::descriptors(a->mol), chem::qed(a->mol)), 1e-12);
  EXPECT_NEAR(f.s_fit, conformer::pocket_fit(a->conf, ctx.hotspots), 1e-12);
  EXPECT_NEAR(f.p_sa, chem::sa_score(a->mol), 1e-12);
  EXPECT_NEAR(f.total, combine(f, cfg.weights), 1e-12);
  for (double t : {f.s_proxy, f.s_fit, f.s_novelty, f.s_strain}) {
    EXPECT_GE(t, 0.0);
    EXPECT_LE(t, 1.0);
  }
}

TEST(Evaluate, LibraryFragmentHasZeroNovelty) {
  const auto ctx = make_context(small_config(), library(), hotspots());
  Rng rng(1);
  auto c = realize(library().entries.front().mol, {}, rng, ctx);
  ASSERT_TRUE(c);
  EXPECT_EQ(c->fitness.s_novelty, 0.0);
}

TEST(Evaluate, OversizedMoleculeIsDiscarded) {
  auto cfg = small_config();
  cfg.max_heavy_atoms = 5;
  const auto ctx = make_context(cfg, library(), hotspots());
  Rng rng(1);
  EXPECT_FALSE(realize(chem::parse_smiles("c1ccccc1CC"), {}, rng, ctx));
}

TEST(Init, FullLibraryGivesValidUniquePopulation) {
  auto cfg = small_config();
  cfg.population = 40;
  const auto ctx = make_context(cfg, library(), hotspots());
  const auto pop = init_population(cfg, ctx);
  ASSERT_EQ(pop.size(), 40u);
  std::set<std::string> smiles;
  for (const auto& c : pop) {
    EXPECT_TRUE(reparses(c)) << c.smiles;
    EXPECT_TRUE(chem::is_sanitizable(c.mol));
    smiles.insert(c.smiles);
  }
  EXPECT_EQ(smiles.size(), pop.size());
}

TEST(Init, DeterministicAcrossRunsAndThreads) {
  auto cfg = small_config(21);
  const auto ctx = make_context(cfg, library(), hotspots());
  const auto a = init_population(cfg, ctx);
  const auto b = init_population(cfg, ctx);
  cfg.threads = 4;
  const auto c = init_population(cfg, ctx);
  EXPECT_TRUE(same_population(a, b));
  EXPECT_TRUE(same_population(a, c));
}

TEST(Init, SingleFragmentLibrary) {
  const auto lib = chem::build_fragment_library({{"Toluene", "aromatic", "Cc1ccccc1", "test"}});
  auto cfg = small_config();
  cfg.population = 2;
  const auto ctx = make_context(cfg, lib, hotspots());
  std::vector<std::string> warnings;
  const auto pop = init_population(cfg, ctx, &warnings);
  ASSERT_EQ(pop.size(), 2u);
  for (const auto& c : pop) EXPECT_TRUE(reparses(c));
  if (pop[0].smiles == pop[1].smiles) {
    EXPECT_FALSE(warnings.empty());
  }
}

TEST(Init, NothingValidThrows) {
  const auto lib = chem::build_fragment_library({{"Toluene", "aromatic", "Cc1ccccc1", "test"}});
  auto cfg = small_config();
  cfg.max_heavy_atoms = 3;
  const auto ctx = make_context(cfg, lib, hotspots());
  EXPECT_THROW(init_population(cfg, ctx), InitializationError);
}

TEST(Init, EmptyLibraryThrows) {
  const chem::FragmentLibrary lib;
  const auto ctx = make_context(small_config(), lib, hotspots());
  EXPECT_THROW(init_population(small_config(), ctx), InitializationError);
}

TEST(Crossover, AmineAndAcidGiveAmide) {
  auto cfg = small_config();
  cfg.p_reaction_first = 1.0;
  const auto ctx = make_context(cfg, library(), hotspots());
  Rng rng(2);
  std::string op;
  const auto child = crossover(chem::parse_smiles("CCN"), chem::parse_smiles("CC(=O)O"), rng, ctx, &op);
  ASSERT_TRUE(child);
  EXPECT_EQ(op, "reaction_link");
  EXPECT_EQ(chem::write_smiles(*child), chem::canonical_smiles("CCNC(C)=O"));
}

TEST(Crossover, BenzenePairFallsBackDeterministically) {
  auto cfg = small_config();
  cfg.p_reaction_first = 1.0;
  const auto ctx = make_context(cfg, library(), hotspots());
  const auto benzene = chem::parse_smiles("c1ccccc1");
  for (std::uint64_t s = 0; s < 20; ++s) {
    Rng r1(s), r2(s);
    std::string op;
    const auto a = crossover(benzene, benzene, r1, ctx, &op);
    const auto b = crossover(benzene, benzene, r2, ctx);
    EXPECT_EQ(op, "brics_crossover");
    ASSERT_EQ(a.has_value(), b.has_value());
    if (a) {
      EXPECT_EQ(chem::write_smiles(*a), chem::write_smiles(*b));
    }
  }
}

TEST(Crossover, ChildrenAlwaysSanitize) {
  const auto ctx = make_context(small_config(), library(), hotspots());
  const auto& e = library().entries;
  Rng pick(17);
  int produced = 0;
  for (int t = 0; t < 1000; ++t) {
    const auto& a = e[uniform_index(pick, e.size())].mol;
    const auto& b = e[uniform_index(pick, e.size())].mol;
    Rng rng = substream(99, {static_cast<std::uint64_t>(t)});
    const auto child = crossover(a, b, rng, ctx);
    if (!child) continue;
    ++produced;
    EXPECT_TRUE(chem::is_sanitizable(*child));
    const std::string smi = chem::write_smiles(*child);
    EXPECT_EQ(chem::canonical_smiles(smi), smi);
  }
  EXPECT_GT(produced, 500);
}

TEST(Mutate, RelaxKeepsGraph) {
  const auto ctx = make_context(small_config(), library(), hotspots());
  const auto m = chem::parse_smiles("CC(=O)Nc1ccc(O)cc1");
  int seen = 0;
  for (std::uint64_t s = 0; s < 60; ++s) {
    Rng rng(s);
    MutationKind kind;
    const auto out = mutate(m, rng, ctx, &kind);
    if (kind != MutationKind::kRelax) continue;
    ++seen;
    ASSERT_TRUE(out);
    EXPECT_EQ(chem::write_smiles(*out), chem::write_smiles(m));
  }
  EXPECT_GT(seen, 0);
}

TEST(Mutate, RelaxReembedsWithFreshCoordinates) {
  const auto ctx = make_context(small_config(), library(), hotspots());
  const auto m = chem::parse_smiles("CCOc1ccccc1");
  Rng r1(1), r2(2);
  const auto a = realize(m, {}, r1, ctx);
  const auto b = realize(m, {}, r2, ctx);
  ASSERT_TRUE(a && b);
  EXPECT_EQ(a->smiles, b->smiles);
  bool moved = false;
  for (std::size_t i = 0; i < a->conf.positions.size(); ++i)
    moved = moved || norm(a->conf.positions[i] - b->conf.positions[i]) > 1e-6;
  EXPECT_TRUE(moved);
}

TEST(Mutate, InjectionNeedsFreeValence) {
  const auto ctx = make_context(small_config(), library(), hotspots());
  const auto cf4 = chem::parse_smiles("FC(F)(F)F");
  for (std::uint64_t s = 0; s < 30; ++s) {
    Rng rng(s);
    EXPECT_FALSE(inject_fragment(cf4, rng, ctx));
  }
}

TEST(Mutate, ScaffoldHopSwapsOnePiece) {
  const auto ctx = make_context(small_config(), library(), hotspots());
  const std::vector<std::string> inputs{"CC(=O)Nc1ccc(O)cc1", "O=C(NCc1ccccc1)c1ccncc1", "COc1ccc(CN2CCOCC2)cc1",
                                        "Cc1ccc(S(=O)(=O)Nc2ccccc2)cc1"};
  int hops = 0;
  for (const auto& smi : inputs) {
    const auto m = chem::parse_smiles(smi);
    const auto before = fragment_multiset(m);
    for (std::uint64_t s = 0; s < 40; ++s) {
      Rng rng(s);
      const auto out = scaffold_hop(m, rng, ctx);
      if (!out) continue;
      ++hops;
      EXPECT_TRUE(chem::is_sanitizable(*out));
      EXPECT_EQ(count_difference(before, fragment_multiset(*out)), 2u) << smi << " -> " << chem::write_smiles(*out);
    }
  }
  EXPECT_GT(hops, 0);
}

TEST(Step, ElitismAndValidity) {
  const auto cfg = small_config(4);
  const auto ctx = make_context(cfg, library(), hotspots());
  auto pop = init_population(cfg, ctx);
  double best = -1e300;
  for (const auto& c : pop) best = std::max(best, c.fitness.total);
  for (int g = 1; g <= 3; ++g) {
    GenerationStats st;
    pop = step_generation(pop, ctx, cfg, g, &st);
    EXPECT_GE(st.best_fitness, best);
    best = st.best_fitness;
    std::set<std::string> smiles;
    for (const auto& c : pop) {
      EXPECT_TRUE(reparses(c));
      smiles.insert(c.smiles);
    }
    EXPECT_EQ(smiles.size(), pop.size());
    EXPECT_LE(pop.size(), static_cast<std::size_t>(cfg.population));
    EXPECT_EQ(st.offspring_attempts, [&] {
      int n = 0;
      for (const auto& [_, o] : st.operators) n += o.attempts;
      return n;
    }());
  }
}

TEST(Step, DeterministicAcrossThreads) {
  auto cfg = small_config(8);
  const auto ctx = make_context(cfg, library(), hotspots());
  const auto pop = init_population(cfg, ctx);
  const auto a = step_generation(pop, ctx, cfg, 1);
  const auto b = step_generation(pop, ctx, cfg, 1);
  cfg.threads = 3;
  const auto c = step_generation(pop, ctx, cfg, 1);
  EXPECT_TRUE(same_population(a, b));
  EXPECT_TRUE(same_population(a, c));
}

TEST(Step, ClonePopulationIsDeduplicated) {
  const auto cfg = small_config(5);
  const auto ctx = make_context(cfg, library(), hotspots());
  Rng rng(3);
  const auto seed = realize(chem::parse_smiles("CC(=O)Nc1ccc(O)cc1"), {}, rng, ctx);
  ASSERT_TRUE(seed);
  const std::vector<Candidate> clones(static_cast<std::size_t>(cfg.population), *seed);
  const auto next = step_generation(clones, ctx, cfg, 1);
  std::set<std::string> smiles;
  for (const auto& c : next) smiles.insert(c.smiles);
  EXPECT_EQ(smiles.size(), next.size());
  EXPECT_GT(next.size(), 1u);
}

TEST(Step, NeedsTwoCandidates) {
  const auto cfg = small_config();
  const auto ctx = make_context(cfg, library(), hotspots());
  EXPECT_THROW(step_generation({}, ctx, cfg, 1), ValidationError);
}

TEST(Run, ZeroGenerationsRanksInitialPopulation) {
  auto cfg = small_config(13);
  cfg.generations = 0;
  const auto r = run(cfg, library(), hotspots());
  EXPECT_TRUE(r.stats.empty());
  ASSERT_FALSE(r.top.empty());
  for (std::size_t i = 1; i < r.initial_population.size(); ++i)
    EXPECT_GE(r.initial_population[i - 1].fitness.total, r.initial_population[i].fitness.total);
  std::vector<Candidate> novel;
  for (const auto& c : r.initial_population)
    if (c.fitness.s_novelty > 0.0) novel.push_back(c);
  ASSERT_LE(r.top.size(), novel.size());
  for (std::size_t i = 0; i < r.top.size(); ++i) EXPECT_EQ(r.top[i].smiles, novel[i].smiles);
}

TEST(Run, StatsAndTopSet) {
  const auto cfg = small_config(31);
  const auto r = run(cfg, library(), hotspots());
  ASSERT_EQ(r.stats.size(), 3u);
  for (std::size_t g = 1; g < r.stats.size(); ++g) EXPECT_GE(r.stats[g].best_fitness, r.stats[g - 1].best_fitness);
  for (const auto& s : r.stats) {
    EXPECT_LT(s.mean_pairwise_tanimoto, 1.0);
    EXPECT_GE(s.valid_fraction, 0.0);
    EXPECT_LE(s.valid_fraction, 1.0);
  }
  ASSERT_FALSE(r.top.empty());
  EXPECT_LE(r.top.size(), 5u);
  std::set<std::string> smiles;
  for (std::size_t i = 0; i < r.top.size(); ++i) {
    EXPECT_GT(r.top[i].fitness.s_novelty, 0.0);
    EXPECT_TRUE(reparses(r.top[i]));
    smiles.insert(r.top[i].smiles);
    if (i) {
      EXPECT_GE(r.top[i - 1].fitness.total, r.top[i].fitness.total);
    }
  }
  EXPECT_EQ(smiles.size(), r.top.size());
  EXPECT_GE(r.top.front().fitness.total, r.stats.back().best_fitness - 1e-12);
}

TEST(Run, BitIdenticalRerun) {
  auto cfg = small_config(77);
  const auto a = run(cfg, library(), hotspots());
  cfg.threads = 2;
  const auto b = run(cfg, library(), hotspots());
  EXPECT_TRUE(same_population(a.top, b.top));
  EXPECT_TRUE(same_population(a.final_population, b.final_population));
  EXPECT_EQ(generation_stats_csv(a), generation_stats_csv(b));
}

TEST(Run, Outputs) {
  const auto cfg = small_config(3);
  const auto r = run(cfg, library(), hotspots());
  const auto csv = candidates_csv(r.top);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "smiles,pocket_fit,sa_score,qed,logp");
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), r.top.size() + 1);
  const auto js = stats_to_json(r, cfg);
  EXPECT_EQ(js["generations"].size(), 3u);
  EXPECT_EQ(js["config"]["lambda_sa"], 0.1);
  const auto sdf = candidates_sdf(r.top);
  std::size_t records = 0;
  for (std::size_t p = sdf.find("$$$$"); p != std::string::npos; p = sdf.find("$$$$", p + 1)) ++records;
  EXPECT_EQ(records, r.top.size());
}
