// Acceptance runner: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include "support/oracles.hpp"
#include "support/synthetic.hpp"

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lforge/chem/canonical.hpp"
#include "lforge/chem/descriptors.hpp"
#include "lforge/chem/fingerprint.hpp"
#include "lforge/chem/library.hpp"
#include "lforge/chem/sanitize.hpp"
#include "lforge/evolve/ga.hpp"
#include "lforge/geom/conformer.hpp"
#include "lforge/geom/rotation.hpp"
#include "lforge/network/coexpression.hpp"
#include "lforge/structure/pockets.hpp"

namespace {

namespace fs = std::filesystem;
namespace fx = lforge::testing;
using namespace lforge;

const fs::path kFragments = fs::path(LFORGE_DATA_DIR) / "fragments.csv";

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      notes.push_back("failed: " + what);
    }
  }
  void note(const std::string& s) { notes.push_back(s); }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string num(double v, int digits = 6) {
  std::ostringstream os;
  os.precision(digits);
  os << v;
  return os.str();
}

expr::ExpressionMatrix random_matrix(std::size_t genes, std::size_t samples, Rng& rng) {
  expr::ExpressionMatrix m;
  m.level = expr::Level::gene;
  m.values = Matrix(genes, samples);
  for (std::size_t g = 0; g < genes; ++g) {
    m.gene_ids.push_back("g" + std::to_string(g));
    for (std::size_t s = 0; s < samples; ++s) m.values(g, s) = 5.0 + normal(rng);
  }
  for (std::size_t s = 0; s < samples; ++s) m.sample_ids.push_back("s" + std::to_string(s));
  return m;
}

structure::HotspotSet ga_hotspots() {
  Rng rng(2024);
  std::vector<Vec3> atoms;
  for (int i = 0; i < 60; ++i) atoms.push_back({normal(rng, 0, 3), normal(rng, 0, 3), normal(rng, 0, 3)});
  return structure::kmeans_hotspots(atoms, 4, 42);
}

bool sanitize_valid(const evolve::Candidate& c) {
  try {
    const auto m = chem::parse_smiles(c.smiles);
    return chem::is_sanitizable(c.mol) && chem::write_smiles(m) == c.smiles;
  } catch (const std::exception&) {
    return false;
  }
}

std::string run_fingerprint(const evolve::RunResult& r) {
  return evolve::candidates_csv(r.top, true) + evolve::candidates_sdf(r.top) + evolve::generation_stats_csv(r) +
         evolve::candidates_csv(r.final_population, true) + evolve::candidates_sdf(r.final_population);
}

// Shared between AC8 and AC9.
struct GaRuns {
  evolve::RunResult single, multi;
  double seconds_single = 0, seconds_multi = 0;
};

const GaRuns& paper_shape_runs() {
  static const GaRuns runs = [] {
    GaRuns g;
    const auto lib = chem::load_fragment_library(kFragments);
    const auto hs = ga_hotspots();
    evolve::GAConfig cfg;
    cfg.population = 40;
    cfg.generations = 20;
    cfg.hotspot_k = 4;
    cfg.seed = 42;
    cfg.threads = 1;
    auto t0 = Clock::now();
    g.single = evolve::run(cfg, lib, hs);
    g.seconds_single = seconds_since(t0);
    cfg.threads = 4;
    t0 = Clock::now();
    g.multi = evolve::run(cfg, lib, hs);
    g.seconds_multi = seconds_since(t0);
    return g;
  }();
  return runs;
}

Outcome ac1() {
  Outcome o;
  network::GeneCorrMatrix c;
  c.gene_ids = {"a", "b"};
  c.r = Matrix(2, 2);
  c.r(0, 0) = c.r(1, 1) = 1.0;
  c.r(0, 1) = c.r(1, 0) = 0.5;
  const double a = network::adjacency(c, 6).a(0, 1);
  o.require(std::abs(a - 0.015625) <= 1e-9, "adjacency |0.5|^6 = " + num(a, 12));

  structure::PocketDescriptor p;
  p.volume = 500;
  p.depth = 20;
  p.enclosure = 0.8;
  p.hydrophobicity = 0.5;
  p.aromaticity = 10;
  p.donors = 5;
  p.acceptors = 7;
  const double s = structure::composite_score(p);
  o.require(std::abs(s - 177.2) <= 1e-9, "pocket composite " + num(s, 12));

  conformer::Conformer conf;
  conf.positions = {{0, 0, 0}, {10, 0, 0}};
  conf.elements = {6, 6};
  structure::HotspotSet hs;
  hs.pocket_center = {0, 0, 0};
  hs.pocket_radius = 1.0;
  hs.centroids = {{0, 4, 0}, {10, 4, 0}};
  const double fit = conformer::pocket_fit(conf, hs);
  o.require(std::abs(fit - 0.5) <= 1e-9, "pocket fit " + num(fit, 12));

  const evolve::FitnessBreakdown f{0.6, 0.71, 1.0, 0.2, 0.3, 0.0};
  const double total = evolve::combine(f, evolve::Weights{});
  o.require(std::abs(total - 0.5985) <= 1e-9, "fitness " + num(total, 12));
  o.note("adjacency " + num(a) + ", composite " + num(s) + ", fit " + num(fit) + ", fitness " + num(total));
  return o;
}

Outcome ac2() {
  Outcome o;
  const auto t0 = Clock::now();
  const auto m = fx::scale_free_cohort(500);
  std::vector<int> betas;
  for (int b = 1; b <= 20; ++b) betas.push_back(b);
  const auto scan = network::soft_threshold_scan(network::correlation_matrix(m), betas);
  const double secs = seconds_since(t0);
  const auto it = std::find_if(scan.records.begin(), scan.records.end(),
                               [&](const auto& r) { return r.beta == scan.recommended_beta; });
  o.require(it != scan.records.end(), "recommended beta is in the scan");
  const double r2 = it == scan.records.end() ? 0.0 : it->r_squared;
  o.require(scan.threshold_met && r2 > 0.85, "signed R^2 " + num(r2) + " > 0.85");
  o.require(secs < 10.0, "runtime " + num(secs, 3) + " s < 10 s");
  o.note("beta " + std::to_string(scan.recommended_beta) + ", signed R^2 " + num(r2, 4) + ", " + num(secs, 3) + " s");
  return o;
}

Outcome ac3() {
  Outcome o;
  const auto t0 = Clock::now();
  const auto pc = fx::planted_blocks(300, 50, 3);
  const auto adj = network::adjacency(network::correlation_matrix(pc.matrix), 6);
  const auto mods = network::detect_modules(adj, 5, 0.75);
  const double ari = fx::adjusted_rand_index(pc.truth, mods.labels);
  const auto ranked = network::rank_biomarkers(network::intramodular_connectivity(adj, mods), {"HB"}, 10);
  const double secs = seconds_since(t0);
  o.require(ari >= 0.8, "ARI " + num(ari) + " >= 0.8");
  for (auto h : pc.hubs) {
    const auto& id = pc.matrix.gene_ids[h];
    const bool found = std::any_of(ranked.ranking.begin(), ranked.ranking.end(), [&](const auto& e) { return e.gene_id == id; });
    o.require(found, "hub " + id + " in top 10");
  }
  o.require(secs < 30.0, "runtime " + num(secs, 3) + " s < 30 s");
  o.note("ARI " + num(ari, 4) + ", " + std::to_string(mods.modules.size()) + " modules, " + num(secs, 3) + " s");
  return o;
}

Outcome ac4() {
  Outcome o;
  Rng rng(404);
  double worst = 0;
  std::vector<std::size_t> rows(10);
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  for (int t = 0; t < 20; ++t) {
    const auto m = random_matrix(10, 15, rng);
    const auto expected = fx::oracle_pc1(m, rows);
    const auto e = network::module_eigengene(m, rows);
    for (std::size_t s = 0; s < expected.size(); ++s) worst = std::max(worst, std::abs(e.values[s] - expected[s]));
  }
  o.require(worst <= 1e-6, "max deviation " + num(worst) + " <= 1e-6");
  o.note("max deviation " + num(worst, 3) + " over 20 matrices");
  return o;
}

Outcome ac5() {
  Outcome o;
  const auto t0 = Clock::now();
  const auto lib = chem::load_fragment_library(kFragments);
  int checked = 0;
  for (const auto& e : lib.entries) {
    const std::string smi = chem::write_smiles(e.mol);
    const auto back = chem::parse_smiles(smi);
    o.require(chem::is_sanitizable(e.mol), e.name + " sanitizes");
    o.require(fx::isomorphic(e.mol, back), e.name + " round-trips to an isomorphic graph");
    o.require(chem::write_smiles(back) == smi, e.name + " canonical form is a fixpoint");
    ++checked;
  }
  bool rejected = false;
  try {
    chem::parse_smiles("c1cc(CF3)ccc1");
  } catch (const ParseError&) {
    rejected = true;
  } catch (const std::exception&) {
  }
  o.require(rejected, "c1cc(CF3)ccc1 rejected with a parse error");

  Rng rng(5);
  int exact = 0;
  for (int t = 0; t < 1000; ++t) {
    chem::Fingerprint a(2048, 2), b(2048, 2);
    const double da = 0.5 * uniform01(rng), db = 0.5 * uniform01(rng);
    for (std::size_t k = 0; k < 2048; ++k) {
      if (uniform01(rng) < da) a.set(k);
      if (uniform01(rng) < db) b.set(k);
    }
    exact += chem::tanimoto(a, b) == fx::set_tanimoto(a, b);
  }
  o.require(exact == 1000, std::to_string(exact) + "/1000 Tanimoto values match the set oracle exactly");
  const double secs = seconds_since(t0);
  o.require(secs < 30.0, "runtime " + num(secs, 3) + " s < 30 s");
  o.note(std::to_string(checked) + " fragments round-tripped, " + std::to_string(lib.rejected.size()) +
         " library rows rejected, Tanimoto " + std::to_string(exact) + "/1000 exact, " + num(secs, 3) + " s");
  return o;
}

Outcome ac6() {
  Outcome o;
  const double mw = chem::descriptors(chem::parse_smiles("c1ccccc1")).mw;
  o.require(std::abs(mw - 78.11) <= 0.01, "benzene MW " + num(mw));
  chem::DescriptorRecord l1;
  l1.mw = 350;
  l1.logp = 2.6;
  l1.tpsa = 70;
  l1.hba = 3;
  l1.hbd = 1;
  l1.rot_bonds = 2;
  const auto f = chem::rule_filters(l1);
  o.require(f.lipinski_violations == 0, "L1 Lipinski violations 0");
  o.require(!f.pfizer_flag, "L1 Pfizer 0");
  o.require(!f.gsk_flag, "L1 GSK 0");
  o.note("benzene MW " + num(mw, 6) + ", L1 Lipinski/Pfizer/GSK " + std::to_string(f.lipinski_violations) + "/" +
         std::to_string(f.pfizer_flag) + "/" + std::to_string(f.gsk_flag));
  return o;
}

Outcome ac7() {
  Outcome o;
  Rng rng(77);
  const auto unit = [&] {
    Vec3 v{normal(rng), normal(rng), normal(rng)};
    return v / norm(v);
  };
  double orth = 0, det = 0, map = 0;
  int antiparallel = 0;
  for (int t = 0; t < 10000; ++t) {
    const Vec3 from = unit() * (0.1 + 5 * uniform01(rng));
    Vec3 to = unit() * (0.1 + 5 * uniform01(rng));
    if (t % 100 == 0) {
      to = from * -2.0;
      ++antiparallel;
    }
    const Mat3 r = rodrigues_rotation(from, to);
    const Mat3 rtr = r.transposed() * r, id = Mat3::identity();
    for (std::size_t i = 0; i < 9; ++i) orth = std::max(orth, std::abs(rtr.m[i] - id.m[i]));
    det = std::max(det, std::abs(r.determinant() - 1.0));
    map = std::max(map, distance(r * (from / norm(from)), to / norm(to)));
  }
  o.require(orth <= 1e-9, "max |R^T R - I| " + num(orth));
  o.require(det <= 1e-9, "max |det R - 1| " + num(det));
  o.require(map <= 1e-6, "max mapping error " + num(map));
  o.require(antiparallel == 100, "100 antiparallel cases");

  const std::vector<std::string> mols{"CCCCCC", "c1ccc(CC(=O)N)cc1", "C1CCC(CC1)C(C)(C)C#N", "CC(=O)Nc1ccc(O)cc1",
                                      "O=C(O)c1ccncc1"};
  double worst = 0;
  int conformers = 0;
  for (std::size_t i = 0; i < mols.size(); ++i) {
    const auto m = chem::parse_smiles(mols[i]);
    const auto em = conformer::build_energy_model(m);
    for (int k = 0; k < 10; ++k) {
      auto x = conformer::embed3d(m, 1000 * i + static_cast<std::uint64_t>(k)).positions;
      for (auto& p : x) p += Vec3{normal(rng, 0, 0.4), normal(rng, 0, 0.4), normal(rng, 0, 0.4)};
      std::vector<Vec3> g;
      conformer::energy(em, x, &g);
      const auto fd = fx::numeric_gradient(em, x);
      double diff = 0, ref = 0;
      for (std::size_t a = 0; a < x.size(); ++a) {
        diff += dot(g[a] - fd[a], g[a] - fd[a]);
        ref += dot(fd[a], fd[a]);
      }
      worst = std::max(worst, std::sqrt(diff) / std::max(std::sqrt(ref), 1e-12));
      ++conformers;
    }
  }
  o.require(conformers == 50, "50 conformers");
  o.require(worst <= 1e-4, "gradient relative error " + num(worst) + " <= 1e-4");
  o.note("R^T R " + num(orth, 3) + ", det " + num(det, 3) + ", map " + num(map, 3) + ", gradient rel " + num(worst, 3) +
         " over " + std::to_string(conformers) + " conformers");
  return o;
}

Outcome ac8() {
  Outcome o;
  const auto& g = paper_shape_runs();
  const auto& r = g.single;
  o.require(g.seconds_single < 300.0 && g.seconds_multi < 300.0, "runtime under 5 minutes");
  o.require(r.stats.size() == 20, "20 generation rows");
  int valid = 0, total = 0;
  for (const auto* set : {&r.top, &r.final_population, &r.initial_population})
    for (const auto& c : *set) {
      ++total;
      valid += sanitize_valid(c);
    }
  o.require(valid == total, std::to_string(valid) + "/" + std::to_string(total) + " candidates sanitize-valid");
  for (std::size_t i = 1; i < r.stats.size(); ++i)
    o.require(r.stats[i].best_fitness >= r.stats[i - 1].best_fitness, "best fitness non-decreasing at generation " +
                                                                          std::to_string(r.stats[i].generation));
  std::set<std::string> smiles;
  for (const auto& c : r.top) {
    smiles.insert(c.smiles);
    o.require(c.fitness.s_novelty > 0.0, c.smiles + " has novelty > 0");
  }
  o.require(!r.top.empty(), "non-empty top-K");
  o.require(smiles.size() == r.top.size(), "top-K unique by canonical SMILES");
  o.require(run_fingerprint(g.single) == run_fingerprint(g.multi), "threads 1 and 4 byte-identical");
  o.note("best " + num(r.stats.back().best_fitness, 4) + ", top " + std::to_string(r.top.size()) + ", " +
         num(g.seconds_single, 3) + " s (1 thread), " + num(g.seconds_multi, 3) + " s (4 threads)");
  return o;
}

Outcome ac9() {
  Outcome o;
  const auto& r = paper_shape_runs().single;
  std::vector<double> qed, sa;
  for (const auto& c : r.top) {
    qed.push_back(c.qed);
    sa.push_back(c.sa);
  }
  for (double q : qed) o.require(q >= 0.0 && q <= 1.0, "QED " + num(q) + " in [0, 1]");
  std::sort(qed.begin(), qed.end());
  const double median = qed.empty() ? 0.0 : qed.size() % 2 ? qed[qed.size() / 2]
                                                            : 0.5 * (qed[qed.size() / 2 - 1] + qed[qed.size() / 2]);
  if (median < 0.3 || median > 0.8) o.note("warning: median QED " + num(median, 4) + " outside [0.3, 0.8]");
  const auto [sa_lo, sa_hi] = std::minmax_element(sa.begin(), sa.end());
  if (!sa.empty() && (*sa_lo < 0.5 || *sa_hi > 3.5))
    o.note("warning: SA range [" + num(*sa_lo, 4) + ", " + num(*sa_hi, 4) + "] outside [0.5, 3.5]");
  double max_div = 0;
  for (const auto& s : r.stats) max_div = std::max(max_div, s.mean_pairwise_tanimoto);
  if (max_div >= 1.0) o.note("warning: mean pairwise Tanimoto reached 1.0");
  o.note("median QED " + num(median, 4) + ", SA [" + (sa.empty() ? "" : num(*sa_lo, 4) + ", " + num(*sa_hi, 4)) +
         "], max mean pairwise Tanimoto " + num(max_div, 4));
  return o;
}

int run_cli(const std::vector<std::string>& args) {
  std::string cmd = std::string("'") + LFORGE_CLI + "'";
  for (const auto& a : args) cmd += " '" + a + "'";
  cmd += " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome ac10() {
  Outcome o;
  const auto dir = fs::temp_directory_path() / "lforge_acceptance_pipeline";
  fs::remove_all(dir);
  const auto t0 = Clock::now();
  const auto config = fx::write_pipeline_fixture(dir);
  for (const char* stage : {"preprocess", "network", "targets", "pockets", "generate", "filter", "report"}) {
    const int rc = run_cli({stage, "--config", config.string(), "--no-cache"});
    o.require(rc == 0, std::string(stage) + " exit " + std::to_string(rc));
  }
  const double secs = seconds_since(t0);
  const auto out = dir / "out";
  for (const char* f : {"hvg_matrix.tsv", "qc_library_sizes.csv", "qc_sample_correlation.csv", "drop_report.json",
                        "beta_scan.csv", "modules.csv", "eigengenes.csv", "eigengene_corr.csv", "biomarkers.csv",
                        "targets_qc.csv", "flagged_targets.csv", "pockets_ranked.csv", "hotspots.json", "top_k.csv",
                        "candidates.smi", "candidates.sdf", "generation_stats.csv", "filter_report.csv", "survivors.smi",
                        "qed_hist.csv", "sa_hist.csv", "pocketfit_hist.csv", "convergence.csv", "diversity.csv",
                        "qed_hist.svg", "sa_hist.svg", "pocketfit_hist.svg", "convergence.svg", "diversity.svg",
                        "manifest.json"})
    o.require(fs::is_regular_file(out / f), std::string(f) + " written");
  o.require(secs < 600.0, "runtime " + num(secs, 3) + " s < 600 s");
  o.note("7 stages, " + num(secs, 3) + " s");
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"AC1 formula exactness", ac1},       {"AC2 soft-threshold scan", ac2},   {"AC3 module recovery", ac3},
      {"AC4 eigengene oracle", ac4},        {"AC5 chem kernel oracles", ac5},   {"AC6 descriptors and filters", ac6},
      {"AC7 rotation and gradient", ac7},   {"AC8 GA paper-shape run", ac8},    {"AC9 qualitative bands", ac9},
      {"AC10 end-to-end pipeline", ac10}};
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.notes.push_back(std::string("exception: ") + e.what());
    }
    failures += !o.pass;
    std::string detail;
    for (const auto& n : o.notes) detail += (detail.empty() ? "" : "; ") + n;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << (detail.empty() ? "" : " | " + detail) << std::endl;
  }
  std::cout << (failures ? std::to_string(failures) + " criteria failed" : "all criteria passed") << std::endl;
  return failures ? 1 : 0;
}
