#pragma once

// Synthetic cohorts with known structure: a scale-free connectivity cohort,
// planted co-expression blocks and a full on-disk pipeline fixture.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "lforge/core/random.hpp"
#include "lforge/core/table.hpp"
#include "lforge/expr/expression.hpp"
#include "lforge/structure/pdb.hpp"

namespace lforge::testing {

inline std::string gene_name(const std::string& prefix, std::size_t i, int width = 3) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%0*zu", prefix.c_str(), width, i);
  return buf;
}

// Gene i loads a_i on one shared factor with exactly orthogonal residuals, so
// the sample correlation is r_ij = a_i * a_j and k_i is proportional to a_i^beta.
// Loadings follow stratified Pareto quantiles, which plants a power-law
// connectivity distribution. Requires samples >= genes + 2.
inline expr::ExpressionMatrix scale_free_cohort(std::size_t genes = 500, std::size_t samples = 600, std::uint64_t seed = 7,
                                                double alpha = 4.0, double a_min = 0.2) {
  Rng rng(seed);
  Eigen::MatrixXd z(samples, genes + 1);
  for (Eigen::Index c = 0; c < z.cols(); ++c)
    for (Eigen::Index r = 0; r < z.rows(); ++r) z(r, c) = normal(rng);
  z.rowwise() -= z.colwise().mean();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(z);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(samples, genes + 1);

  expr::ExpressionMatrix m;
  m.level = expr::Level::gene;
  m.values = Matrix(genes, samples);
  for (std::size_t s = 0; s < samples; ++s) m.sample_ids.push_back(gene_name("S", s + 1));
  const double scale = std::sqrt(static_cast<double>(samples));
  for (std::size_t g = 0; g < genes; ++g) {
    const double u = (static_cast<double>(g) + 0.5) / static_cast<double>(genes);
    const double a = std::min(0.98, a_min * std::pow(1.0 - u, -1.0 / alpha));
    m.gene_ids.push_back(gene_name("SF", g + 1));
    for (std::size_t s = 0; s < samples; ++s)
      m.values(g, s) = 20.0 + scale * (a * q(s, 0) + std::sqrt(1.0 - a * a) * q(s, g + 1));
  }
  return m;
}

struct PlantedCohort {
  expr::ExpressionMatrix matrix;
  std::vector<int> truth;          // 1-based block, 0 = background
  std::vector<std::size_t> hubs;   // one gene index per block
};

// Blocks of co-expressed genes driven by one factor each, followed by
// independent background genes. The first gene of each block is its hub.
inline PlantedCohort planted_blocks(std::size_t genes = 300, std::size_t samples = 50, std::size_t blocks = 3,
                                    std::uint64_t seed = 11, std::size_t background = 30) {
  Rng rng(seed);
  PlantedCohort out;
  auto& m = out.matrix;
  m.level = expr::Level::gene;
  m.values = Matrix(genes, samples);
  for (std::size_t s = 0; s < samples; ++s) m.sample_ids.push_back(gene_name("S", s + 1));
  const std::size_t per_block = (genes - background) / blocks;
  std::vector<std::vector<double>> factors(blocks, std::vector<double>(samples));
  for (auto& f : factors)
    for (auto& v : f) v = normal(rng);
  for (std::size_t g = 0; g < genes; ++g) {
    const std::size_t b = g / per_block;
    const bool in_block = b < blocks;
    const bool hub = in_block && g % per_block == 0;
    if (hub) out.hubs.push_back(g);
    out.truth.push_back(in_block ? static_cast<int>(b) + 1 : 0);
    const double a = !in_block ? 0.0 : hub ? 0.995 : 0.93 + 0.05 * uniform01(rng);
    m.gene_ids.push_back(gene_name("G", g + 1));
    for (std::size_t s = 0; s < samples; ++s) {
      const double shared = in_block ? a * factors[b][s] : 0.0;
      m.values(g, s) = 8.0 + shared + std::sqrt(1.0 - a * a) * normal(rng);
    }
  }
  return out;
}

// Adjusted Rand index between two labelings.
inline double adjusted_rand_index(const std::vector<int>& x, const std::vector<int>& y) {
  std::map<std::pair<int, int>, double> nij;
  std::map<int, double> ai, bj;
  for (std::size_t i = 0; i < x.size(); ++i) {
    nij[{x[i], y[i]}] += 1;
    ai[x[i]] += 1;
    bj[y[i]] += 1;
  }
  auto c2 = [](double n) { return n * (n - 1) / 2; };
  double index = 0, sa = 0, sb = 0;
  for (const auto& [k, v] : nij) index += c2(v);
  for (const auto& [k, v] : ai) sa += c2(v);
  for (const auto& [k, v] : bj) sb += c2(v);
  const double expected = sa * sb / c2(static_cast<double>(x.size()));
  const double max_index = (sa + sb) / 2;
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

struct FixtureOptions {
  std::size_t genes = 200;
  std::size_t samples = 30;
  std::uint64_t seed = 5;
  int population = 16;
  int generations = 4;
};

inline std::string pocket_json(Rng& rng, const std::string& prefix, int pockets) {
  nlohmann::json arr = nlohmann::json::array();
  for (int p = 0; p < pockets; ++p) {
    nlohmann::json atoms = nlohmann::json::array();
    const double cx = 10.0 * p, cy = -4.0 + p, cz = 2.0 * p;
    for (int a = 0; a < 40; ++a) atoms.push_back({cx + normal(rng, 0, 3), cy + normal(rng, 0, 3), cz + normal(rng, 0, 3)});
    arr.push_back({{"id", prefix + std::to_string(p + 1)},
                   {"volume", 300.0 + 90.0 * p},
                   {"depth", 8.0 + p},
                   {"enclosure", 0.4 + 0.08 * p},
                   {"hydrophobicity", 0.3 + 0.05 * p},
                   {"aromaticity", 1.0 + p},
                   {"donors", 2 + p % 3},
                   {"acceptors", 3 + p % 2},
                   {"atoms", atoms}});
  }
  return nlohmann::json{{"pockets", arr}}.dump(2) + "\n";
}

inline std::string fixture_pdb(const std::string& accession, double plddt, Rng& rng) {
  structure::ModelStructure s;
  s.accession = accession;
  for (int i = 0; i < 12; ++i) {
    structure::PdbAtom a;
    a.serial = i + 1;
    a.name = i % 3 == 0 ? "N" : i % 3 == 1 ? "CA" : "C";
    a.res_name = "ALA";
    a.chain = 'A';
    a.res_seq = i / 3 + 1;
    a.position = {1.5 * i, normal(rng), normal(rng)};
    a.plddt = plddt;
    a.element = a.name.substr(0, 1);
    s.atoms.push_back(a);
  }
  return structure::write_pdb(s);
}

// Writes a complete offline pipeline fixture into `dir` and returns the
// config path. Genes form three co-expression blocks (one containing
// hemoglobin symbols), plus background, non-coding and low-expression genes;
// most genes are measured by two exon probes.
inline std::filesystem::path write_pipeline_fixture(const std::filesystem::path& dir, const FixtureOptions& opt = {}) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  Rng rng(opt.seed);
  const std::size_t n = opt.genes, s_count = opt.samples;
  std::vector<std::string> genes;
  std::vector<std::string> biotype;
  for (std::size_t g = 0; g < n; ++g) {
    std::string name = gene_name("GENE", g + 1);
    if (g == 1) name = "HBB";
    if (g == 2) name = "HBA1";
    genes.push_back(name);
    biotype.push_back(g % 25 == 24 ? "lncRNA" : "protein-coding");
  }
  std::vector<std::vector<double>> factors(3, std::vector<double>(s_count));
  for (auto& f : factors)
    for (auto& v : f) v = normal(rng);

  std::string expr = "probe_id";
  for (std::size_t s = 0; s < s_count; ++s) expr += "\t" + gene_name("S", s + 1, 2);
  expr += "\n";
  std::string probes = "id\tgene\n", ann = "gene\tbiotype\n", acc = "gene\taccession\n";
  std::size_t probe_no = 0;
  for (std::size_t g = 0; g < n; ++g) {
    const int block = g < 150 ? static_cast<int>(g / 50) : -1;
    const bool low = g >= 190;
    const double a = block < 0 ? 0.0 : g % 50 == 0 ? 0.99 : 0.9 + 0.07 * uniform01(rng);
    std::vector<double> base(s_count);
    for (std::size_t s = 0; s < s_count; ++s) {
      const double shared = block >= 0 ? a * factors[static_cast<std::size_t>(block)][s] : 0.0;
      base[s] = shared + std::sqrt(1.0 - a * a) * normal(rng);
    }
    const int n_probes = g % 3 == 0 ? 1 : 2;
    for (int p = 0; p < n_probes; ++p) {
      const std::string id = gene_name("PRB", ++probe_no, 4);
      expr += id;
      for (std::size_t s = 0; s < s_count; ++s) {
        const double v = low ? 0.1 + 0.05 * std::abs(base[s]) : std::max(0.0, 6.0 + 1.2 * base[s] + 0.05 * normal(rng));
        expr += "\t" + format_fixed(v, 4);
      }
      expr += "\n";
      probes += id + "\t" + genes[g] + "\n";
    }
    ann += genes[g] + "\t" + biotype[g] + "\n";
    acc += genes[g] + "\t" + gene_name("FX", g + 1, 4) + "\n";
  }
  write_file(dir / "expression.tsv", expr);
  write_file(dir / "probe_map.tsv", probes);
  write_file(dir / "annotation.tsv", ann);
  write_file(dir / "accession_map.tsv", acc);

  // Every accession is cached; the third gene's model has low confidence.
  for (std::size_t g = 0; g < n; ++g) {
    const std::string a = gene_name("FX", g + 1, 4);
    write_file(dir / "structure_cache" / a, fixture_pdb(a, g == 3 ? 65.0 : 88.0, rng));
  }
  write_file(dir / "pockets" / "FX0001.json", pocket_json(rng, "P", 6));
  write_file(dir / "pockets" / "FX0051.json", pocket_json(rng, "Q", 2));
  write_file(dir / "reference.smi", "c1ccccc1C(=O)N reference_1\nCC(=O)Nc1ccc(O)cc1 reference_2\n");

  const nlohmann::json cfg = {{"output_dir", "out"},
                              {"seed", 42},
                              {"expression", "expression.tsv"},
                              {"probe_map", "probe_map.tsv"},
                              {"annotation", "annotation.tsv"},
                              {"hvg_count", 150},
                              {"beta", 6},
                              {"accession_map", "accession_map.tsv"},
                              {"cache_dir", "structure_cache"},
                              {"offline", true},
                              {"pocket_files", {"pockets/FX0001.json", "pockets/FX0051.json"}},
                              {"reference_smiles", "reference.smi"},
                              {"population", opt.population},
                              {"generations", opt.generations},
                              {"threads", 1}};
  write_file(dir / "config.json", cfg.dump(2) + "\n");
  return dir / "config.json";
}

}  // namespace lforge::testing
