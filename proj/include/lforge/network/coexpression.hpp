#pragma once

// Weighted gene co-expression network: correlation, soft-threshold adjacency,
// scale-free fit scan, module detection, eigengenes and hub ranking.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "lforge/core/error.hpp"
#include "lforge/core/matrix.hpp"
#include "lforge/core/numeric.hpp"
#include "lforge/core/parallel.hpp"
#include "lforge/expr/expression.hpp"

namespace lforge::network {

struct GeneCorrMatrix {
  Matrix r;
  std::vector<std::string> gene_ids;
  std::vector<std::string> zero_variance_genes;
};

struct AdjacencyMatrix {
  Matrix a;
  std::vector<std::string> gene_ids;
  int beta = 1;
};

struct BetaRecord {
  int beta = 0;
  double r_squared = 0.0;  // signed: negated when the fitted slope is positive
  double slope = 0.0;
  double mean_connectivity = 0.0;
  bool degenerate = false;
};

struct BetaScan {
  std::vector<BetaRecord> records;
  int recommended_beta = 0;
  bool threshold_met = false;  // some beta exceeded the R^2 criterion
};

// modules[m] holds gene indices; labels[g] is 1-based module number, 0 = unassigned.
struct ModuleSet {
  std::vector<std::vector<std::size_t>> modules;
  std::vector<int> labels;
  std::vector<std::size_t> unassigned;
  std::vector<std::string> gene_ids;
};

struct Eigengene {
  std::vector<double> values;    // per-sample PC1 scores
  std::vector<double> loadings;  // unit-norm gene loadings
  double explained_variance_fraction = 0.0;
  int iterations = 0;
};

struct BiomarkerEntry {
  std::string gene_id;
  int module = 0;
  double k_within = 0.0;
  std::size_t rank = 0;  // 1-based
};

using BiomarkerRanking = std::vector<BiomarkerEntry>;

inline constexpr double kScaleFreeR2 = 0.85;

// Pearson correlation between every pair of gene rows. Zero-variance genes get
// r = 0 off the diagonal and are listed in zero_variance_genes.
inline GeneCorrMatrix correlation_matrix(const expr::ExpressionMatrix& m, unsigned threads = 1) {
  if (m.samples() < 3) throw ValidationError("correlation_matrix needs at least 3 samples");
  const std::size_t n = m.genes();
  std::vector<std::optional<std::vector<double>>> unit(n);
  parallel_for(n, threads, [&](std::size_t g) { unit[g] = unit_centered(m.values.row(g)); });
  GeneCorrMatrix out;
  out.gene_ids = m.gene_ids;
  out.r = Matrix(n, n);
  for (std::size_t g = 0; g < n; ++g)
    if (!unit[g]) out.zero_variance_genes.push_back(m.gene_ids[g]);
  parallel_for(n, threads, [&](std::size_t i) {
    out.r(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      double v = 0.0;
      if (unit[i] && unit[j]) v = std::clamp(dot(*unit[i], *unit[j]), -1.0, 1.0);
      out.r(i, j) = v;
    }
  });
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) out.r(i, j) = out.r(j, i);
  return out;
}

// a_ij = |r_ij|^beta with the diagonal set to zero.
inline AdjacencyMatrix adjacency(const GeneCorrMatrix& c, int beta) {
  if (beta < 1) throw ValidationError("soft-threshold power must be >= 1");
  const std::size_t n = c.r.rows();
  AdjacencyMatrix out{Matrix(n, n), c.gene_ids, beta};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      out.a(i, j) = i == j ? 0.0 : std::pow(std::abs(c.r(i, j)), beta);
  return out;
}

inline std::vector<double> connectivity(const Matrix& a) {
  std::vector<double> k(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) k[i] = pairwise_sum(a.row(i));
  return k;
}

struct ScaleFreeFit {
  double r_squared = 0.0;  // signed
  double slope = 0.0;
  bool degenerate = false;
};

// Least-squares fit of log10 p(k) against log10 k over a histogram with
// `bins` log-spaced connectivity bins. Empty bins are skipped.
inline ScaleFreeFit scale_free_fit(const std::vector<double>& k, int bins = 10) {
  ScaleFreeFit fit;
  std::vector<double> pos;
  for (double v : k)
    if (v > 0.0) pos.push_back(v);
  if (pos.size() < 2) {
    fit.degenerate = true;
    return fit;
  }
  const auto [lo_it, hi_it] = std::minmax_element(pos.begin(), pos.end());
  const double lo = std::log10(*lo_it), hi = std::log10(*hi_it);
  if (!(hi - lo > 1e-12)) {
    fit.degenerate = true;
    return fit;
  }
  const double width = (hi - lo) / bins;
  std::vector<double> count(bins, 0.0), ksum(bins, 0.0);
  for (double v : pos) {
    int b = static_cast<int>((std::log10(v) - lo) / width);
    b = std::clamp(b, 0, bins - 1);
    count[b] += 1.0;
    ksum[b] += v;
  }
  std::vector<double> xs, ys;
  for (int b = 0; b < bins; ++b) {
    if (count[b] == 0.0) continue;
    xs.push_back(std::log10(ksum[b] / count[b]));
    ys.push_back(std::log10(count[b] / static_cast<double>(k.size())));
  }
  if (xs.size() < 3) {
    fit.degenerate = true;
    return fit;
  }
  const double mx = mean(xs), my = mean(ys);
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) {
    fit.degenerate = true;
    return fit;
  }
  fit.slope = sxy / sxx;
  const double r2 = (sxy * sxy) / (sxx * syy);
  fit.r_squared = fit.slope > 0.0 ? -r2 : r2;
  return fit;
}

// Recommends the smallest beta whose signed R^2 exceeds 0.85; otherwise the
// beta with the largest signed R^2 (threshold_met = false).
inline BetaScan soft_threshold_scan(const GeneCorrMatrix& c, const std::vector<int>& betas) {
  if (betas.empty()) throw ValidationError("soft_threshold_scan needs at least one beta");
  BetaScan scan;
  for (int beta : betas) {
    const auto adj = adjacency(c, beta);
    const auto k = connectivity(adj.a);
    const auto fit = scale_free_fit(k);
    scan.records.push_back({beta, fit.r_squared, fit.slope, mean(k), fit.degenerate});
  }
  for (const auto& rec : scan.records) {
    if (!rec.degenerate && rec.r_squared > kScaleFreeR2 && (!scan.threshold_met || rec.beta < scan.recommended_beta)) {
      scan.recommended_beta = rec.beta;
      scan.threshold_met = true;
    }
  }
  if (!scan.threshold_met) {
    const BetaRecord* best = &scan.records.front();
    for (const auto& rec : scan.records)
      if (rec.r_squared > best->r_squared) best = &rec;
    scan.recommended_beta = best->beta;
  }
  return scan;
}

// Average-linkage agglomerative clustering on d = 1 - a via the
// nearest-neighbour-chain algorithm; clusters are the components joined at
// heights <= cut. Clusters smaller than min_size become unassigned. Modules
// are numbered by size (descending), ties by smallest member index.
inline ModuleSet detect_modules(const AdjacencyMatrix& adj, std::size_t min_size = 5, double cut = 0.75) {
  if (min_size < 2) throw ValidationError("min_size must be >= 2");
  const std::size_t n = adj.a.rows();
  ModuleSet out;
  out.gene_ids = adj.gene_ids;
  out.labels.assign(n, 0);
  if (n == 0) return out;

  // Condensed working copy of the dissimilarity matrix.
  std::vector<double> d(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) d[i * n + j] = i == j ? 0.0 : 1.0 - adj.a(i, j);
  std::vector<std::size_t> size(n, 1);
  std::vector<bool> active(n, true);
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };

  std::vector<std::size_t> chain;
  std::size_t remaining = n;
  while (remaining > 1) {
    if (chain.empty()) {
      for (std::size_t i = 0; i < n; ++i)
        if (active[i]) {
          chain.push_back(i);
          break;
        }
    }
    const std::size_t top = chain.back();
    const std::size_t prev = chain.size() > 1 ? chain[chain.size() - 2] : n;
    std::size_t best = n;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (!active[j] || j == top) continue;
      if (d[top * n + j] < best_d) {
        best = j;
        best_d = d[top * n + j];
      }
    }
    // Prefer the previous chain element on ties so reciprocal pairs terminate.
    if (prev != n && d[top * n + prev] == best_d) best = prev;
    if (best == prev) {
      chain.pop_back();
      chain.pop_back();
      // Merge `best` into `top`, Lance-Williams update for average linkage.
      const std::size_t keep = std::min(top, best), drop = std::max(top, best);
      const double sk = static_cast<double>(size[keep]), sd = static_cast<double>(size[drop]);
      for (std::size_t j = 0; j < n; ++j) {
        if (!active[j] || j == keep || j == drop) continue;
        const double v = (sk * d[keep * n + j] + sd * d[drop * n + j]) / (sk + sd);
        d[keep * n + j] = d[j * n + keep] = v;
      }
      size[keep] += size[drop];
      active[drop] = false;
      --remaining;
      if (best_d <= cut) parent[find(drop)] = find(keep);
    } else {
      chain.push_back(best);
    }
  }

  std::unordered_map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < n; ++i) groups[find(i)].push_back(i);
  std::vector<std::vector<std::size_t>> modules;
  for (auto& [root, members] : groups) {
    if (members.size() >= min_size)
      modules.push_back(std::move(members));
  }
  std::sort(modules.begin(), modules.end(), [](const auto& x, const auto& y) {
    if (x.size() != y.size()) return x.size() > y.size();
    return x.front() < y.front();
  });
  for (std::size_t m = 0; m < modules.size(); ++m)
    for (auto g : modules[m]) out.labels[g] = static_cast<int>(m + 1);
  for (std::size_t g = 0; g < n; ++g)
    if (out.labels[g] == 0) out.unassigned.push_back(g);
  out.modules = std::move(modules);
  return out;
}

// Rows of `m` z-scored with the population standard deviation. Constant rows become zeros.
inline Matrix standardized_rows(const expr::ExpressionMatrix& m, const std::vector<std::size_t>& rows) {
  Matrix z(rows.size(), m.samples());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto src = m.values.row(rows[i]);
    const double mu = mean(src);
    const double sd = std::sqrt(population_variance(src));
    for (std::size_t s = 0; s < m.samples(); ++s) z(i, s) = sd > 0.0 ? (src[s] - mu) / sd : 0.0;
  }
  return z;
}

inline constexpr double kPowerTolerance = 1e-10;
inline constexpr int kPowerMaxIterations = 10000;

// First principal component of the gene-standardized module submatrix, by
// power iteration on the gene-gene scatter matrix. The sign makes the
// eigengene correlate non-negatively with the module's mean standardized
// profile; when that correlation is zero the first non-zero loading is made
// positive.
inline Eigengene module_eigengene(const expr::ExpressionMatrix& m, const std::vector<std::size_t>& module) {
  if (module.size() < 2) throw ValidationError("module eigengene needs at least 2 genes");
  const Matrix z = standardized_rows(m, module);
  const std::size_t g = z.rows(), s = z.cols();

  Matrix scatter(g, g);
  for (std::size_t i = 0; i < g; ++i)
    for (std::size_t j = i; j < g; ++j) scatter(i, j) = scatter(j, i) = dot(z.row(i), z.row(j));
  double trace = 0.0;
  for (std::size_t i = 0; i < g; ++i) trace += scatter(i, i);

  Eigengene eg;
  std::vector<double> v(g), next(g);
  for (std::size_t i = 0; i < g; ++i) v[i] = 1.0 + 0.1 * static_cast<double>(i);
  double norm = std::sqrt(dot(v, v));
  for (double& x : v) x /= norm;
  double lambda = 0.0;
  for (eg.iterations = 1; eg.iterations <= kPowerMaxIterations; ++eg.iterations) {
    for (std::size_t i = 0; i < g; ++i) next[i] = dot(scatter.row(i), v);
    norm = std::sqrt(dot(next, next));
    if (norm == 0.0) break;
    for (double& x : next) x /= norm;
    double diff = 0.0;
    for (std::size_t i = 0; i < g; ++i) diff = std::max(diff, std::abs(next[i] - v[i]));
    v.swap(next);
    lambda = norm;
    if (diff < kPowerTolerance) break;
  }

  std::vector<double> scores(s), profile(s);
  for (std::size_t c = 0; c < s; ++c) {
    double sc = 0.0, pr = 0.0;
    for (std::size_t i = 0; i < g; ++i) {
      sc += v[i] * z(i, c);
      pr += z(i, c);
    }
    scores[c] = sc;
    profile[c] = pr / static_cast<double>(g);
  }
  const double agreement = dot(scores, profile);
  bool flip = agreement < -1e-12;
  if (std::abs(agreement) <= 1e-12) {
    for (double x : v)
      if (std::abs(x) > 1e-12) {
        flip = x < 0.0;
        break;
      }
  }
  if (flip) {
    for (double& x : v) x = -x;
    for (double& x : scores) x = -x;
  }
  eg.values = std::move(scores);
  eg.loadings = std::move(v);
  eg.explained_variance_fraction = trace > 0.0 ? lambda / trace : 0.0;
  return eg;
}

// k_within(g) = sum of adjacency to the other members of g's module; 0 for unassigned genes.
inline BiomarkerRanking intramodular_connectivity(const AdjacencyMatrix& adj, const ModuleSet& mods) {
  const std::size_t n = adj.a.rows();
  if (mods.labels.size() != n) throw ValidationError("module labels do not match adjacency size");
  BiomarkerRanking out;
  out.reserve(n);
  for (std::size_t g = 0; g < n; ++g) {
    double k = 0.0;
    const int label = mods.labels[g];
    if (label > 0) {
      std::vector<double> terms;
      for (auto h : mods.modules[static_cast<std::size_t>(label - 1)])
        if (h != g) terms.push_back(adj.a(g, h));
      k = pairwise_sum(terms);
    }
    out.push_back({adj.gene_ids[g], label, k, 0});
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    if (x.k_within != y.k_within) return x.k_within > y.k_within;
    return x.gene_id < y.gene_id;
  });
  for (std::size_t i = 0; i < out.size(); ++i) out[i].rank = i + 1;
  return out;
}

inline bool matches_exclusion(const std::string& gene, const std::vector<std::string>& prefixes) {
  for (const auto& p : prefixes)
    if (!p.empty() && gene.compare(0, p.size(), p) == 0) return true;
  return false;
}

struct RankingResult {
  BiomarkerRanking ranking;
  std::vector<std::string> excluded;
  bool short_list = false;  // fewer than k genes survived the exclusions
};

// Drops genes whose symbol starts with any exclusion prefix (default "HB",
// hemoglobin genes) and keeps the top k by (-k_within, gene_id).
inline RankingResult rank_biomarkers(const BiomarkerRanking& raw, const std::vector<std::string>& exclusions = {"HB"},
                                     std::size_t k = 20) {
  if (k < 1) throw ValidationError("k must be >= 1");
  RankingResult res;
  for (const auto& e : raw) {
    if (matches_exclusion(e.gene_id, exclusions))
      res.excluded.push_back(e.gene_id);
    else
      res.ranking.push_back(e);
  }
  std::stable_sort(res.ranking.begin(), res.ranking.end(), [](const auto& x, const auto& y) {
    if (x.k_within != y.k_within) return x.k_within > y.k_within;
    return x.gene_id < y.gene_id;
  });
  res.short_list = res.ranking.size() < k;
  if (res.ranking.size() > k) res.ranking.resize(k);
  for (std::size_t i = 0; i < res.ranking.size(); ++i) res.ranking[i].rank = i + 1;
  return res;
}

inline Matrix eigengene_correlation(const std::vector<Eigengene>& eigs) {
  if (eigs.size() < 2) throw ValidationError("need at least 2 eigengenes");
  for (const auto& e : eigs)
    if (e.values.size() != eigs.front().values.size()) throw ValidationError("eigengene length mismatch");
  Matrix out(eigs.size(), eigs.size());
  for (std::size_t i = 0; i < eigs.size(); ++i) {
    out(i, i) = 1.0;
    for (std::size_t j = i + 1; j < eigs.size(); ++j) out(i, j) = out(j, i) = pearson(eigs[i].values, eigs[j].values).value_or(0.0);
  }
  return out;
}

}  // namespace lforge::network
