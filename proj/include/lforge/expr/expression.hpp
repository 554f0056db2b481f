#pragma once

// Bulk expression preprocessing: loading, probe-to-gene aggregation, biotype
// filtering, low-expression filtering, highly-variable-gene selection and
// per-sample QC.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <numeric>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "lforge/core/error.hpp"
#include "lforge/core/matrix.hpp"
#include "lforge/core/numeric.hpp"
#include "lforge/core/parallel.hpp"
#include "lforge/core/table.hpp"

namespace lforge::expr {

enum class Level { exon, gene };
enum class Orientation { genes_as_rows, samples_as_rows };

// Gene-by-sample matrix of log2(RPKM+1) values with row and column labels.
struct ExpressionMatrix {
  Matrix values;
  std::vector<std::string> gene_ids;
  std::vector<std::string> sample_ids;
  Level level = Level::exon;

  std::size_t genes() const noexcept { return gene_ids.size(); }
  std::size_t samples() const noexcept { return sample_ids.size(); }

  // Throws ValidationError if the shape or value invariants are broken.
  void validate() const {
    if (values.rows() != gene_ids.size() || values.cols() != sample_ids.size())
      throw ValidationError("expression matrix shape does not match its labels");
    for (double v : values.data())
      if (!std::isfinite(v) || v < 0.0) throw ValidationError("expression values must be finite and non-negative");
    if (level == Level::gene) {
      std::unordered_set<std::string> seen;
      for (const auto& g : gene_ids)
        if (!seen.insert(g).second) throw ValidationError("duplicate gene id '" + g + "'");
    }
  }
};

using ProbeMap = std::unordered_map<std::string, std::string>;
using GeneAnnotation = std::unordered_map<std::string, std::string>;

// Genes removed by a filtering step, kept for the drop report.
struct DropReport {
  std::vector<std::string> dropped;
  std::string reason;
};

struct AggregationReport {
  std::size_t probes_used = 0;
  std::vector<std::string> unmapped_probes;
};

struct SampleQCReport {
  std::vector<double> library_sizes;
  Matrix sample_correlation;
  std::vector<std::string> zero_variance_samples;
};

inline ExpressionMatrix parse_expression_matrix(std::string_view text, Orientation orientation = Orientation::genes_as_rows,
                                                Level level = Level::exon) {
  auto rows = parse_table(text, '\t');
  if (rows.empty()) throw ParseError("empty expression matrix");
  const auto& header = rows.front();
  if (header.fields.size() < 2) throw ParseError("malformed header: expected an id column and at least one sample", header.line);

  std::vector<std::string> cols(header.fields.begin() + 1, header.fields.end());
  for (auto& c : cols) c = std::string(trim(c));
  std::vector<std::string> row_ids;
  std::vector<double> cells;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.fields.size() != header.fields.size())
      throw ParseError("expected " + std::to_string(header.fields.size()) + " fields, found " +
                           std::to_string(row.fields.size()),
                       row.line);
    row_ids.emplace_back(trim(row.fields[0]));
    for (std::size_t c = 1; c < row.fields.size(); ++c)
      cells.push_back(parse_double(row.fields[c], row.line, "row '" + row_ids.back() + "', column '" + cols[c - 1] + "'"));
  }

  Matrix m(row_ids.size(), cols.size());
  for (std::size_t r = 0; r < row_ids.size(); ++r)
    for (std::size_t c = 0; c < cols.size(); ++c) m(r, c) = cells[r * cols.size() + c];

  ExpressionMatrix out;
  out.level = level;
  if (orientation == Orientation::genes_as_rows) {
    out.values = std::move(m);
    out.gene_ids = std::move(row_ids);
    out.sample_ids = std::move(cols);
  } else {
    out.values = m.transposed();
    out.gene_ids = std::move(cols);
    out.sample_ids = std::move(row_ids);
  }
  std::unordered_set<std::string> seen;
  for (const auto& s : out.sample_ids)
    if (!seen.insert(s).second) throw ValidationError("duplicate sample id '" + s + "'");
  for (double v : out.values.data())
    if (v < 0.0) throw ValidationError("negative expression value");
  return out;
}

inline ExpressionMatrix load_expression_matrix(const std::filesystem::path& path,
                                               Orientation orientation = Orientation::genes_as_rows,
                                               Level level = Level::exon) {
  return parse_expression_matrix(read_file(path), orientation, level);
}

inline std::string to_tsv(const ExpressionMatrix& m) {
  std::string out = "gene_id";
  for (const auto& s : m.sample_ids) out += '\t' + s;
  out += '\n';
  for (std::size_t r = 0; r < m.genes(); ++r) {
    out += m.gene_ids[r];
    for (double v : m.values.row(r)) out += '\t' + format_double(v);
    out += '\n';
  }
  return out;
}

// Two-column TSV (key, value). An optional header row is recognized when its
// first field equals `header_key`.
inline std::unordered_map<std::string, std::string> load_two_column(const std::filesystem::path& path,
                                                                    std::string_view header_key) {
  std::unordered_map<std::string, std::string> out;
  for (const auto& row : read_table(path, '\t')) {
    if (row.fields.size() < 2) throw ParseError("expected two tab-separated columns", row.line);
    std::string key(trim(row.fields[0]));
    std::string value(trim(row.fields[1]));
    if (row.line == 1 && key == header_key) continue;
    if (value.empty()) throw ParseError("empty value for '" + key + "'", row.line);
    out[key] = value;
  }
  return out;
}

inline ProbeMap load_probe_map(const std::filesystem::path& path) { return load_two_column(path, "id"); }
inline GeneAnnotation load_annotation(const std::filesystem::path& path) { return load_two_column(path, "gene"); }

// Averages all probes of each gene. Genes appear in order of their first probe.
inline ExpressionMatrix aggregate_exons(const ExpressionMatrix& m, const ProbeMap& pm,
                                        AggregationReport* report = nullptr) {
  if (m.level != Level::exon) throw ValidationError("aggregate_exons expects an exon-level matrix");
  std::vector<std::string> genes;
  std::unordered_map<std::string, std::size_t> gene_index;
  std::vector<std::vector<std::size_t>> members;
  AggregationReport rep;
  for (std::size_t r = 0; r < m.genes(); ++r) {
    auto it = pm.find(m.gene_ids[r]);
    if (it == pm.end()) {
      rep.unmapped_probes.push_back(m.gene_ids[r]);
      continue;
    }
    auto [gi, inserted] = gene_index.try_emplace(it->second, genes.size());
    if (inserted) {
      genes.push_back(it->second);
      members.emplace_back();
    }
    members[gi->second].push_back(r);
    ++rep.probes_used;
  }
  if (genes.empty()) throw EmptyResultError("no probe maps to a gene");

  ExpressionMatrix out;
  out.level = Level::gene;
  out.sample_ids = m.sample_ids;
  out.gene_ids = genes;
  out.values = Matrix(genes.size(), m.samples());
  std::vector<double> col;
  for (std::size_t g = 0; g < genes.size(); ++g) {
    for (std::size_t s = 0; s < m.samples(); ++s) {
      col.clear();
      for (auto r : members[g]) col.push_back(m.values(r, s));
      out.values(g, s) = mean(col);
    }
  }
  if (report) *report = std::move(rep);
  return out;
}

inline ExpressionMatrix keep_rows(const ExpressionMatrix& m, const std::vector<std::size_t>& keep) {
  ExpressionMatrix out;
  out.level = m.level;
  out.sample_ids = m.sample_ids;
  out.values = m.values.select_rows(keep);
  for (auto k : keep) out.gene_ids.push_back(m.gene_ids[k]);
  return out;
}

inline ExpressionMatrix filter_protein_coding(const ExpressionMatrix& m, const GeneAnnotation& ann,
                                              DropReport* report = nullptr) {
  if (m.level != Level::gene) throw ValidationError("filter_protein_coding expects a gene-level matrix");
  std::vector<std::size_t> keep;
  DropReport rep{{}, "not protein-coding or missing from annotation"};
  for (std::size_t r = 0; r < m.genes(); ++r) {
    auto it = ann.find(m.gene_ids[r]);
    if (it != ann.end() && it->second == "protein-coding")
      keep.push_back(r);
    else
      rep.dropped.push_back(m.gene_ids[r]);
  }
  if (keep.empty()) throw EmptyResultError("no protein-coding genes remain");
  if (report) *report = std::move(rep);
  return keep_rows(m, keep);
}

// Keeps genes whose mean across samples is at least `threshold`.
inline ExpressionMatrix filter_low_expression(const ExpressionMatrix& m, double threshold = 0.5,
                                              DropReport* report = nullptr) {
  if (m.level != Level::gene) throw ValidationError("filter_low_expression expects a gene-level matrix");
  std::vector<std::size_t> keep;
  DropReport rep{{}, "mean expression below threshold"};
  for (std::size_t r = 0; r < m.genes(); ++r) {
    if (mean(m.values.row(r)) >= threshold)
      keep.push_back(r);
    else
      rep.dropped.push_back(m.gene_ids[r]);
  }
  if (keep.empty()) throw EmptyResultError("no genes pass the low-expression filter");
  if (report) *report = std::move(rep);
  return keep_rows(m, keep);
}

inline std::vector<double> gene_variances(const ExpressionMatrix& m, unsigned threads = 1) {
  std::vector<double> var(m.genes());
  parallel_for(m.genes(), threads, [&](std::size_t r) { var[r] = population_variance(m.values.row(r)); });
  return var;
}

// Top-n genes by population variance, descending; ties by gene id.
inline ExpressionMatrix select_hvg(const ExpressionMatrix& m, std::size_t n = 2000, unsigned threads = 1) {
  const auto var = gene_variances(m, threads);
  std::vector<std::size_t> order(m.genes());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (var[a] != var[b]) return var[a] > var[b];
    return m.gene_ids[a] < m.gene_ids[b];
  });
  order.resize(std::min(n, order.size()));
  return keep_rows(m, order);
}

inline SampleQCReport qc_stats(const ExpressionMatrix& m) {
  if (m.samples() < 2 || m.genes() < 2) throw ValidationError("qc_stats needs at least 2 genes and 2 samples");
  SampleQCReport rep;
  const std::size_t n = m.samples();
  std::vector<std::optional<std::vector<double>>> unit(n);
  for (std::size_t s = 0; s < n; ++s) {
    auto col = m.values.column(s);
    rep.library_sizes.push_back(pairwise_sum(col));
    unit[s] = unit_centered(col);
    if (!unit[s]) rep.zero_variance_samples.push_back(m.sample_ids[s]);
  }
  rep.sample_correlation = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    rep.sample_correlation(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      double r = 0.0;
      if (unit[i] && unit[j]) r = std::clamp(dot(*unit[i], *unit[j]), -1.0, 1.0);
      rep.sample_correlation(i, j) = rep.sample_correlation(j, i) = r;
    }
  }
  return rep;
}

}  // namespace lforge::expr
