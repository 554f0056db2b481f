#pragma once

// The seven pipeline stages. Each stage checks its inputs, computes all
// outputs in memory and writes them only once everything succeeded.

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "lforge/chem/canonical.hpp"
#include "lforge/chem/descriptors.hpp"
#include "lforge/chem/library.hpp"
#include "lforge/chem/reactions.hpp"
#include "lforge/core/error.hpp"
#include "lforge/core/table.hpp"
#include "lforge/evolve/ga.hpp"
#include "lforge/expr/expression.hpp"
#include "lforge/geom/conformer.hpp"
#include "lforge/network/coexpression.hpp"
#include "lforge/pipeline/config.hpp"
#include "lforge/pipeline/manifest.hpp"
#include "lforge/pipeline/svg.hpp"
#include "lforge/structure/fetch.hpp"
#include "lforge/structure/pockets.hpp"

namespace lforge::pipeline {

namespace fs = std::filesystem;

enum ExitCode { kExitOk = 0, kExitInput = 2, kExitGeneration = 3, kExitInternal = 4 };

// Header-indexed CSV as written by the stages themselves.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<TableRow> rows;

  static CsvTable parse(std::string_view text) {
    CsvTable t;
    auto rows = parse_table(text, ',', true);
    if (rows.empty()) return t;
    t.header = rows.front().fields;
    t.rows.assign(rows.begin() + 1, rows.end());
    for (const auto& r : t.rows)
      if (r.fields.size() != t.header.size()) throw ParseError("wrong number of CSV fields", r.line);
    return t;
  }
  static CsvTable load(const fs::path& p) { return parse(read_file(p)); }

  std::size_t col(const std::string& name) const {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ParseError("missing CSV column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  }
  std::vector<double> numbers(const std::string& name) const {
    const auto c = col(name);
    std::vector<double> out;
    for (const auto& r : rows) out.push_back(parse_double(r.fields[c], r.line, name));
    return out;
  }
};

// Per-stage working state: declared inputs, pending outputs, manifest record.
class Stage {
 public:
  Stage(const PipelineConfig& cfg, StageRecord& rec) : cfg_(cfg), rec_(rec) {}

  const PipelineConfig& cfg() const { return cfg_; }
  StageRecord& record() { return rec_; }

  // Requires an existing input file and records its digest.
  fs::path input(const fs::path& p, const std::string& what) {
    if (p.empty()) throw ValidationError("missing input: " + what + " is not configured");
    if (!fs::is_regular_file(p)) throw ValidationError("missing input " + what + ": " + p.string());
    rec_.add_input(p);
    return p;
  }
  // Optional input: recorded when present, empty path otherwise.
  fs::path optional_input(const fs::path& p, const std::string& what) {
    if (p.empty()) return {};
    return input(p, what);
  }

  void emit(const std::string& name, std::string content) { pending_.emplace_back(cfg_.output_dir() / name, std::move(content)); }
  void warn(const std::string& w) { rec_.warnings.push_back(w); }

  void commit() {
    for (const auto& [p, content] : pending_) {
      write_file(p, content);
      rec_.outputs.emplace_back(p.string(), sha256_hex(content));
    }
    pending_.clear();
  }

 private:
  const PipelineConfig& cfg_;
  StageRecord& rec_;
  std::vector<std::pair<fs::path, std::string>> pending_;
};

namespace detail {

inline unsigned threads_of(const PipelineConfig& cfg) {
  return static_cast<unsigned>(std::max<std::int64_t>(0, cfg.integer("threads")));
}

inline std::string matrix_csv(const Matrix& m, const std::vector<std::string>& labels, const std::string& corner) {
  std::vector<std::string> head{corner};
  for (const auto& l : labels) head.push_back(csv_field(l));
  std::string out = join_row(head, ',');
  for (std::size_t r = 0; r < m.rows(); ++r) {
    std::vector<std::string> row{csv_field(labels[r])};
    for (double v : m.row(r)) row.push_back(format_double(v));
    out += join_row(row, ',');
  }
  return out;
}

inline std::string drop_json(const std::vector<std::pair<std::string, expr::DropReport>>& steps,
                             const expr::AggregationReport* agg, std::size_t kept) {
  nlohmann::json j = nlohmann::json::object();
  if (agg) j["aggregation"] = {{"probes_used", agg->probes_used}, {"unmapped_probes", agg->unmapped_probes}};
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& [name, rep] : steps)
    arr.push_back({{"step", name}, {"reason", rep.reason}, {"count", rep.dropped.size()}, {"genes", rep.dropped}});
  j["filters"] = arr;
  j["hvg_selected"] = kept;
  return j.dump(2) + "\n";
}

// Fixed-edge histogram; values outside the range fall into the end bins.
struct Histogram {
  std::vector<double> edges;
  std::vector<int> counts;
};

inline Histogram histogram(const std::vector<double>& xs, double lo, double hi, int bins) {
  if (bins < 1) throw ValidationError("histogram_bins must be >= 1");
  Histogram h;
  for (int i = 0; i <= bins; ++i) h.edges.push_back(lo + (hi - lo) * i / bins);
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  for (double x : xs) {
    int b = static_cast<int>(std::floor((x - lo) / (hi - lo) * bins));
    h.counts[static_cast<std::size_t>(std::clamp(b, 0, bins - 1))]++;
  }
  return h;
}

inline std::string histogram_csv(const Histogram& h) {
  std::string out = "bin_lo,bin_hi,count\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i)
    out += join_row({format_fixed(h.edges[i], 4), format_fixed(h.edges[i + 1], 4), std::to_string(h.counts[i])}, ',');
  return out;
}

}  // namespace detail

inline void cmd_preprocess(Stage& st) {
  const auto& cfg = st.cfg();
  const auto orient_s = cfg.str("expression_orientation");
  const auto level_s = cfg.str("expression_level");
  if (orient_s != "genes_as_rows" && orient_s != "samples_as_rows")
    throw ValidationError("expression_orientation must be genes_as_rows or samples_as_rows");
  if (level_s != "exon" && level_s != "gene") throw ValidationError("expression_level must be exon or gene");
  const auto orient = orient_s == "genes_as_rows" ? expr::Orientation::genes_as_rows : expr::Orientation::samples_as_rows;
  const auto level = level_s == "exon" ? expr::Level::exon : expr::Level::gene;

  const auto expr_path = st.input(cfg.path("expression"), "expression");
  const auto probe_path = level == expr::Level::exon ? st.input(cfg.path("probe_map"), "probe_map") : fs::path{};
  const auto ann_path = st.input(cfg.path("annotation"), "annotation");

  auto m = expr::load_expression_matrix(expr_path, orient, level);
  m.validate();
  expr::AggregationReport agg;
  if (level == expr::Level::exon) {
    m = expr::aggregate_exons(m, expr::load_probe_map(probe_path), &agg);
    if (!agg.unmapped_probes.empty()) st.warn(std::to_string(agg.unmapped_probes.size()) + " probes have no gene mapping");
  }
  std::vector<std::pair<std::string, expr::DropReport>> steps(2);
  steps[0].first = "protein_coding";
  m = expr::filter_protein_coding(m, expr::load_annotation(ann_path), &steps[0].second);
  steps[1].first = "low_expression";
  m = expr::filter_low_expression(m, cfg.num("low_expression_threshold"), &steps[1].second);
  const auto hvg_n = cfg.integer("hvg_count");
  if (hvg_n < 1) throw ValidationError("hvg_count must be >= 1");
  if (static_cast<std::size_t>(hvg_n) > m.genes())
    st.warn("only " + std::to_string(m.genes()) + " genes available for " + std::to_string(hvg_n) + " HVGs");
  m = expr::select_hvg(m, static_cast<std::size_t>(hvg_n), detail::threads_of(cfg));
  const auto qc = expr::qc_stats(m);
  for (const auto& s : qc.zero_variance_samples) st.warn("sample " + s + " has zero variance");

  std::string lib = "sample_id,library_size\n";
  for (std::size_t s = 0; s < m.samples(); ++s) lib += join_row({csv_field(m.sample_ids[s]), format_double(qc.library_sizes[s])}, ',');

  st.record().details["genes"] = m.genes();
  st.record().details["samples"] = m.samples();
  st.emit("hvg_matrix.tsv", expr::to_tsv(m));
  st.emit("qc_library_sizes.csv", lib);
  st.emit("qc_sample_correlation.csv", detail::matrix_csv(qc.sample_correlation, m.sample_ids, "sample_id"));
  st.emit("drop_report.json", detail::drop_json(steps, level == expr::Level::exon ? &agg : nullptr, m.genes()));
}

inline void cmd_network(Stage& st) {
  const auto& cfg = st.cfg();
  const auto hvg_path = st.input(cfg.path_or_output("hvg_matrix", "hvg_matrix.tsv"), "hvg_matrix");
  const auto acc_path = st.optional_input(cfg.path("accession_map"), "accession_map");
  const auto m = expr::load_expression_matrix(hvg_path, expr::Orientation::genes_as_rows, expr::Level::gene);
  const unsigned threads = detail::threads_of(cfg);

  const auto bmin = cfg.integer("beta_min"), bmax = cfg.integer("beta_max");
  if (bmin < 1 || bmax < bmin) throw ValidationError("beta range must satisfy 1 <= beta_min <= beta_max");
  std::vector<int> betas;
  for (auto b = bmin; b <= bmax; ++b) betas.push_back(static_cast<int>(b));

  const auto corr = network::correlation_matrix(m, threads);
  for (const auto& g : corr.zero_variance_genes) st.warn("gene " + g + " has zero variance");
  const auto scan = network::soft_threshold_scan(corr, betas);
  int beta = static_cast<int>(cfg.integer("beta"));
  if (beta < 0) throw ValidationError("beta must be >= 0 (0 selects automatically)");
  if (beta == 0) {
    beta = scan.recommended_beta;
    if (!scan.threshold_met) st.warn("no beta reached the scale-free R^2 criterion; using beta " + std::to_string(beta));
  }
  st.record().details["beta"] = beta;
  st.record().details["beta_source"] = cfg.integer("beta") == 0 ? "scan" : "config";

  const auto adj = network::adjacency(corr, beta);
  const auto mods = network::detect_modules(adj, static_cast<std::size_t>(cfg.integer("min_module_size")), cfg.num("tree_cut"));
  if (mods.modules.empty()) st.warn("no modules detected");
  st.record().details["modules"] = mods.modules.size();

  std::vector<network::Eigengene> eigs;
  for (const auto& mod : mods.modules) eigs.push_back(network::module_eigengene(m, mod));
  const auto k = cfg.integer("biomarker_count");
  if (k < 1) throw ValidationError("biomarker_count must be >= 1");
  const auto ranked = network::rank_biomarkers(network::intramodular_connectivity(adj, mods), cfg.list("exclusion_prefixes"),
                                               static_cast<std::size_t>(k));
  if (ranked.short_list) st.warn("fewer than " + std::to_string(k) + " biomarkers after exclusions");

  std::unordered_map<std::string, std::string> accessions;
  if (!acc_path.empty()) accessions = expr::load_two_column(acc_path, "gene");

  std::string scan_csv = "beta,signed_r_squared,slope,mean_connectivity,degenerate\n";
  for (const auto& r : scan.records)
    scan_csv += join_row({std::to_string(r.beta), format_double(r.r_squared), format_double(r.slope),
                          format_double(r.mean_connectivity), r.degenerate ? "1" : "0"},
                         ',');
  std::string mod_csv = "gene_id,module\n";
  for (std::size_t g = 0; g < mods.labels.size(); ++g) mod_csv += join_row({csv_field(adj.gene_ids[g]), std::to_string(mods.labels[g])}, ',');

  std::vector<std::string> me_names;
  for (std::size_t i = 0; i < eigs.size(); ++i) me_names.push_back("ME" + std::to_string(i + 1));
  std::vector<std::string> head{"sample_id"};
  head.insert(head.end(), me_names.begin(), me_names.end());
  std::string eig_csv = join_row(head, ',');
  for (std::size_t s = 0; s < m.samples(); ++s) {
    std::vector<std::string> row{csv_field(m.sample_ids[s])};
    for (const auto& e : eigs) row.push_back(format_double(e.values[s]));
    eig_csv += join_row(row, ',');
  }
  std::string eig_corr;
  if (eigs.size() >= 2) {
    eig_corr = detail::matrix_csv(network::eigengene_correlation(eigs), me_names, "module");
  } else {
    eig_corr = join_row(std::vector<std::string>{"module"}, ',');
    st.warn("fewer than 2 modules; eigengene correlation is empty");
  }

  std::string bio = "gene_id,module,k_within,rank,accession\n";
  for (const auto& e : ranked.ranking) {
    auto it = accessions.find(e.gene_id);
    bio += join_row({csv_field(e.gene_id), std::to_string(e.module), format_double(e.k_within), std::to_string(e.rank),
                     it == accessions.end() ? "" : csv_field(it->second)},
                    ',');
  }
  st.emit("beta_scan.csv", scan_csv);
  st.emit("modules.csv", mod_csv);
  st.emit("eigengenes.csv", eig_csv);
  st.emit("eigengene_corr.csv", eig_corr);
  st.emit("biomarkers.csv", bio);
}

inline void cmd_targets(Stage& st) {
  const auto& cfg = st.cfg();
  std::vector<std::string> accessions = cfg.list("accessions");
  if (accessions.empty()) {
    const auto bio_path = st.input(cfg.path_or_output("biomarkers", "biomarkers.csv"), "biomarkers");
    const auto t = CsvTable::load(bio_path);
    const auto c = t.col("accession");
    for (const auto& r : t.rows) {
      const std::string a(trim(r.fields[c]));
      if (!a.empty() && std::find(accessions.begin(), accessions.end(), a) == accessions.end()) accessions.push_back(a);
    }
  }
  if (accessions.empty()) st.warn("no accessions to fetch");

  structure::FetchOptions opts;
  opts.base_url = cfg.str("structure_url");
  opts.cache_dir = cfg.path("cache_dir").empty() ? cfg.output_dir() / "structure_cache" : cfg.path("cache_dir");
  opts.offline = cfg.flag("offline");
  opts.timeout_seconds = static_cast<int>(cfg.integer("fetch_timeout_seconds"));
  opts = structure::apply_env(opts);
  st.record().details["cache_dir"] = opts.cache_dir.string();
  st.record().details["offline"] = opts.offline;

  structure::FetchCounters counters;
  const auto batch = structure::fetch_all(accessions, opts, static_cast<std::size_t>(std::max<std::int64_t>(1, cfg.integer("max_in_flight"))), &counters);
  st.record().details["cache_hits"] = counters.cache_hits.load();
  st.record().details["network_requests"] = counters.network_requests.load();

  std::string qc = "accession,mean_plddt,pass\n";
  for (const auto& s : batch.structures) {
    const auto gate = structure::qc_plddt(s, cfg.num("min_plddt"));
    qc += join_row({csv_field(s.accession), format_double(gate.mean_plddt), gate.pass ? "true" : "false"}, ',');
    if (!gate.pass) st.warn(s.accession + " fails the pLDDT gate");
  }
  std::string flagged = "accession,reason\n";
  for (const auto& f : batch.flagged) {
    flagged += join_row({csv_field(f.accession), csv_field(f.reason)}, ',');
    st.warn("flagged " + f.accession + ": " + f.reason);
  }
  st.emit("targets_qc.csv", qc);
  st.emit("flagged_targets.csv", flagged);
}

inline void cmd_pockets(Stage& st) {
  const auto& cfg = st.cfg();
  const auto files = cfg.list("pocket_files");
  if (files.empty()) throw ValidationError("missing input: pocket_files is empty");
  std::vector<fs::path> paths;
  for (const auto& f : files) paths.push_back(st.input(cfg.resolve(f), "pocket file"));

  const auto top = cfg.integer("top_pockets");
  const auto k = cfg.integer("hotspot_k");
  if (top < 1 || k < 1) throw ValidationError("top_pockets and hotspot_k must be >= 1");

  std::string ranked = "target,rank,pocket_id,raw_score,norm_score,volume,depth,enclosure,hydrophobicity,aromaticity,donors,acceptors\n";
  nlohmann::json hot = nlohmann::json::array();
  std::size_t loaded = 0;
  for (const auto& p : paths) {
    std::vector<structure::PocketDescriptor> ps;
    try {
      ps = structure::load_pockets(p);
      if (ps.empty()) throw ValidationError("no pockets");
    } catch (const Error& e) {
      st.warn(p.string() + ": " + e.what());
      continue;
    }
    ++loaded;
    const std::string target = p.stem().string();
    const auto scored = structure::score_pockets(ps, static_cast<std::size_t>(top));
    for (std::size_t i = 0; i < scored.size(); ++i) {
      const auto& d = scored[i];
      ranked += join_row({csv_field(target), std::to_string(i + 1), csv_field(d.id), format_double(d.raw_score),
                          format_double(d.norm_score), format_double(d.volume), format_double(d.depth),
                          format_double(d.enclosure), format_double(d.hydrophobicity), format_double(d.aromaticity),
                          std::to_string(d.donors), std::to_string(d.acceptors)},
                         ',');
      if (d.atom_coords.size() < static_cast<std::size_t>(k)) {
        st.warn(target + "/" + d.id + ": fewer atoms than hotspot_k, no hotspots");
        continue;
      }
      const auto hs = structure::kmeans_hotspots(d.atom_coords, static_cast<std::size_t>(k),
                                                 derive_seed(cfg.seed(), {loaded, i}), cfg.num("pocket_radius"));
      auto j = structure::hotspots_to_json(hs);
      j["target"] = target;
      j["pocket_id"] = d.id;
      hot.push_back(j);
    }
  }
  if (loaded == 0) throw EmptyResultError("no pocket file could be loaded");
  if (hot.empty()) st.warn("no pocket has enough atoms for hotspots");
  st.emit("pockets_ranked.csv", ranked);
  st.emit("hotspots.json", hot.dump(2) + "\n");
}

inline std::vector<chem::Molecule> load_reference_smiles(const fs::path& p, Stage& st) {
  std::vector<chem::Molecule> out;
  for (const auto& row : read_table(p, ' ')) {
    const std::string smi(trim(row.fields.front()));
    if (smi.empty()) continue;
    try {
      out.push_back(chem::parse_smiles(smi));
    } catch (const Error& e) {
      st.warn("reference line " + std::to_string(row.line) + " skipped: " + e.what());
    }
  }
  return out;
}

inline void cmd_generate(Stage& st) {
  const auto& cfg = st.cfg();
  const auto ga = cfg.ga();
  const auto hs_path = st.input(cfg.path_or_output("hotspots", "hotspots.json"), "hotspots");
  const auto lib_path = st.input(cfg.data_file("fragment_library", "fragments.csv"), "fragment_library");
  const auto rx_default = cfg.data_file("reaction_templates", "reaction_templates.json");
  const auto ff_default = cfg.data_file("force_field", "force_field.json");
  const auto rx_path = cfg.str("reaction_templates").empty() && !fs::exists(rx_default) ? fs::path{}
                                                                                        : st.input(rx_default, "reaction_templates");
  const auto ff_path = cfg.str("force_field").empty() && !fs::exists(ff_default) ? fs::path{} : st.input(ff_default, "force_field");
  const auto ref_path = st.optional_input(cfg.path("reference_smiles"), "reference_smiles");

  nlohmann::json hot;
  try {
    hot = nlohmann::json::parse(read_file(hs_path));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(hs_path.string() + ": " + e.what());
  }
  if (hot.is_array()) {
    if (hot.empty()) throw ValidationError("hotspots.json has no entries");
    hot = hot.front();
  }
  auto hs = structure::hotspots_from_json(hot);
  if (hs.centroids.size() != static_cast<std::size_t>(ga.hotspot_k))
    st.warn("hotspot file has " + std::to_string(hs.centroids.size()) + " centroids, hotspot_k is " + std::to_string(ga.hotspot_k));

  const auto lib = chem::load_fragment_library(lib_path);
  for (const auto& r : lib.rejected) st.warn("fragment " + r.name + " rejected: " + r.reason);
  const auto ff = ff_path.empty() ? conformer::default_force_field() : conformer::load_force_field(ff_path);
  const auto rx = rx_path.empty() ? chem::default_reaction_templates() : chem::load_reaction_templates(rx_path);
  const auto refs = ref_path.empty() ? std::vector<chem::Molecule>{} : load_reference_smiles(ref_path, st);

  const auto ctx = evolve::make_context(ga, lib, hs, refs, ff, rx);
  const auto result = evolve::run(ga, ctx);
  for (const auto& w : result.warnings) st.warn(w);
  st.record().details["library_size"] = lib.entries.size();
  st.record().details["top_k"] = result.top.size();

  st.emit("top_k.csv", evolve::candidates_csv(result.top, true));
  st.emit("candidates.smi", evolve::candidates_smi(result.top));
  st.emit("candidates.sdf", evolve::candidates_sdf(result.top));
  st.emit("generation_stats.csv", evolve::generation_stats_csv(result));
  st.emit("generation_stats.json", evolve::stats_to_json(result, ga).dump(2) + "\n");
  st.emit("final_population.csv", evolve::candidates_csv(result.final_population, true));
}

inline void cmd_filter(Stage& st) {
  const auto& cfg = st.cfg();
  const auto in = st.input(cfg.path_or_output("candidates", "candidates.smi"), "candidates");
  std::string report = "name,smiles,mw,logp,tpsa,hbd,hba,rot_bonds,lipinski_violations,pfizer,gsk,golden_triangle,alerts,pass\n";
  std::string survivors;
  int total = 0, skipped = 0, passed = 0;
  for (const auto& row : parse_table(read_file(in), ' ')) {
    std::vector<std::string> toks;
    for (const auto& f : row.fields)
      if (!trim(f).empty()) toks.emplace_back(trim(f));
    if (toks.empty()) continue;
    ++total;
    const std::string name = toks.size() > 1 ? toks[1] : "line_" + std::to_string(row.line);
    chem::Molecule m;
    try {
      m = chem::parse_smiles(toks[0]);
    } catch (const Error& e) {
      ++skipped;
      st.warn("line " + std::to_string(row.line) + " skipped: " + e.what());
      continue;
    }
    const auto d = chem::descriptors(m);
    const auto f = chem::rule_filters(m);
    const bool pass = f.survives();
    std::string alerts;
    for (const auto& a : f.alerts) alerts += (alerts.empty() ? "" : ";") + a;
    report += join_row({csv_field(name), csv_field(toks[0]), format_fixed(d.mw, 3), format_fixed(d.logp, 3), format_fixed(d.tpsa, 2),
                        std::to_string(d.hbd), std::to_string(d.hba), std::to_string(d.rot_bonds),
                        std::to_string(f.lipinski_violations), f.pfizer_flag ? "1" : "0", f.gsk_flag ? "1" : "0",
                        f.golden_triangle_flag ? "1" : "0", csv_field(alerts), pass ? "1" : "0"},
                       ',');
    if (pass) {
      ++passed;
      survivors += toks[0] + " " + name + "\n";
    }
  }
  const nlohmann::json summary = {{"total", total}, {"skipped", skipped}, {"evaluated", total - skipped}, {"passed", passed},
                                  {"failed", total - skipped - passed}};
  st.record().details = summary;
  st.emit("filter_report.csv", report);
  st.emit("survivors.smi", survivors);
  st.emit("filter_summary.json", summary.dump(2) + "\n");
}

inline void cmd_report(Stage& st) {
  const auto& cfg = st.cfg();
  const auto stats_path = st.input(cfg.path_or_output("generation_stats", "generation_stats.csv"), "generation_stats");
  const auto top_path = st.input(cfg.path_or_output("top_k", "top_k.csv"), "top_k");
  const auto dock_path = st.optional_input(cfg.path("docking_energies"), "docking_energies");
  const int bins = static_cast<int>(cfg.integer("histogram_bins"));

  const auto stats = CsvTable::load(stats_path);
  const auto top = CsvTable::load(top_path);
  const auto emit_hist = [&](const std::string& name, const std::string& title, const std::vector<double>& xs, double lo, double hi) {
    const auto h = detail::histogram(xs, lo, hi, bins);
    st.emit(name + ".csv", detail::histogram_csv(h));
    st.emit(name + ".svg", bar_chart_svg(title, title, h.edges, h.counts));
  };
  std::vector<double> qed, sa, fit;
  if (!top.header.empty()) {
    qed = top.numbers("qed");
    sa = top.numbers("sa_score");
    fit = top.numbers("pocket_fit");
  }
  emit_hist("qed_hist", "QED", qed, 0.0, 1.0);
  emit_hist("sa_hist", "SA score", sa, 0.0, 5.0);
  emit_hist("pocketfit_hist", "Pocket fit", fit, 0.0, 1.0);

  std::vector<double> gen, best, mean, div;
  if (!stats.header.empty()) {
    gen = stats.numbers("generation");
    best = stats.numbers("best_fitness");
    mean = stats.numbers("mean_fitness");
    div = stats.numbers("mean_pairwise_tanimoto");
  }
  std::string conv = "generation,best_fitness,mean_fitness\n", dcsv = "generation,mean_pairwise_tanimoto\n";
  for (std::size_t i = 0; i < gen.size(); ++i) {
    conv += join_row({format_double(gen[i]), format_double(best[i]), format_double(mean[i])}, ',');
    dcsv += join_row({format_double(gen[i]), format_double(div[i])}, ',');
  }
  st.emit("convergence.csv", conv);
  st.emit("convergence.svg", line_chart_svg("Convergence", "generation", "fitness", gen, {best, mean}));
  st.emit("diversity.csv", dcsv);
  st.emit("diversity.svg", line_chart_svg("Diversity", "generation", "mean pairwise Tanimoto", gen, {div}));

  if (!dock_path.empty()) {
    const auto dock = CsvTable::load(dock_path);
    const auto sc = dock.col("smiles"), ec = dock.col("energy");
    std::map<std::string, std::string> energy;
    for (const auto& r : dock.rows) {
      try {
        energy[chem::canonical_smiles(r.fields[sc])] = r.fields[ec];
      } catch (const Error& e) {
        st.warn("docking line " + std::to_string(r.line) + " skipped: " + e.what());
      }
    }
    std::vector<std::string> head = top.header;
    head.push_back("docking_energy");
    std::string merged = join_row(head, ',');
    const auto smc = top.col("smiles");
    for (const auto& r : top.rows) {
      std::vector<std::string> row;
      for (const auto& f : r.fields) row.push_back(csv_field(f));
      auto it = energy.find(chem::canonical_smiles(r.fields[smc]));
      row.push_back(it == energy.end() ? "" : csv_field(it->second));
      merged += join_row(row, ',');
    }
    st.emit("top_k_docking.csv", merged);
  }
}

using StageFn = std::function<void(Stage&)>;

// Files a stage reads, for the cache key. Missing files are left to the stage
// itself to report.
inline std::vector<fs::path> declared_inputs(const std::string& name, const PipelineConfig& cfg) {
  std::vector<fs::path> in;
  if (name == "preprocess") {
    in = {cfg.path("expression"), cfg.path("probe_map"), cfg.path("annotation")};
  } else if (name == "network") {
    in = {cfg.path_or_output("hvg_matrix", "hvg_matrix.tsv"), cfg.path("accession_map")};
  } else if (name == "targets") {
    if (cfg.list("accessions").empty()) in = {cfg.path_or_output("biomarkers", "biomarkers.csv")};
  } else if (name == "pockets") {
    for (const auto& f : cfg.list("pocket_files")) in.push_back(cfg.resolve(f));
  } else if (name == "generate") {
    in = {cfg.path_or_output("hotspots", "hotspots.json"), cfg.data_file("fragment_library", "fragments.csv"),
          cfg.data_file("reaction_templates", "reaction_templates.json"), cfg.data_file("force_field", "force_field.json"),
          cfg.path("reference_smiles")};
  } else if (name == "filter") {
    in = {cfg.path_or_output("candidates", "candidates.smi")};
  } else if (name == "report") {
    in = {cfg.path_or_output("generation_stats", "generation_stats.csv"), cfg.path_or_output("top_k", "top_k.csv"),
          cfg.path("docking_energies")};
  }
  std::erase_if(in, [](const fs::path& p) { return p.empty(); });
  return in;
}

inline const std::map<std::string, StageFn>& stages() {
  static const std::map<std::string, StageFn> table = {
      {"preprocess", cmd_preprocess}, {"network", cmd_network}, {"targets", cmd_targets}, {"pockets", cmd_pockets},
      {"generate", cmd_generate},     {"filter", cmd_filter},   {"report", cmd_report}};
  return table;
}

inline int exit_code_for(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const InitializationError&) {
    return kExitGeneration;
  } catch (const ParseError&) {
    return kExitInput;
  } catch (const ValidationError&) {
    return kExitInput;
  } catch (const EmptyResultError&) {
    return kExitInput;
  } catch (const SanitizeError&) {
    return kExitInput;
  } catch (const FetchError&) {
    return kExitInput;
  } catch (const fs::filesystem_error&) {
    return kExitInput;
  } catch (...) {
    return kExitInternal;
  }
}

// Stages other than targets reuse outputs whose cache key (config, tool
// version, input digests) is unchanged; targets depends on remote state.
struct RunOptions {
  bool use_cache = true;
};

// Runs one stage, records it in <output_dir>/manifest.json and returns the exit code.
inline int run_stage(const std::string& name, const PipelineConfig& cfg, const RunOptions& opt = {}, std::ostream& err = std::cerr) {
  auto it = stages().find(name);
  if (it == stages().end()) {
    err << "lforge: unknown command '" << name << "'\n";
    return kExitInput;
  }
  StageRecord rec;
  rec.stage = name;
  rec.config = cfg.json();
  const auto manifest_path = cfg.output_dir() / "manifest.json";
  const auto t0 = std::chrono::steady_clock::now();
  Stage st(cfg, rec);
  try {
    const auto previous = read_manifest(manifest_path);
    nlohmann::json key = {{"stage", name}, {"version", kToolVersion}, {"config", cfg.json()}};
    for (const auto& p : declared_inputs(name, cfg))
      if (fs::is_regular_file(p)) key["inputs"][p.string()] = file_digest(p);
    rec.cache_key = sha256_hex(key.dump());
    if (opt.use_cache && name != "targets" && cache_hit(previous, name, rec.cache_key)) {
      const auto& prev = previous["stages"][name];
      rec.cached = true;
      for (const auto& [p, d] : prev["outputs"].items()) rec.outputs.emplace_back(p, d.get<std::string>());
      rec.warnings = prev.value("warnings", std::vector<std::string>{});
      rec.details = prev.value("details", nlohmann::json::object());
      for (const auto& p : declared_inputs(name, cfg)) rec.add_input(p);
    } else {
      it->second(st);
      st.commit();
    }
  } catch (...) {
    rec.exit_code = exit_code_for(std::current_exception());
    try {
      std::rethrow_exception(std::current_exception());
    } catch (const std::exception& e) {
      rec.error = e.what();
    } catch (...) {
      rec.error = "unknown error";
    }
    err << "lforge " << name << ": error: " << rec.error << "\n";
  }
  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  for (const auto& w : rec.warnings) err << "lforge " << name << ": warning: " << w << "\n";
  try {
    record_stage(manifest_path, rec, kToolVersion);
  } catch (const std::exception& e) {
    err << "lforge " << name << ": cannot write manifest: " << e.what() << "\n";
    if (rec.exit_code == 0) rec.exit_code = kExitInternal;
  }
  return rec.exit_code;
}

}  // namespace lforge::pipeline
