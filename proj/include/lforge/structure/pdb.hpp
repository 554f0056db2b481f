#pragma once

// Fixed-column PDB ATOM/HETATM reader and writer. pLDDT confidence is stored
// in the temperature-factor column of predicted models.

#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "lforge/core/error.hpp"
#include "lforge/core/table.hpp"
#include "lforge/geom/vec3.hpp"

namespace lforge::structure {

struct PdbAtom {
  bool hetatm = false;
  int serial = 0;
  std::string name;      // columns 13-16, trimmed
  std::string res_name;  // columns 18-20
  char chain = ' ';
  int res_seq = 0;
  Vec3 position;
  double occupancy = 1.0;
  double plddt = 0.0;  // temperature factor
  std::string element;
};

struct ModelStructure {
  std::string accession;
  std::vector<PdbAtom> atoms;
};

namespace detail {

inline std::string_view columns(std::string_view line, std::size_t first, std::size_t last) {
  // 1-based inclusive column range, clipped to the line.
  if (line.size() < first) return {};
  return line.substr(first - 1, std::min(last, line.size()) - first + 1);
}

inline int parse_int_field(std::string_view s, std::size_t line, std::string_view what) {
  s = trim(s);
  if (s.empty()) return 0;
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ParseError("bad " + std::string(what) + " '" + std::string(s) + "'", line);
  return v;
}

}  // namespace detail

inline ModelStructure parse_pdb(std::string_view text, std::string accession = {}) {
  if (text.empty()) throw ParseError("empty PDB text");
  ModelStructure out;
  out.accession = std::move(accession);
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const auto record = line.substr(0, std::min<std::size_t>(6, line.size()));
    const bool atom = record == "ATOM  " || record == "ATOM";
    const bool het = record == "HETATM";
    if (!atom && !het) continue;
    if (line.size() < 54) throw ParseError("truncated coordinate record", line_no);
    PdbAtom a;
    a.hetatm = het;
    a.serial = detail::parse_int_field(detail::columns(line, 7, 11), line_no, "serial");
    a.name = std::string(trim(detail::columns(line, 13, 16)));
    a.res_name = std::string(trim(detail::columns(line, 18, 20)));
    auto chain = detail::columns(line, 22, 22);
    a.chain = chain.empty() ? ' ' : chain.front();
    a.res_seq = detail::parse_int_field(detail::columns(line, 23, 26), line_no, "residue number");
    a.position.x = parse_double(detail::columns(line, 31, 38), line_no, "x coordinate");
    a.position.y = parse_double(detail::columns(line, 39, 46), line_no, "y coordinate");
    a.position.z = parse_double(detail::columns(line, 47, 54), line_no, "z coordinate");
    auto occ = trim(detail::columns(line, 55, 60));
    if (!occ.empty()) a.occupancy = parse_double(occ, line_no, "occupancy");
    auto b = trim(detail::columns(line, 61, 66));
    if (!b.empty()) a.plddt = parse_double(b, line_no, "temperature factor");
    if (a.plddt < 0.0 || a.plddt > 100.0) throw ParseError("pLDDT outside [0, 100]", line_no);
    a.element = std::string(trim(detail::columns(line, 77, 78)));
    if (a.element.empty() && !a.name.empty()) a.element = a.name.substr(0, 1);
    out.atoms.push_back(std::move(a));
  }
  if (out.atoms.empty()) throw ParseError("no ATOM or HETATM records");
  return out;
}

inline std::string format_pdb_atom(const PdbAtom& a) {
  char buf[96];
  // Atom names shorter than 4 characters start in column 14.
  std::string name = a.name.size() < 4 ? " " + a.name : a.name;
  std::snprintf(buf, sizeof(buf), "%-6s%5d %-4.4s %3.3s %c%4d    %8.3f%8.3f%8.3f%6.2f%6.2f          %2.2s\n",
                a.hetatm ? "HETATM" : "ATOM", a.serial, name.c_str(), a.res_name.c_str(), a.chain, a.res_seq,
                a.position.x, a.position.y, a.position.z, a.occupancy, a.plddt, a.element.c_str());
  return buf;
}

inline std::string write_pdb(const ModelStructure& s) {
  std::string out;
  for (const auto& a : s.atoms) out += format_pdb_atom(a);
  out += "END\n";
  return out;
}

struct PlddtGate {
  bool pass = false;
  double mean_plddt = 0.0;
};

inline constexpr double kDefaultMinPlddt = 70.0;

// Mean per-atom pLDDT compared (>=) against min_mean.
inline PlddtGate qc_plddt(const ModelStructure& s, double min_mean = kDefaultMinPlddt) {
  if (s.atoms.empty()) throw ValidationError("structure has no atoms");
  double sum = 0.0;
  for (const auto& a : s.atoms) sum += a.plddt;
  const double m = sum / static_cast<double>(s.atoms.size());
  return {m >= min_mean, m};
}

}  // namespace lforge::structure
