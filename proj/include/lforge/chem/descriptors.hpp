#pragma once

// Physicochemical descriptors, QED, a synthetic-accessibility surrogate and
// rule-of-thumb filters.

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "lforge/chem/molecule.hpp"
#include "lforge/chem/pattern.hpp"

namespace lforge::chem {

struct DescriptorRecord {
  double mw = 0.0;
  double logp = 0.0;
  double tpsa = 0.0;
  int hbd = 0;
  int hba = 0;
  int rot_bonds = 0;
  int ring_count = 0;
  int aromatic_ring_count = 0;
  int heavy_atom_count = 0;
};

namespace detail {

inline bool is_hetero(int z) { return z != 6 && z != 1 && z != 0; }

inline int double_partner(const Molecule& m, int i) {
  for (const auto& n : m.neighbors(i))
    if (m.bond(n.bond).order == 2 && !m.bond(n.bond).aromatic) return n.atom;
  return -1;
}

inline bool has_triple(const Molecule& m, int i) {
  for (const auto& n : m.neighbors(i))
    if (m.bond(n.bond).order == 3) return true;
  return false;
}

inline bool next_to_aromatic(const Molecule& m, int i) {
  for (const auto& n : m.neighbors(i))
    if (m.atom(n.atom).aromatic) return true;
  return false;
}

// Carbon doubly bonded to oxygen.
inline bool is_carbonyl_carbon(const Molecule& m, int c) {
  if (m.atom(c).element != 6) return false;
  for (const auto& n : m.neighbors(c))
    if (m.bond(n.bond).order == 2 && !m.bond(n.bond).aromatic && m.atom(n.atom).element == 8) return true;
  return false;
}

inline bool is_amide_nitrogen(const Molecule& m, int i) {
  if (m.atom(i).element != 7 || m.atom(i).aromatic) return false;
  for (const auto& n : m.neighbors(i))
    if (m.bond(n.bond).order == 1 && is_carbonyl_carbon(m, n.atom)) return true;
  return false;
}

// Reduced Wildman-Crippen style atom classes.
inline double crippen_heavy(const Molecule& m, int i) {
  const auto& a = m.atom(i);
  int hetero_nb = 0, heavy_nb = 0;
  for (const auto& n : m.neighbors(i)) {
    const int z = m.atom(n.atom).element;
    if (z > 1) ++heavy_nb;
    if (is_hetero(z)) ++hetero_nb;
  }
  switch (a.element) {
    case 6: {
      if (a.aromatic) {
        if (a.hcount > 0) return 0.1581;
        bool exo_hetero = false, fused = true;
        for (const auto& n : m.neighbors(i)) {
          if (is_hetero(m.atom(n.atom).element)) exo_hetero = true;
          if (!m.bond(n.bond).aromatic) fused = false;
        }
        if (exo_hetero) return 0.1360;
        return fused ? 0.2955 : 0.2713;
      }
      if (a.charge != 0) return -0.2;
      if (has_triple(m, i)) return 0.0017;
      const int dp = double_partner(m, i);
      if (dp >= 0) return is_hetero(m.atom(dp).element) ? -0.2783 : 0.1551;
      if (hetero_nb == 0) return heavy_nb <= 2 ? 0.1441 : 0.0;
      return heavy_nb <= 2 ? -0.2035 : -0.2051;
    }
    case 7: {
      if (a.charge > 0) return -1.0;
      if (a.aromatic) return m.degree(i) + a.hcount == 2 ? -0.4806 : -0.1;
      if (has_triple(m, i)) return -0.3239;
      if (double_partner(m, i) >= 0) return -0.3187;
      const bool conj = next_to_aromatic(m, i) || is_amide_nitrogen(m, i);
      if (a.hcount >= 2) return conj ? -0.4458 : -1.0190;
      if (a.hcount == 1) return conj ? -0.3242 : -0.7096;
      return conj ? -0.1 : -0.3187;
    }
    case 8: {
      if (a.charge < 0) return -1.0;
      if (a.aromatic) return 0.1552;
      const int dp = double_partner(m, i);
      if (dp >= 0) return m.atom(dp).aromatic || next_to_aromatic(m, dp) ? 0.1129 : -0.1526;
      if (a.hcount > 0) return -0.2893;
      return next_to_aromatic(m, i) ? -0.4195 : -0.0684;
    }
    case 16:
      if (a.aromatic) return 0.6237;
      for (const auto& n : m.neighbors(i))
        if (m.bond(n.bond).order == 2) return -0.0024;
      return 0.6482;
    case 9: return 0.4202;
    case 17: return 0.6895;
    case 35: return 0.8456;
    case 53: return 0.8857;
    case 15: return 0.8612;
    case 5: return -0.2;
    case 14: return 0.3;
    case 34: return 0.6;
    default: return 0.0;
  }
}

inline double crippen_hydrogen(const Molecule& m, int i) {
  const auto& a = m.atom(i);
  switch (a.element) {
    case 6: return 0.1230;
    case 7: return 0.2142;
    case 8:
      for (const auto& n : m.neighbors(i))
        if (is_carbonyl_carbon(m, n.atom)) return 0.2980;
      return -0.2677;
    default: return 0.1125;
  }
}

// Ertl polar surface contributions for N and O environments.
inline double tpsa_contribution(const Molecule& m, int i) {
  const auto& a = m.atom(i);
  int singles = 0, doubles = 0, triples = 0, arom = 0;
  for (const auto& n : m.neighbors(i)) {
    const auto& b = m.bond(n.bond);
    if (b.aromatic)
      ++arom;
    else if (b.order == 1)
      ++singles;
    else if (b.order == 2)
      ++doubles;
    else
      ++triples;
  }
  const int h = a.hcount;
  if (a.element == 7) {
    if (a.aromatic) {
      if (a.charge > 0) return arom == 3 ? 4.93 : 14.14;
      if (h > 0) return 15.79;
      return arom + singles == 3 ? 4.41 : 12.89;
    }
    if (a.charge > 0) {
      if (doubles == 1 && singles == 2 && h == 0) return 11.68;
      if (h == 0) return 0.0;
      return 4.36 * h;
    }
    if (triples == 1) return 23.79;
    if (doubles == 1) return h > 0 ? 23.85 : 12.36;
    if (h == 0) return 3.24;
    if (h == 1) return 12.03;
    return 26.02;
  }
  if (a.element == 8) {
    if (a.aromatic) return 13.14;
    if (a.charge < 0) return 23.06;
    if (doubles == 1) return 17.07;
    if (h > 0) return 20.23;
    return 9.23;
  }
  return 0.0;
}

}  // namespace detail

inline double molecular_weight(const Molecule& m) {
  double w = 0.0;
  for (const auto& a : m.atoms()) {
    if (const auto* e = element_by_z(a.element)) w += e->mass;
    w += a.hcount * kHydrogenMass;
  }
  return w;
}

inline double crippen_logp(const Molecule& m) {
  double v = 0.0;
  for (int i = 0; i < m.atom_count(); ++i) {
    if (m.atom(i).is_dummy()) continue;
    v += detail::crippen_heavy(m, i) + m.atom(i).hcount * detail::crippen_hydrogen(m, i);
  }
  return v;
}

inline double tpsa(const Molecule& m) {
  double v = 0.0;
  for (int i = 0; i < m.atom_count(); ++i) v += detail::tpsa_contribution(m, i);
  return v;
}

inline int hbond_donors(const Molecule& m) {
  int c = 0;
  for (const auto& a : m.atoms())
    if ((a.element == 7 || a.element == 8) && a.hcount > 0) ++c;
  return c;
}

// N and O that are not positively charged; amide nitrogens excluded.
inline int hbond_acceptors(const Molecule& m) {
  int c = 0;
  for (int i = 0; i < m.atom_count(); ++i) {
    const auto& a = m.atom(i);
    if (a.element != 7 && a.element != 8) continue;
    if (a.charge > 0 || detail::is_amide_nitrogen(m, i)) continue;
    ++c;
  }
  return c;
}

inline bool is_rotatable(const Molecule& m, const RingInfo& rings, int b) {
  const auto& bond = m.bond(b);
  if (bond.aromatic || bond.order != 1 || rings.bond_in_ring[static_cast<std::size_t>(b)]) return false;
  if (!m.atom(bond.a).is_heavy() || !m.atom(bond.b).is_heavy()) return false;
  if (m.heavy_degree(bond.a) < 2 || m.heavy_degree(bond.b) < 2) return false;
  const bool amide = (detail::is_carbonyl_carbon(m, bond.a) && m.atom(bond.b).element == 7) ||
                     (detail::is_carbonyl_carbon(m, bond.b) && m.atom(bond.a).element == 7);
  return !amide;
}

inline int rotatable_bonds(const Molecule& m) {
  const auto rings = m.ring_info();
  int c = 0;
  for (int b = 0; b < m.bond_count(); ++b)
    if (is_rotatable(m, *rings, b)) ++c;
  return c;
}

inline int aromatic_ring_count(const Molecule& m) {
  const auto rings = m.ring_info();
  int c = 0;
  for (const auto& r : rings->bond_rings) {
    bool all = true;
    for (int b : r) all = all && m.bond(b).aromatic;
    if (all) ++c;
  }
  return c;
}

inline DescriptorRecord descriptors(const Molecule& m) {
  DescriptorRecord d;
  d.mw = molecular_weight(m);
  d.logp = crippen_logp(m);
  d.tpsa = tpsa(m);
  d.hbd = hbond_donors(m);
  d.hba = hbond_acceptors(m);
  d.rot_bonds = rotatable_bonds(m);
  d.ring_count = static_cast<int>(m.ring_info()->atom_rings.size());
  d.aromatic_ring_count = aromatic_ring_count(m);
  d.heavy_atom_count = m.heavy_atom_count();
  return d;
}

// Structural alerts counted towards QED (one per alert type present).
inline const std::vector<Pattern>& structural_alerts() {
  static const std::vector<Pattern> alerts = [] {
    std::vector<Pattern> v;
    for (const char* s : {"[N+](=O)[O-]", "[C;H1](=O)[#6]", "N=N", "[S;H1]", "C(=O)[F,Cl,Br,I]", "OO", "C=CC=O",
                          "N=C=O", "[C;X4][I,Br]", "N-N", "[N;H2]-a"})
      v.emplace_back(s);
    return v;
  }();
  return alerts;
}

inline int alert_count(const Molecule& m) {
  int c = 0;
  for (const auto& p : structural_alerts())
    if (p.matches(m)) ++c;
  return c;
}

struct QedExtras {
  int alerts = 0;
  int aromatic_rings = 0;
};

// Asymmetric double sigmoid parameters {A, B, C, D, E, F, DMAX} for MW, ALOGP,
// HBA, HBD, PSA, ROTB, AROM, ALERTS (Bickerton et al. 2012).
inline constexpr std::array<std::array<double, 7>, 8> kQedParams{{
    {2.817065973, 392.5754953, 290.7489764, 2.419764353, 49.22325677, 65.37051707, 104.9805561},
    {3.172690585, 137.8624751, 2.534937431, 4.581497897, 0.822739154, 0.576295591, 131.3186604},
    {2.948620388, 160.4605972, 3.615294657, 4.435986202, 0.290141953, 1.300669958, 148.7763046},
    {1.618662227, 1010.051101, 0.985094388, 0.000000001, 0.713820843, 0.920922555, 258.1632616},
    {1.876861559, 125.2232657, 62.90773554, 87.83366614, 12.01999824, 28.51324732, 104.5686167},
    {0.010000000, 272.4121427, 2.558379970, 1.565547684, 1.271567166, 2.758063707, 105.4420403},
    {3.217788970, 957.7374108, 2.274627939, 0.000000001, 1.317690384, 0.375760881, 312.3372610},
    {0.010000000, 1199.094025, -0.09002883, 0.000000001, 0.185904477, 0.875193782, 417.7253140},
}};

inline double qed_desirability(std::size_t property, double x) {
  const auto& p = kQedParams[property];
  const double a = p[0], b = p[1], c = p[2], d = p[3], e = p[4], f = p[5], dmax = p[6];
  const double ads = a + b / (1.0 + std::exp(-(x - c + d / 2.0) / e)) * (1.0 - 1.0 / (1.0 + std::exp(-(x - c - d / 2.0) / f)));
  return std::clamp(ads / dmax, 0.0, 1.0);
}

// Unweighted geometric mean; any zero desirability gives zero.
inline double qed_from_desirabilities(const std::array<double, 8>& ds) {
  double log_sum = 0.0;
  for (double d : ds) {
    if (d <= 0.0) return 0.0;
    log_sum += std::log(d);
  }
  return std::exp(log_sum / 8.0);
}

inline std::array<double, 8> qed_desirabilities(const DescriptorRecord& d, const QedExtras& x) {
  const std::array<double, 8> values{d.mw, d.logp, static_cast<double>(d.hba), static_cast<double>(d.hbd), d.tpsa,
                                     static_cast<double>(d.rot_bonds), static_cast<double>(x.aromatic_rings),
                                     static_cast<double>(x.alerts)};
  std::array<double, 8> out{};
  for (std::size_t k = 0; k < 8; ++k) out[k] = qed_desirability(k, values[k]);
  return out;
}

inline double qed(const DescriptorRecord& d, const QedExtras& x) {
  return qed_from_desirabilities(qed_desirabilities(d, x));
}

inline double qed(const Molecule& m) {
  const auto d = descriptors(m);
  return qed(d, {alert_count(m), d.aromatic_ring_count});
}

struct SaWeights {
  double base = 0.8;
  double fused_junction = 0.35;
  double spiro = 0.3;
  double macrocycle = 0.5;
  double extra_ring = 0.05;
  double branch_point = 0.08;
  double stereo_center = 0.12;
  double size = 0.02;
  int size_free_atoms = 12;
};

struct SaTerms {
  int fused_junctions = 0;
  int spiro_atoms = 0;
  int macrocycles = 0;
  int rings = 0;
  int branch_points = 0;
  int stereo_centers = 0;
  int heavy_atoms = 0;
};

inline SaTerms sa_terms(const Molecule& m) {
  SaTerms t;
  const auto rings = m.ring_info();
  const auto& rb = rings->bond_rings;
  const auto& ra = rings->atom_rings;
  t.rings = static_cast<int>(ra.size());
  for (std::size_t r = 0; r < rb.size(); ++r) {
    if (ra[r].size() > 8) ++t.macrocycles;
    for (std::size_t s = r + 1; s < rb.size(); ++s) {
      bool bond_shared = false;
      for (int b : rb[r])
        if (std::find(rb[s].begin(), rb[s].end(), b) != rb[s].end()) bond_shared = true;
      if (bond_shared) {
        ++t.fused_junctions;
        continue;
      }
      for (int a : ra[r])
        if (std::find(ra[s].begin(), ra[s].end(), a) != ra[s].end()) ++t.spiro_atoms;
    }
  }
  for (int i = 0; i < m.atom_count(); ++i) {
    const auto& a = m.atom(i);
    if (!a.is_heavy()) continue;
    ++t.heavy_atoms;
    const int hd = m.heavy_degree(i);
    if (!rings->atom_in_ring(i) && hd >= 3) ++t.branch_points;
    if (a.element == 6 && !a.aromatic && hd + a.hcount == 4 && a.hcount <= 1 && hd >= 3) {
      bool saturated = true;
      for (const auto& n : m.neighbors(i)) saturated = saturated && m.bond(n.bond).order == 1;
      if (saturated) ++t.stereo_centers;
    }
  }
  return t;
}

// Synthetic-accessibility surrogate: ring topology, branching and size
// penalties on top of a base value (benzene scores exactly the base).
inline double sa_score(const Molecule& m, const SaWeights& w = {}) {
  const auto t = sa_terms(m);
  return w.base + w.fused_junction * t.fused_junctions + w.spiro * t.spiro_atoms + w.macrocycle * t.macrocycles +
         w.extra_ring * std::max(0, t.rings - 1) + w.branch_point * t.branch_points + w.stereo_center * t.stereo_centers +
         w.size * std::max(0, t.heavy_atoms - w.size_free_atoms);
}

struct FilterReport {
  int lipinski_violations = 0;
  bool pfizer_flag = false;
  bool gsk_flag = false;
  bool golden_triangle_flag = false;
  std::vector<std::string> alerts;

  bool survives() const { return lipinski_violations == 0 && !pfizer_flag && !gsk_flag; }
};

inline constexpr double kLipinskiMaxMw = 500.0;
inline constexpr double kLipinskiMaxLogp = 5.0;
inline constexpr int kLipinskiMaxHbd = 5;
inline constexpr int kLipinskiMaxHba = 10;
inline constexpr double kPfizerMinLogp = 3.0;
inline constexpr double kPfizerMaxTpsa = 75.0;
inline constexpr double kGskMaxMw = 400.0;
inline constexpr double kGskMaxLogp = 4.0;
inline constexpr double kGoldenMinMw = 200.0;
inline constexpr double kGoldenMaxMw = 500.0;
inline constexpr double kGoldenMinLogp = -2.0;
inline constexpr double kGoldenMaxLogp = 5.0;

inline FilterReport rule_filters(const DescriptorRecord& d) {
  FilterReport r;
  r.lipinski_violations = (d.mw > kLipinskiMaxMw) + (d.logp > kLipinskiMaxLogp) + (d.hbd > kLipinskiMaxHbd) +
                          (d.hba > kLipinskiMaxHba);
  r.pfizer_flag = d.logp > kPfizerMinLogp && d.tpsa < kPfizerMaxTpsa;
  r.gsk_flag = d.mw > kGskMaxMw || d.logp > kGskMaxLogp;
  r.golden_triangle_flag =
      !(d.mw >= kGoldenMinMw && d.mw <= kGoldenMaxMw && d.logp >= kGoldenMinLogp && d.logp <= kGoldenMaxLogp);
  return r;
}

inline FilterReport rule_filters(const Molecule& m) {
  auto r = rule_filters(descriptors(m));
  for (const auto& p : structural_alerts())
    if (p.matches(m)) r.alerts.push_back(p.text());
  return r;
}

}  // namespace lforge::chem
