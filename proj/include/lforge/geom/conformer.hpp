#pragma once

// Harmonic surrogate force field, conformer embedding and relaxation, strain,
// hotspot alignment and pocket-fit scoring.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <map>
#include <numbers>
#include <queue>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "lforge/chem/elements.hpp"
#include "lforge/chem/molecule.hpp"
#include "lforge/chem/sdf.hpp"
#include "lforge/core/error.hpp"
#include "lforge/core/random.hpp"
#include "lforge/core/table.hpp"
#include "lforge/geom/rotation.hpp"
#include "lforge/geom/vec3.hpp"
#include "lforge/structure/pdb.hpp"
#include "lforge/structure/pockets.hpp"

namespace lforge::conformer {

inline constexpr const char* kDefaultForceField = R"json({
  "bond_k": 100.0,
  "angle_k": 20.0,
  "nonbonded_k": 5.0,
  "nonbonded_r_min": 3.0,
  "nonbonded_min_separation": 4,
  "strain_scale": 0.5,
  "embed_jitter": 0.1,
  "max_steps": 3000,
  "angles_deg": {"sp": 180.0, "sp2": 120.0, "sp3": 109.47},
  "bond_order_scale": {"1": 1.0, "2": 0.87, "3": 0.78, "ar": 0.93},
  "covalent_radii": {"*": 0.76, "H": 0.31, "B": 0.84, "C": 0.76, "N": 0.71, "O": 0.66, "F": 0.57, "Si": 1.11,
                     "P": 1.07, "S": 1.05, "Cl": 1.02, "Se": 1.20, "Br": 1.20, "I": 1.39},
  "bond_lengths": [
    {"a": "C", "b": "C", "order": "1", "length": 1.54},
    {"a": "C", "b": "C", "order": "2", "length": 1.34},
    {"a": "C", "b": "C", "order": "3", "length": 1.20},
    {"a": "C", "b": "C", "order": "ar", "length": 1.39},
    {"a": "C", "b": "N", "order": "1", "length": 1.47},
    {"a": "C", "b": "N", "order": "2", "length": 1.28},
    {"a": "C", "b": "N", "order": "3", "length": 1.16},
    {"a": "C", "b": "N", "order": "ar", "length": 1.34},
    {"a": "C", "b": "O", "order": "1", "length": 1.43},
    {"a": "C", "b": "O", "order": "2", "length": 1.23},
    {"a": "C", "b": "O", "order": "ar", "length": 1.36},
    {"a": "C", "b": "S", "order": "1", "length": 1.82},
    {"a": "C", "b": "S", "order": "ar", "length": 1.71},
    {"a": "N", "b": "N", "order": "1", "length": 1.45},
    {"a": "N", "b": "N", "order": "ar", "length": 1.35},
    {"a": "N", "b": "O", "order": "1", "length": 1.40},
    {"a": "N", "b": "O", "order": "2", "length": 1.21},
    {"a": "N", "b": "S", "order": "1", "length": 1.63},
    {"a": "O", "b": "S", "order": "2", "length": 1.43},
    {"a": "C", "b": "F", "order": "1", "length": 1.35},
    {"a": "C", "b": "Cl", "order": "1", "length": 1.77},
    {"a": "C", "b": "Br", "order": "1", "length": 1.94},
    {"a": "C", "b": "I", "order": "1", "length": 2.14}
  ]
})json";

struct ForceField {
  double bond_k = 100.0;
  double angle_k = 20.0;
  double nonbonded_k = 5.0;
  double nonbonded_r_min = 3.0;
  int nonbonded_min_separation = 4;  // graph distance, in bonds
  double strain_scale = 0.5;         // e0, surrogate units per heavy atom
  double embed_jitter = 0.1;         // A, standard deviation
  int max_steps = 3000;
  double sp = 180.0, sp2 = 120.0, sp3 = 109.47;  // degrees
  std::array<double, 5> order_scale{0.0, 1.0, 0.87, 0.78, 0.93};  // index 4 = aromatic
  std::map<int, double> radii;
  std::map<std::tuple<int, int, int>, double> lengths;  // (z_low, z_high, order code)

  // Ideal length for a bond between elements za and zb; code 4 = aromatic.
  double ideal_length(int za, int zb, int code) const {
    if (za > zb) std::swap(za, zb);
    if (auto it = lengths.find({za, zb, code}); it != lengths.end()) return it->second;
    auto radius = [&](int z) {
      auto r = radii.find(z);
      return r == radii.end() ? 0.76 : r->second;
    };
    return (radius(za) + radius(zb)) * order_scale[static_cast<std::size_t>(code)];
  }
};

namespace detail {

inline int order_code(const std::string& s) {
  if (s == "ar") return 4;
  if (s == "1" || s == "2" || s == "3") return s[0] - '0';
  throw ParseError("bond order must be 1, 2, 3 or ar, got '" + s + "'");
}

inline int element_z(const std::string& sym) {
  const auto* e = chem::element_by_symbol(sym);
  if (!e) throw ParseError("unknown element '" + sym + "' in force field");
  return e->z;
}

}  // namespace detail

inline ForceField parse_force_field(const nlohmann::json& doc) {
  ForceField ff;
  try {
    ff.bond_k = doc.value("bond_k", ff.bond_k);
    ff.angle_k = doc.value("angle_k", ff.angle_k);
    ff.nonbonded_k = doc.value("nonbonded_k", ff.nonbonded_k);
    ff.nonbonded_r_min = doc.value("nonbonded_r_min", ff.nonbonded_r_min);
    ff.nonbonded_min_separation = doc.value("nonbonded_min_separation", ff.nonbonded_min_separation);
    ff.strain_scale = doc.value("strain_scale", ff.strain_scale);
    ff.embed_jitter = doc.value("embed_jitter", ff.embed_jitter);
    ff.max_steps = doc.value("max_steps", ff.max_steps);
    if (doc.contains("angles_deg")) {
      const auto& a = doc.at("angles_deg");
      ff.sp = a.value("sp", ff.sp);
      ff.sp2 = a.value("sp2", ff.sp2);
      ff.sp3 = a.value("sp3", ff.sp3);
    }
    if (doc.contains("bond_order_scale"))
      for (const auto& [k, v] : doc.at("bond_order_scale").items())
        ff.order_scale[static_cast<std::size_t>(detail::order_code(k))] = v.get<double>();
    if (doc.contains("covalent_radii"))
      for (const auto& [k, v] : doc.at("covalent_radii").items()) ff.radii[detail::element_z(k)] = v.get<double>();
    if (doc.contains("bond_lengths"))
      for (const auto& e : doc.at("bond_lengths")) {
        int za = detail::element_z(e.at("a").get<std::string>());
        int zb = detail::element_z(e.at("b").get<std::string>());
        if (za > zb) std::swap(za, zb);
        ff.lengths[{za, zb, detail::order_code(e.at("order").get<std::string>())}] = e.at("length").get<double>();
      }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("force field: ") + e.what());
  }
  if (ff.bond_k <= 0 || ff.angle_k < 0 || ff.nonbonded_k < 0 || ff.strain_scale <= 0 || ff.max_steps < 0)
    throw ValidationError("force field constants out of range");
  return ff;
}

inline const ForceField& default_force_field() {
  static const ForceField ff = parse_force_field(nlohmann::json::parse(kDefaultForceField));
  return ff;
}

inline ForceField load_force_field(const std::filesystem::path& path) {
  try {
    return parse_force_field(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

struct Conformer {
  std::vector<Vec3> positions;
  double residual_energy = 0.0;
  bool converged = true;
  std::vector<int> elements;  // atomic numbers, parallel to positions

  int heavy_atom_count() const {
    return static_cast<int>(std::count_if(elements.begin(), elements.end(), [](int z) { return z > 1; }));
  }
};

struct BondTerm {
  int i, j;
  double l0;
};

struct AngleTerm {
  int i, j, k;  // j is the vertex
  double theta0;
};

struct EnergyModel {
  int atoms = 0;
  std::vector<BondTerm> bonds;
  std::vector<AngleTerm> angles;
  std::vector<std::pair<int, int>> pairs;
  double bond_k = 0.0, angle_k = 0.0, nonbonded_k = 0.0, r_min = 0.0;
};

namespace detail {

inline double hybrid_angle(const chem::Molecule& m, int j, const ForceField& ff) {
  int doubles = 0;
  bool triple = false;
  for (const auto& n : m.neighbors(j)) {
    const auto& b = m.bond(n.bond);
    if (b.aromatic) continue;
    if (b.order == 3) triple = true;
    if (b.order == 2) ++doubles;
  }
  if (m.degree(j) >= 4) return ff.sp3;
  if (triple || doubles >= 2) return ff.sp;
  if (doubles == 1 || m.atom(j).aromatic) return ff.sp2;
  return ff.sp3;
}

// Smallest ring containing both bonds i-j and j-k, 0 when none does.
inline int shared_ring_size(const chem::Molecule& m, const chem::RingInfo& rings, int bij, int bjk) {
  int best = 0;
  for (const auto& r : rings.bond_rings) {
    const bool a = std::find(r.begin(), r.end(), bij) != r.end();
    const bool b = std::find(r.begin(), r.end(), bjk) != r.end();
    if (a && b && (best == 0 || static_cast<int>(r.size()) < best)) best = static_cast<int>(r.size());
  }
  (void)m;
  return best;
}

inline std::vector<int> graph_distances(const chem::Molecule& m, int from) {
  std::vector<int> d(static_cast<std::size_t>(m.atom_count()), -1);
  std::queue<int> q;
  d[static_cast<std::size_t>(from)] = 0;
  q.push(from);
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    for (const auto& n : m.neighbors(u))
      if (d[static_cast<std::size_t>(n.atom)] < 0) {
        d[static_cast<std::size_t>(n.atom)] = d[static_cast<std::size_t>(u)] + 1;
        q.push(n.atom);
      }
  }
  return d;
}

}  // namespace detail

inline EnergyModel build_energy_model(const chem::Molecule& m, const ForceField& ff = default_force_field()) {
  constexpr double kDeg = std::numbers::pi / 180.0;
  EnergyModel em;
  em.atoms = m.atom_count();
  em.bond_k = ff.bond_k;
  em.angle_k = ff.angle_k;
  em.nonbonded_k = ff.nonbonded_k;
  em.r_min = ff.nonbonded_r_min;
  for (const auto& b : m.bonds()) {
    const int code = b.aromatic || b.order == 0 ? 4 : b.order;
    em.bonds.push_back({b.a, b.b, ff.ideal_length(m.atom(b.a).element, m.atom(b.b).element, code)});
  }
  const auto rings = m.ring_info();
  for (int j = 0; j < m.atom_count(); ++j) {
    const auto& nb = m.neighbors(j);
    const double hyb = detail::hybrid_angle(m, j, ff);
    for (std::size_t x = 0; x < nb.size(); ++x)
      for (std::size_t y = x + 1; y < nb.size(); ++y) {
        double theta0 = hyb;
        if (const int r = detail::shared_ring_size(m, *rings, nb[x].bond, nb[y].bond); r > 0)
          theta0 = std::min(theta0, 180.0 * (r - 2) / r);
        em.angles.push_back({nb[x].atom, j, nb[y].atom, theta0 * kDeg});
      }
  }
  for (int i = 0; i < m.atom_count(); ++i) {
    const auto d = detail::graph_distances(m, i);
    for (int j = i + 1; j < m.atom_count(); ++j) {
      const int dij = d[static_cast<std::size_t>(j)];
      if (dij < 0 || dij >= ff.nonbonded_min_separation) em.pairs.emplace_back(i, j);
    }
  }
  return em;
}

// Surrogate energy; fills grad (same length as x) when given.
inline double energy(const EnergyModel& em, const std::vector<Vec3>& x, std::vector<Vec3>* grad = nullptr) {
  if (x.size() != static_cast<std::size_t>(em.atoms)) throw ValidationError("coordinate count does not match model");
  if (grad) grad->assign(x.size(), Vec3{});
  auto g = [&](int i) -> Vec3& { return (*grad)[static_cast<std::size_t>(i)]; };
  auto p = [&](int i) -> const Vec3& { return x[static_cast<std::size_t>(i)]; };
  double e = 0.0;
  for (const auto& b : em.bonds) {
    const Vec3 d = p(b.i) - p(b.j);
    const double l = norm(d);
    const double dl = l - b.l0;
    e += em.bond_k * dl * dl;
    if (grad && l > 0.0) {
      const Vec3 f = d * (2.0 * em.bond_k * dl / l);
      g(b.i) += f;
      g(b.j) -= f;
    }
  }
  for (const auto& a : em.angles) {
    const Vec3 u = p(a.i) - p(a.j), v = p(a.k) - p(a.j);
    const double lu = norm(u), lv = norm(v);
    if (lu == 0.0 || lv == 0.0) continue;
    const double c = std::clamp(dot(u, v) / (lu * lv), -1.0, 1.0);
    const double theta = std::acos(c);
    const double dt = theta - a.theta0;
    e += em.angle_k * dt * dt;
    if (!grad) continue;
    const double s = std::sin(theta);
    double factor;
    if (s > 1e-8) {
      factor = -2.0 * em.angle_k * dt / s;
    } else if (theta > 1.0 && a.theta0 > std::numbers::pi - 1e-6) {
      factor = 2.0 * em.angle_k;
    } else {
      continue;
    }
    const Vec3 dci = v / (lu * lv) - u * (c / (lu * lu));
    const Vec3 dck = u / (lu * lv) - v * (c / (lv * lv));
    g(a.i) += dci * factor;
    g(a.k) += dck * factor;
    g(a.j) -= (dci + dck) * factor;
  }
  for (const auto& [i, j] : em.pairs) {
    const Vec3 d = p(i) - p(j);
    const double r = norm(d);
    if (r >= em.r_min) continue;
    const double over = em.r_min - r;
    e += em.nonbonded_k * over * over;
    if (grad && r > 0.0) {
      const Vec3 f = d * (-2.0 * em.nonbonded_k * over / r);
      g(i) += f;
      g(j) -= f;
    }
  }
  return e;
}

inline double dot_all(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += dot(a[i], b[i]);
  return s;
}

inline double gradient_norm(const std::vector<Vec3>& g) { return std::sqrt(dot_all(g, g)); }

struct RelaxOptions {
  int max_steps = 3000;
  double gradient_tolerance = 1e-4;
  int max_rejected = 50;
};

// Descent along Polak-Ribiere conjugate-gradient directions (restarted to the
// negative gradient whenever they stop descending) with a backtracking line
// search: a step is accepted only if it lowers the energy. Gives up
// (converged = false) after max_rejected consecutive rejections or when
// max_steps is exhausted above the gradient tolerance.
inline Conformer relax(const EnergyModel& em, Conformer c, const RelaxOptions& opt = {}) {
  const std::size_t n = c.positions.size();
  std::vector<Vec3> g, g_next, d(n), trial(n);
  double e = energy(em, c.positions, &g);
  for (std::size_t i = 0; i < n; ++i) d[i] = -g[i];
  double step = 1e-3;
  int rejected = 0;
  c.converged = false;
  for (int it = 0; it <= opt.max_steps; ++it) {
    if (gradient_norm(g) < opt.gradient_tolerance) {
      c.converged = true;
      break;
    }
    if (it == opt.max_steps) break;
    double slope = 0.0;
    for (std::size_t i = 0; i < n; ++i) slope += dot(g[i], d[i]);
    if (slope >= 0.0) {
      for (std::size_t i = 0; i < n; ++i) d[i] = -g[i];
      slope = -dot_all(g, g);
    }
    for (std::size_t i = 0; i < n; ++i) trial[i] = c.positions[i] + d[i] * step;
    const double e_next = energy(em, trial, &g_next);
    if (e_next < e) {
      const double beta = std::max(0.0, (dot_all(g_next, g_next) - dot_all(g_next, g)) / dot_all(g, g));
      c.positions.swap(trial);
      e = e_next;
      g.swap(g_next);
      for (std::size_t i = 0; i < n; ++i) d[i] = -g[i] + d[i] * beta;
      step *= 1.5;
      rejected = 0;
    } else {
      step *= 0.5;
      if (++rejected >= opt.max_rejected) break;
    }
  }
  c.residual_energy = e;
  return c;
}

inline Conformer relax(const chem::Molecule& m, Conformer c, int max_steps, const ForceField& ff = default_force_field()) {
  RelaxOptions opt;
  opt.max_steps = max_steps;
  return relax(build_energy_model(m, ff), std::move(c), opt);
}

namespace detail {

// Breadth-first placement: each child sits at its ideal bond length, at the
// hybridization angle from the parent bond, spread around it by a seeded
// azimuth.
inline std::vector<Vec3> bfs_layout(const chem::Molecule& m, const EnergyModel& em, const ForceField& ff, Rng& rng) {
  constexpr double kDeg = std::numbers::pi / 180.0;
  const int n = m.atom_count();
  std::vector<Vec3> x(static_cast<std::size_t>(n));
  std::vector<int> parent(static_cast<std::size_t>(n), -2);
  std::map<std::pair<int, int>, double> l0;
  for (const auto& b : em.bonds) l0[{std::min(b.i, b.j), std::max(b.i, b.j)}] = b.l0;
  auto random_unit = [&] {
    for (;;) {
      const Vec3 v{normal(rng), normal(rng), normal(rng)};
      if (const double l = norm(v); l > 1e-6) return v / l;
    }
  };
  double offset = 0.0;
  for (int root = 0; root < n; ++root) {
    if (parent[static_cast<std::size_t>(root)] != -2) continue;
    parent[static_cast<std::size_t>(root)] = -1;
    x[static_cast<std::size_t>(root)] = {offset, 0.0, 0.0};
    std::queue<int> q;
    q.push(root);
    double reach = 0.0;
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      std::vector<int> kids;
      for (const auto& nb : m.neighbors(u))
        if (parent[static_cast<std::size_t>(nb.atom)] == -2) kids.push_back(nb.atom);
      if (kids.empty()) continue;
      const int pu = parent[static_cast<std::size_t>(u)];
      const Vec3 d = pu >= 0 ? (x[static_cast<std::size_t>(u)] - x[static_cast<std::size_t>(pu)]) /
                                   distance(x[static_cast<std::size_t>(u)], x[static_cast<std::size_t>(pu)])
                             : random_unit();
      const double theta = hybrid_angle(m, u, ff) * kDeg;
      Vec3 q0 = cross(d, smallest_axis(d));
      q0 = q0 / norm(q0);
      const double phi0 = uniform01(rng) * 2.0 * std::numbers::pi;
      for (std::size_t k = 0; k < kids.size(); ++k) {
        Vec3 dir;
        if (pu < 0 && k == 0) {
          dir = d;
        } else {
          const std::size_t slots = pu < 0 ? kids.size() - 1 : kids.size();
          const std::size_t slot = pu < 0 ? k - 1 : k;
          const double phi = phi0 + 2.0 * std::numbers::pi * static_cast<double>(slot) / static_cast<double>(slots);
          const Vec3 perp = axis_angle(d, phi) * q0;
          const double off = pu < 0 ? theta : std::numbers::pi - theta;
          dir = d * std::cos(off) + perp * std::sin(off);
        }
        const int v = kids[k];
        parent[static_cast<std::size_t>(v)] = u;
        const double len = l0.at({std::min(u, v), std::max(u, v)});
        x[static_cast<std::size_t>(v)] = x[static_cast<std::size_t>(u)] + dir * len;
        reach = std::max(reach, x[static_cast<std::size_t>(v)].x);
        q.push(v);
      }
    }
    offset = std::max(offset, reach) + ff.nonbonded_r_min + 1.0;
  }
  for (auto& p : x) p += Vec3{normal(rng, 0.0, ff.embed_jitter), normal(rng, 0.0, ff.embed_jitter), normal(rng, 0.0, ff.embed_jitter)};
  return x;
}

}  // namespace detail

inline Conformer embed3d(const chem::Molecule& m, std::uint64_t seed, const ForceField& ff = default_force_field()) {
  if (m.atom_count() < 1) throw ValidationError("cannot embed an empty molecule");
  Conformer c;
  for (const auto& a : m.atoms()) c.elements.push_back(a.element);
  if (m.atom_count() == 1) {
    c.positions = {Vec3{}};
    return c;
  }
  const EnergyModel em = build_energy_model(m, ff);
  Rng rng(seed);
  c.positions = detail::bfs_layout(m, em, ff, rng);
  RelaxOptions opt;
  opt.max_steps = ff.max_steps;
  return relax(em, std::move(c), opt);
}

inline double strain_penalty(const Conformer& c, double e0 = default_force_field().strain_scale) {
  const int heavy = c.heavy_atom_count();
  if (heavy == 0 || c.residual_energy <= 0.0) return 0.0;
  const double e = c.residual_energy / heavy;
  return e / (e + e0);
}

namespace detail {

inline Vec3 center_of_mass(const Conformer& c) {
  Vec3 s;
  double w = 0.0;
  for (std::size_t i = 0; i < c.positions.size(); ++i) {
    const auto* e = chem::element_by_z(i < c.elements.size() ? c.elements[i] : 6);
    const double mass = e ? e->mass : 0.0;
    s += c.positions[i] * mass;
    w += mass;
  }
  if (w > 0.0) return s / w;
  for (const auto& p : c.positions) s += p;
  return s / static_cast<double>(c.positions.size());
}

}  // namespace detail

// Rigidly moves the conformer so its centre of mass sits on pocket_center and
// its principal axis (centre of mass to farthest atom, lowest index on ties)
// points toward hotspot. A hotspot at the pocket centre gives a pure translation.
inline Conformer align_fragment(Conformer c, const Vec3& hotspot, const Vec3& pocket_center) {
  if (c.positions.size() < 2) throw ValidationError("alignment needs at least two atoms");
  const Vec3 com = detail::center_of_mass(c);
  std::size_t far = 0;
  double best = -1.0;
  for (std::size_t i = 0; i < c.positions.size(); ++i)
    if (const double d = distance(c.positions[i], com); d > best) {
      best = d;
      far = i;
    }
  if (best <= 1e-12) throw ValidationError("all atoms coincide; principal axis undefined");
  const Vec3 target = hotspot - pocket_center;
  const Mat3 r = norm(target) > 0.0 ? rodrigues_rotation(c.positions[far] - com, target) : Mat3::identity();
  for (auto& p : c.positions) p = r * (p - com) + pocket_center;
  return c;
}

inline double fit_score(double f_inside, double mean_hotspot_distance) {
  return 0.6 * f_inside + 0.4 * (1.0 - mean_hotspot_distance / (mean_hotspot_distance + 4.0));
}

inline double pocket_fit(const Conformer& c, const structure::HotspotSet& hs) {
  if (hs.centroids.empty()) throw ValidationError("hotspot set has no centroids");
  int heavy = 0, inside = 0;
  double dsum = 0.0;
  for (std::size_t i = 0; i < c.positions.size(); ++i) {
    if (i < c.elements.size() && c.elements[i] <= 1) continue;
    ++heavy;
    if (distance(c.positions[i], hs.pocket_center) <= hs.pocket_radius) ++inside;
    double dmin = std::numeric_limits<double>::infinity();
    for (const auto& h : hs.centroids) dmin = std::min(dmin, distance(c.positions[i], h));
    dsum += dmin;
  }
  if (heavy == 0) return 0.0;
  return fit_score(static_cast<double>(inside) / heavy, dsum / heavy);
}

inline std::string conformer_to_pdb(const chem::Molecule& m, const Conformer& c, const std::string& res_name = "LIG") {
  if (c.positions.size() != static_cast<std::size_t>(m.atom_count())) throw ValidationError("conformer does not match molecule");
  structure::ModelStructure s;
  std::map<int, int> seen;
  for (int i = 0; i < m.atom_count(); ++i) {
    structure::PdbAtom a;
    a.hetatm = true;
    a.serial = i + 1;
    const std::string sym = m.atom(i).is_dummy() ? "R" : std::string(chem::symbol_of(m.atom(i).element));
    a.name = sym + std::to_string(++seen[m.atom(i).element]);
    a.res_name = res_name;
    a.chain = 'A';
    a.res_seq = 1;
    a.position = c.positions[static_cast<std::size_t>(i)];
    a.element = sym;
    s.atoms.push_back(a);
  }
  return structure::write_pdb(s);
}

inline std::string conformer_to_sdf(const chem::Molecule& m, const Conformer& c, const std::string& title = "") {
  return chem::write_sdf_record(m, c.positions, title);
}

}  // namespace lforge::conformer
