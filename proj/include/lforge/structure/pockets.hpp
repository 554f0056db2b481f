#pragma once

// Pocket descriptors, composite druggability scoring and k-means hotspots.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "lforge/core/error.hpp"
#include "lforge/core/random.hpp"
#include "lforge/core/table.hpp"
#include "lforge/geom/vec3.hpp"

namespace lforge::structure {

struct PocketDescriptor {
  std::string id;
  double volume = 0.0;          // A^3
  double depth = 0.0;           // A
  double enclosure = 0.0;       // fraction in [0, 1]
  double hydrophobicity = 0.0;  // fraction in [0, 1]
  double aromaticity = 0.0;
  int donors = 0;
  int acceptors = 0;
  std::vector<Vec3> atom_coords;
  double raw_score = 0.0;
  double norm_score = 0.0;
};

struct HotspotSet {
  Vec3 pocket_center;
  double pocket_radius = 0.0;
  std::vector<Vec3> centroids;
};

namespace detail {

inline double number_field(const nlohmann::json& p, const char* key, std::size_t index) {
  const std::string where = "pockets[" + std::to_string(index) + "]." + key;
  if (!p.contains(key)) throw ParseError("missing field " + where);
  const auto& v = p.at(key);
  if (!v.is_number()) throw ParseError("field " + where + " must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ParseError("field " + where + " must be finite");
  return d;
}

inline int count_field(const nlohmann::json& p, const char* key, std::size_t index) {
  const std::string where = "pockets[" + std::to_string(index) + "]." + key;
  if (!p.contains(key)) throw ParseError("missing field " + where);
  const auto& v = p.at(key);
  if (!v.is_number_integer() && !(v.is_number() && std::floor(v.get<double>()) == v.get<double>()))
    throw ParseError("field " + where + " must be an integer");
  const double d = v.get<double>();
  if (d < 0) throw ValidationError("field " + where + " must be non-negative");
  return static_cast<int>(d);
}

}  // namespace detail

inline std::vector<PocketDescriptor> parse_pockets(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("pockets") || !doc.at("pockets").is_array())
    throw ParseError("pocket file must be an object with a 'pockets' array");
  std::vector<PocketDescriptor> out;
  const auto& arr = doc.at("pockets");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto& p = arr[i];
    if (!p.is_object()) throw ParseError("pockets[" + std::to_string(i) + "] must be an object");
    PocketDescriptor d;
    if (!p.contains("id") || !p.at("id").is_string()) throw ParseError("field pockets[" + std::to_string(i) + "].id must be a string");
    d.id = p.at("id").get<std::string>();
    d.volume = detail::number_field(p, "volume", i);
    d.depth = detail::number_field(p, "depth", i);
    d.enclosure = detail::number_field(p, "enclosure", i);
    d.hydrophobicity = detail::number_field(p, "hydrophobicity", i);
    d.aromaticity = detail::number_field(p, "aromaticity", i);
    d.donors = detail::count_field(p, "donors", i);
    d.acceptors = detail::count_field(p, "acceptors", i);
    const std::string where = "pockets[" + std::to_string(i) + "]";
    if (d.volume < 0.0 || d.depth < 0.0) throw ValidationError(where + ": volume and depth must be non-negative");
    if (d.enclosure < 0.0 || d.enclosure > 1.0) throw ValidationError(where + ".enclosure must be a fraction in [0, 1]");
    if (d.hydrophobicity < 0.0 || d.hydrophobicity > 1.0)
      throw ValidationError(where + ".hydrophobicity must be a fraction in [0, 1]");
    if (p.contains("atoms")) {
      const auto& atoms = p.at("atoms");
      if (!atoms.is_array()) throw ParseError("field " + where + ".atoms must be an array");
      for (std::size_t k = 0; k < atoms.size(); ++k) {
        const auto& xyz = atoms[k];
        if (!xyz.is_array() || xyz.size() != 3 || !xyz[0].is_number() || !xyz[1].is_number() || !xyz[2].is_number())
          throw ParseError("field " + where + ".atoms[" + std::to_string(k) + "] must be [x, y, z]");
        d.atom_coords.push_back({xyz[0].get<double>(), xyz[1].get<double>(), xyz[2].get<double>()});
      }
    }
    out.push_back(std::move(d));
  }
  return out;
}

inline std::vector<PocketDescriptor> load_pockets(const std::filesystem::path& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return parse_pockets(doc);
}

inline nlohmann::json pockets_to_json(const std::vector<PocketDescriptor>& ps) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& p : ps) {
    nlohmann::json atoms = nlohmann::json::array();
    for (const auto& a : p.atom_coords) atoms.push_back({a.x, a.y, a.z});
    arr.push_back({{"id", p.id},
                   {"volume", p.volume},
                   {"depth", p.depth},
                   {"enclosure", p.enclosure},
                   {"hydrophobicity", p.hydrophobicity},
                   {"aromaticity", p.aromaticity},
                   {"donors", p.donors},
                   {"acceptors", p.acceptors},
                   {"atoms", atoms}});
  }
  return {{"pockets", arr}};
}

// Composite druggability score. Enclosure and hydrophobicity are fractions and
// enter scaled by 100.
inline double composite_score(const PocketDescriptor& p) {
  return 0.3 * p.volume + 0.2 * p.depth + 0.2 * p.enclosure * 100.0 + 0.1 * p.hydrophobicity * 100.0 +
         0.1 * p.aromaticity + 0.1 * (p.donors + p.acceptors);
}

// Scores, min-max normalizes over the whole set (a single pocket, or a set with
// identical scores, normalizes to 1), sorts descending and keeps top_k.
inline std::vector<PocketDescriptor> score_pockets(std::vector<PocketDescriptor> ps, std::size_t top_k = 3) {
  if (ps.empty()) throw ValidationError("score_pockets needs at least one pocket");
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (auto& p : ps) {
    p.raw_score = composite_score(p);
    lo = std::min(lo, p.raw_score);
    hi = std::max(hi, p.raw_score);
  }
  for (auto& p : ps) p.norm_score = hi > lo ? (p.raw_score - lo) / (hi - lo) : 1.0;
  std::stable_sort(ps.begin(), ps.end(), [](const auto& a, const auto& b) { return a.raw_score > b.raw_score; });
  if (ps.size() > top_k) ps.resize(top_k);
  return ps;
}

inline constexpr int kKmeansMaxIterations = 300;
inline constexpr double kKmeansShiftTolerance = 1e-6;

inline double squared_distance(const Vec3& a, const Vec3& b) { return dot(a - b, a - b); }

struct KmeansTrace {
  std::vector<double> objective;  // within-cluster sum of squares after each assignment
  int iterations = 0;
};

// Lloyd's algorithm with k-means++ seeding. An empty cluster is reseeded with
// the point farthest from its assigned centroid (lowest index on ties).
// pocket_radius_override > 0 replaces the max center-to-atom distance.
inline HotspotSet kmeans_hotspots(const std::vector<Vec3>& coords, std::size_t k, std::uint64_t seed,
                                  double pocket_radius_override = 0.0, KmeansTrace* trace = nullptr) {
  if (k < 1) throw ValidationError("k must be >= 1");
  if (coords.size() < k) throw ValidationError("kmeans_hotspots needs at least k points");
  HotspotSet hs;
  for (const auto& c : coords) hs.pocket_center += c;
  hs.pocket_center = hs.pocket_center / static_cast<double>(coords.size());
  for (const auto& c : coords) hs.pocket_radius = std::max(hs.pocket_radius, distance(c, hs.pocket_center));
  if (pocket_radius_override > 0.0) hs.pocket_radius = pocket_radius_override;

  Rng rng(seed);
  const std::size_t n = coords.size();
  std::vector<Vec3> centers;
  centers.push_back(coords[uniform_index(rng, n)]);
  std::vector<double> d2(n);
  while (centers.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : centers) best = std::min(best, squared_distance(coords[i], c));
      d2[i] = best;
      total += best;
    }
    std::size_t pick = 0;
    if (total <= 0.0) {
      // All remaining points coincide with a center; take the first unused index.
      pick = centers.size() % n;
    } else {
      const double target = uniform01(rng) * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (d2[i] <= 0.0) continue;
        pick = i;
        acc += d2[i];
        if (acc > target) break;
      }
    }
    centers.push_back(coords[pick]);
  }

  std::vector<std::size_t> assign(n, 0);
  KmeansTrace tr;
  for (tr.iterations = 1; tr.iterations <= kKmeansMaxIterations; ++tr.iterations) {
    double wcss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double bd = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double dd = squared_distance(coords[i], centers[c]);
        if (dd < bd) {
          bd = dd;
          best = c;
        }
      }
      assign[i] = best;
      wcss += bd;
    }
    tr.objective.push_back(wcss);

    std::vector<Vec3> sums(k);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sums[assign[i]] += coords[i];
      ++counts[assign[i]];
    }
    double shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      Vec3 next;
      if (counts[c] == 0) {
        std::size_t far = 0;
        double fd = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double dd = squared_distance(coords[i], centers[assign[i]]);
          if (dd > fd) {
            fd = dd;
            far = i;
          }
        }
        next = coords[far];
      } else {
        next = sums[c] / static_cast<double>(counts[c]);
      }
      shift = std::max(shift, distance(next, centers[c]));
      centers[c] = next;
    }
    if (shift < kKmeansShiftTolerance) break;
  }
  if (trace) *trace = std::move(tr);
  hs.centroids = std::move(centers);
  return hs;
}

inline nlohmann::json hotspots_to_json(const HotspotSet& hs) {
  nlohmann::json cents = nlohmann::json::array();
  for (const auto& c : hs.centroids) cents.push_back({c.x, c.y, c.z});
  return {{"center", {hs.pocket_center.x, hs.pocket_center.y, hs.pocket_center.z}},
          {"radius", hs.pocket_radius},
          {"centroids", cents}};
}

inline HotspotSet hotspots_from_json(const nlohmann::json& j) {
  auto vec = [](const nlohmann::json& a) {
    if (!a.is_array() || a.size() != 3) throw ParseError("hotspot point must be [x, y, z]");
    return Vec3{a[0].get<double>(), a[1].get<double>(), a[2].get<double>()};
  };
  HotspotSet hs;
  if (!j.contains("center") || !j.contains("radius") || !j.contains("centroids"))
    throw ParseError("hotspot entry needs center, radius and centroids");
  hs.pocket_center = vec(j.at("center"));
  hs.pocket_radius = j.at("radius").get<double>();
  for (const auto& c : j.at("centroids")) hs.centroids.push_back(vec(c));
  if (hs.centroids.empty()) throw ParseError("hotspot entry has no centroids");
  return hs;
}

}  // namespace lforge::structure
