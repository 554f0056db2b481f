#pragma once

// MDL SDF V2000 writer: header, counts line, atom block, bond block, no properties.

#include <cstdio>
#include <string>
#include <vector>

#include "lforge/chem/elements.hpp"
#include "lforge/chem/molecule.hpp"
#include "lforge/core/error.hpp"
#include "lforge/geom/vec3.hpp"

namespace lforge::chem {

namespace detail {

inline int sdf_charge_code(int charge) {
  switch (charge) {
    case 3: return 1;
    case 2: return 2;
    case 1: return 3;
    case -1: return 5;
    case -2: return 6;
    case -3: return 7;
    default: return 0;
  }
}

}  // namespace detail

// Kekulé bond orders are written; aromatic flags alone are never emitted.
inline std::string write_sdf_block(const Molecule& m, const std::vector<Vec3>& xyz, const std::string& title = "") {
  if (xyz.size() != static_cast<std::size_t>(m.atom_count())) throw ValidationError("coordinate count does not match atom count");
  if (m.atom_count() > 999 || m.bond_count() > 999) throw ValidationError("V2000 limited to 999 atoms and bonds");
  std::string out = title + "\n  lforge\n\n";
  char buf[128];
  std::snprintf(buf, sizeof buf, "%3d%3d  0  0  0  0  0  0  0  0999 V2000\n", m.atom_count(), m.bond_count());
  out += buf;
  for (int i = 0; i < m.atom_count(); ++i) {
    const auto& a = m.atom(i);
    const auto& p = xyz[static_cast<std::size_t>(i)];
    const std::string sym = a.is_dummy() ? "R#" : std::string(symbol_of(a.element));
    std::snprintf(buf, sizeof buf, "%10.4f%10.4f%10.4f %-3s 0%3d  0  0  0  0  0  0  0  0  0  0\n", p.x, p.y, p.z,
                  sym.c_str(), detail::sdf_charge_code(a.charge));
    out += buf;
  }
  for (const auto& b : m.bonds()) {
    std::snprintf(buf, sizeof buf, "%3d%3d%3d  0\n", b.a + 1, b.b + 1, b.order == 0 ? 4 : b.order);
    out += buf;
  }
  out += "M  END\n";
  return out;
}

inline std::string write_sdf_record(const Molecule& m, const std::vector<Vec3>& xyz, const std::string& title = "") {
  return write_sdf_block(m, xyz, title) + "$$$$\n";
}

}  // namespace lforge::chem
