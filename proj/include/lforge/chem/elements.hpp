#pragma once

#include <array>
#include <optional>
#include <span>
#include <string_view>

namespace lforge::chem {

struct ElementInfo {
  int z;
  std::string_view symbol;
  double mass;                  // standard atomic weight, g/mol
  std::array<int, 3> valences;  // allowed neutral valences, ascending, 0-padded
};

// Supported elements. Z = 0 is the attachment-point dummy atom '*'.
inline constexpr std::array<ElementInfo, 14> kElements{{
    {0, "*", 0.0, {0, 0, 0}},
    {1, "H", 1.008, {1, 0, 0}},
    {5, "B", 10.81, {3, 0, 0}},
    {6, "C", 12.011, {4, 0, 0}},
    {7, "N", 14.007, {3, 0, 0}},
    {8, "O", 15.999, {2, 0, 0}},
    {9, "F", 18.998, {1, 0, 0}},
    {14, "Si", 28.085, {4, 0, 0}},
    {15, "P", 30.974, {3, 5, 0}},
    {16, "S", 32.06, {2, 4, 6}},
    {17, "Cl", 35.45, {1, 0, 0}},
    {34, "Se", 78.971, {2, 4, 6}},
    {35, "Br", 79.904, {1, 0, 0}},
    {53, "I", 126.904, {1, 0, 0}},
}};

inline constexpr double kHydrogenMass = 1.008;

inline const ElementInfo* element_by_z(int z) {
  for (const auto& e : kElements)
    if (e.z == z) return &e;
  return nullptr;
}

inline const ElementInfo* element_by_symbol(std::string_view sym) {
  for (const auto& e : kElements)
    if (e.symbol == sym) return &e;
  return nullptr;
}

inline std::string_view symbol_of(int z) {
  const auto* e = element_by_z(z);
  return e ? e->symbol : std::string_view("?");
}

// Elements allowed without brackets in SMILES.
inline bool organic_subset(int z) {
  switch (z) {
    case 5: case 6: case 7: case 8: case 9: case 15: case 16: case 17: case 35: case 53:
      return true;
    default:
      return false;
  }
}

// Elements that may be written as lowercase aromatic atoms.
inline bool aromatic_capable(int z) {
  switch (z) {
    case 5: case 6: case 7: case 8: case 15: case 16: case 34:
      return true;
    default:
      return false;
  }
}

// Allowed valences of an ion use those of the isoelectronic neutral element in
// the same period: N+ behaves like C (4), O+ like N (3), O- like F (1), C- like N (3).
inline std::span<const int> allowed_valences(int z, int charge) {
  if (z == 0) return {};
  const auto period = [](int q) { return q <= 2 ? 1 : q <= 10 ? 2 : q <= 18 ? 3 : q <= 36 ? 4 : 5; };
  const int pseudo = z - charge;
  if (pseudo <= 0 || period(pseudo) != period(z)) return {};
  const auto* e = element_by_z(pseudo);
  if (!e) return {};
  std::size_t n = 0;
  while (n < e->valences.size() && e->valences[n] != 0) ++n;
  return {e->valences.data(), n};
}

inline std::optional<int> max_valence(int z, int charge) {
  auto v = allowed_valences(z, charge);
  if (v.empty()) return std::nullopt;
  return v.back();
}

inline std::optional<int> min_valence(int z, int charge) {
  auto v = allowed_valences(z, charge);
  if (v.empty()) return std::nullopt;
  return v.front();
}

}  // namespace lforge::chem
