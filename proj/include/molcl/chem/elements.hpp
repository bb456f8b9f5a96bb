// Copyright 2026 The molcl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <span>
#include <string_view>

namespace molcl::chem {

inline constexpr int kMaxAtomicNumber = 118;

inline constexpr std::array<std::string_view, kMaxAtomicNumber + 1> kElementSymbols = {
    "*",  "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne", "Na", "Mg", "Al", "Si",
    "P",  "S",  "Cl", "Ar", "K",  "Ca", "Sc", "Ti", "V",  "Cr", "Mn", "Fe", "Co", "Ni", "Cu",
    "Zn", "Ga", "Ge", "As", "Se", "Br", "Kr", "Rb", "Sr", "Y",  "Zr", "Nb", "Mo", "Tc", "Ru",
    "Rh", "Pd", "Ag", "Cd", "In", "Sn", "Sb", "Te", "I",  "Xe", "Cs", "Ba", "La", "Ce", "Pr",
    "Nd", "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf", "Ta", "W",
    "Re", "Os", "Ir", "Pt", "Au", "Hg", "Tl", "Pb", "Bi", "Po", "At", "Rn", "Fr", "Ra", "Ac",
    "Th", "Pa", "U",  "Np", "Pu", "Am", "Cm", "Bk", "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf",
    "Db", "Sg", "Bh", "Hs", "Mt", "Ds", "Rg", "Cn", "Nh", "Fl", "Mc", "Lv", "Ts", "Og"};

/// Atomic number for an element symbol (case-sensitive), or 0 if unknown.
constexpr int atomic_number_of(std::string_view symbol) {
  for (int z = 1; z <= kMaxAtomicNumber; ++z) {
    if (kElementSymbols[z] == symbol) return z;
  }
  return 0;
}

constexpr std::string_view element_symbol(int z) {
  return (z >= 1 && z <= kMaxAtomicNumber) ? kElementSymbols[z] : std::string_view{"*"};
}

/// Elements allowed outside brackets in SMILES.
constexpr bool in_organic_subset(int z) {
  switch (z) {
    case 5: case 6: case 7: case 8: case 9: case 15: case 16: case 17: case 35: case 53:
      return true;
    default:
      return false;
  }
}

/// Elements that may be written as lowercase aromatic symbols.
constexpr bool can_be_aromatic(int z) {
  switch (z) {
    case 5: case 6: case 7: case 8: case 15: case 16: case 33: case 34:
      return true;
    default:
      return false;
  }
}

// Allowed valences of the main-group elements we check, ascending.
namespace detail {
inline constexpr std::array<int, 1> kV1 = {1};
inline constexpr std::array<int, 1> kV2 = {2};
inline constexpr std::array<int, 1> kV3 = {3};
inline constexpr std::array<int, 1> kV4 = {4};
inline constexpr std::array<int, 2> kV35 = {3, 5};
inline constexpr std::array<int, 3> kV246 = {2, 4, 6};
inline constexpr std::array<int, 4> kV1357 = {1, 3, 5, 7};
}  // namespace detail

/// Valence list for an element, or an empty span if the element is not
/// valence-checked (metals, noble gases, ...).
constexpr std::span<const int> neutral_valences(int z) {
  switch (z) {
    case 1: return detail::kV1;
    case 5: return detail::kV3;
    case 6: case 14: return detail::kV4;
    case 7: return detail::kV35;
    case 8: return detail::kV2;
    case 9: return detail::kV1;
    case 15: case 33: return detail::kV35;
    case 16: case 34: return detail::kV246;
    case 17: case 35: case 53: return detail::kV1357;
    default: return {};
  }
}

/// Valences for a possibly charged atom, using the isoelectronic neighbour in
/// the same period (N+ behaves like C, O- like F, C- like N, B- like C).
/// Elements outside the checked set yield an empty span.
constexpr std::span<const int> default_valences(int z, int charge) {
  if (charge == 0) return neutral_valences(z);
  switch (z) {
    case 5:   // B: B- -> 4, B+ -> 2
      if (charge == -1) return detail::kV4;
      if (charge == 1) return detail::kV2;
      return {};
    case 6:   // C+ and C- carry three bonds
      if (charge == 1 || charge == -1) return detail::kV3;
      return {};
    case 7:
      if (charge == 1) return detail::kV4;
      if (charge == -1) return detail::kV2;
      return {};
    case 8:
      if (charge == 1) return detail::kV3;
      if (charge == -1) return detail::kV1;
      return {};
    case 15: case 33:
      if (charge == 1) return detail::kV4;
      if (charge == -1) return detail::kV2;
      return {};
    case 16: case 34:
      if (charge == 1) return detail::kV35;
      if (charge == -1) return detail::kV1357;
      return {};
    default:
      return {};
  }
}

}  // namespace molcl::chem
