// Copyright 2026 The molcl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "molcl/chem/elements.hpp"
#include "molcl/error.hpp"

namespace molcl::chem {

enum class Chirality : std::uint8_t { Unspecified, CW, CCW, Other };
enum class Hybridization : std::uint8_t { SP, SP2, SP3, SP3D, SP3D2, Other };
enum class BondOrder : std::uint8_t { Single, Double, Triple, Aromatic };
enum class BondDirection : std::uint8_t { None, EndUpRight, EndDownRight };
enum class BondStereo : std::uint8_t { None, Any, Z, E, Cis, Trans };

/// Neighbour slot standing for the implicit/bracket hydrogen in a chiral
/// atom's neighbour ordering.
inline constexpr int kImplicitHydrogen = -1;

struct Atom {
  int atomic_number = 6;
  int formal_charge = 0;
  std::optional<int> explicit_h;  // set for bracket atoms only
  bool aromatic = false;
  Chirality chirality = Chirality::Unspecified;

  // derived
  int implicit_h = 0;
  int degree = 0;
  bool in_ring = false;
  Hybridization hybridization = Hybridization::Other;

  bool bracket = false;
  // Neighbour order in which the chirality tag was written; entries are atom
  // indices or kImplicitHydrogen.
  std::vector<int> stereo_neighbors;

  int total_h() const { return explicit_h.value_or(0) + implicit_h; }
};

struct Bond {
  int a = 0;
  int b = 0;
  BondOrder order = BondOrder::Single;
  // Relative to the a -> b orientation.
  BondDirection direction = BondDirection::None;
  BondStereo stereo = BondStereo::None;
  bool in_ring = false;
  // true when the bond symbol was omitted in the input
  bool implicit_order = true;

  int other(int atom) const { return atom == a ? b : a; }
};

struct Neighbor {
  int atom;
  int bond;
};

struct MolGraph {
  std::vector<Atom> atoms;
  std::vector<Bond> bonds;
  // Smallest set of smallest rings; each ring lists atom indices in cycle order.
  std::vector<std::vector<int>> rings;
  std::string source_smiles;
  std::vector<std::vector<Neighbor>> adjacency;

  int num_atoms() const { return static_cast<int>(atoms.size()); }
  int num_bonds() const { return static_cast<int>(bonds.size()); }

  std::span<const Neighbor> neighbors(int atom) const { return adjacency[atom]; }

  /// Bond index between two atoms, or -1.
  int bond_between(int u, int v) const {
    for (const Neighbor& n : adjacency[u]) {
      if (n.atom == v) return n.bond;
    }
    return -1;
  }

  void rebuild_adjacency() {
    adjacency.assign(atoms.size(), {});
    for (int i = 0; i < num_bonds(); ++i) {
      adjacency[bonds[i].a].push_back({bonds[i].b, i});
      adjacency[bonds[i].b].push_back({bonds[i].a, i});
    }
  }
};

/// Twice the bond valence contribution, so aromatic bonds stay integral.
constexpr int bond_valence_x2(BondOrder order) {
  switch (order) {
    case BondOrder::Single: return 2;
    case BondOrder::Double: return 4;
    case BondOrder::Triple: return 6;
    case BondOrder::Aromatic: return 3;
  }
  return 2;
}

/// Bond valence with aromatic bonds counted as 1.5 and the total floored.
inline int bond_valence(std::span<const BondOrder> orders) {
  int twice = 0;
  for (BondOrder o : orders) twice += bond_valence_x2(o);
  return twice / 2;
}

/// Implicit hydrogen count for an atom given its incident bond orders.
///
/// Bracket atoms (explicit H given) never receive implicit hydrogens. Other
/// atoms are filled up to the smallest allowed valence that accommodates
/// their bonds. Aromatic atoms are filled against their lowest valence only,
/// and may exceed their largest valence by one (a ring atom donating a lone
/// pair, e.g. furan oxygen) before a ValenceViolation is raised.
inline int assign_hydrogens(const Atom& atom, std::span<const BondOrder> orders) {
  const int used = bond_valence(orders) + atom.explicit_h.value_or(0);
  const auto valences = default_valences(atom.atomic_number, atom.formal_charge);
  if (valences.empty()) return 0;
  const int max_valence = valences.back() + (atom.aromatic ? 1 : 0);
  if (used > max_valence) {
    throw Error(Errc::ValenceViolation,
                std::string(element_symbol(atom.atomic_number)) + " with bond valence " +
                    std::to_string(used) + " exceeds " + std::to_string(max_valence));
  }
  if (atom.explicit_h.has_value()) return 0;
  if (atom.aromatic) return std::max(0, valences.front() - used);
  for (int v : valences) {
    if (v >= used) return v - used;
  }
  return 0;
}

/// Heuristic hybridisation from local bonding (no orbital model).
inline Hybridization infer_hybridization(const Atom& atom, std::span<const BondOrder> orders) {
  const int neighbors = atom.degree + atom.total_h();
  if (atom.atomic_number == 15 || atom.atomic_number == 16) {
    if (neighbors == 5) return Hybridization::SP3D;
    if (neighbors == 6) return Hybridization::SP3D2;
  }
  if (neighbors == 0) return Hybridization::Other;
  int doubles = 0, triples = 0, aromatics = 0;
  for (BondOrder o : orders) {
    doubles += o == BondOrder::Double;
    triples += o == BondOrder::Triple;
    aromatics += o == BondOrder::Aromatic;
  }
  if (triples > 0 || doubles >= 2) return Hybridization::SP;
  if (doubles == 1 || aromatics > 0 || atom.aromatic) return Hybridization::SP2;
  return Hybridization::SP3;
}

}  // namespace molcl::chem
