// Copyright 2026 The molcl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "molcl/chem/mol_graph.hpp"
#include "molcl/error.hpp"

namespace molcl::chem {

enum class FeatureSet { Original, Extended };

inline std::string_view feature_set_name(FeatureSet fs) {
  return fs == FeatureSet::Original ? "original" : "extended";
}

inline FeatureSet parse_feature_set(std::string_view name) {
  if (name == "original") return FeatureSet::Original;
  if (name == "extended") return FeatureSet::Extended;
  throw Error(Errc::Config, "unknown feature set '" + std::string(name) + "'");
}

// Code 0 is the reserved mask code of every feature; values start at 1.
// For `atomic` the code is the atomic number itself.
inline constexpr int kMaskCode = 0;

enum NodeFeature : int { kAtomic, kChirality, kDegree, kCharge, kHybridization, kAromatic, kHydrogen };
enum EdgeFeature : int { kBondType, kBondDir, kStereo };

// Vocabulary sizes including the mask code.
inline constexpr std::array<int, 7> kNodeVocab = {120, 5, 12, 12, 7, 3, 7};
inline constexpr std::array<int, 3> kEdgeVocab = {5, 4, 7};

inline constexpr int num_node_features(FeatureSet fs) { return fs == FeatureSet::Original ? 2 : 7; }
inline constexpr int num_edge_features(FeatureSet fs) { return fs == FeatureSet::Original ? 2 : 3; }

inline std::vector<int> node_vocab_sizes(FeatureSet fs) {
  return {kNodeVocab.begin(), kNodeVocab.begin() + num_node_features(fs)};
}
inline std::vector<int> edge_vocab_sizes(FeatureSet fs) {
  return {kEdgeVocab.begin(), kEdgeVocab.begin() + num_edge_features(fs)};
}

/// Integer-coded graph ready for the encoder. Codes are stored row-major:
/// node_codes[atom * n_node_features + feature], edge_codes likewise per arc.
struct FeaturizedGraph {
  FeatureSet feature_set = FeatureSet::Original;
  int n_atoms = 0;
  int n_arcs = 0;
  int n_bonds = 0;  // bonds of the source molecule, deleted or not
  int n_node_features = 0;
  int n_edge_features = 0;
  std::vector<int> node_codes;
  std::vector<int> edge_codes;
  std::vector<int> arc_src;
  std::vector<int> arc_dst;
  std::vector<int> arc_bond;  // originating bond index of each arc
  std::vector<char> masked;

  std::span<const int> node(int atom) const {
    return {node_codes.data() + static_cast<std::size_t>(atom) * n_node_features,
            static_cast<std::size_t>(n_node_features)};
  }
  std::span<const int> edge(int arc) const {
    return {edge_codes.data() + static_cast<std::size_t>(arc) * n_edge_features,
            static_cast<std::size_t>(n_edge_features)};
  }

  friend bool operator==(const FeaturizedGraph&, const FeaturizedGraph&) = default;
};

namespace detail {

inline int checked(int value, int lo, int hi, const char* what) {
  if (value < lo || value > hi) {
    throw Error(Errc::FeatureOutOfRange, std::string(what) + " value " + std::to_string(value) +
                                             " outside " + std::to_string(lo) + ".." +
                                             std::to_string(hi));
  }
  return value;
}

}  // namespace detail

inline int chirality_code(Chirality c) { return 1 + static_cast<int>(c); }
inline int bond_type_code(BondOrder o) { return 1 + static_cast<int>(o); }
inline int bond_dir_code(BondDirection d) { return 1 + static_cast<int>(d); }

inline FeaturizedGraph featurize(const MolGraph& mol, FeatureSet fs) {
  FeaturizedGraph g;
  g.feature_set = fs;
  g.n_atoms = mol.num_atoms();
  g.n_bonds = mol.num_bonds();
  g.n_node_features = num_node_features(fs);
  g.n_edge_features = num_edge_features(fs);
  g.masked.assign(g.n_atoms, 0);
  g.node_codes.reserve(static_cast<std::size_t>(g.n_atoms) * g.n_node_features);
  for (const Atom& a : mol.atoms) {
    g.node_codes.push_back(detail::checked(a.atomic_number, 1, 119, "atomic"));
    g.node_codes.push_back(chirality_code(a.chirality));
    if (fs == FeatureSet::Extended) {
      g.node_codes.push_back(1 + detail::checked(a.degree, 0, 10, "degree"));
      g.node_codes.push_back(6 + detail::checked(a.formal_charge, -5, 5, "charge"));
      g.node_codes.push_back(1 + static_cast<int>(a.hybridization));
      g.node_codes.push_back(a.aromatic ? 2 : 1);
      g.node_codes.push_back(1 + detail::checked(a.total_h(), 0, 5, "hydrogen"));
    }
  }
  for (int b = 0; b < mol.num_bonds(); ++b) {
    const Bond& bond = mol.bonds[b];
    for (int dir = 0; dir < 2; ++dir) {
      g.arc_src.push_back(dir == 0 ? bond.a : bond.b);
      g.arc_dst.push_back(dir == 0 ? bond.b : bond.a);
      g.arc_bond.push_back(b);
      g.edge_codes.push_back(bond_type_code(bond.order));
      g.edge_codes.push_back(bond_dir_code(bond.direction));
      if (fs == FeatureSet::Extended) g.edge_codes.push_back(1 + static_cast<int>(bond.stereo));
    }
  }
  g.n_arcs = static_cast<int>(g.arc_src.size());
  return g;
}

}  // namespace molcl::chem
