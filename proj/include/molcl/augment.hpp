// Copyright 2026 The molcl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "molcl/chem/featurize.hpp"
#include "molcl/chem/mol_graph.hpp"
#include "molcl/error.hpp"
#include "molcl/util/rng.hpp"

namespace molcl {

/// One sampled view: atoms to mask and bonds to delete, both sorted.
struct AugSpec {
  std::vector<int> masked_atoms;
  std::vector<int> deleted_bonds;
  std::uint64_t seed = 0;

  friend bool operator==(const AugSpec&, const AugSpec&) = default;
};

/// round(n / 4) with halves rounded up.
constexpr int quarter_count(int n) { return (n + 2) / 4; }

inline AugSpec sample_augmentation(int n_atoms, int n_bonds, std::uint64_t seed) {
  if (n_atoms < 1) throw Error(Errc::DomainError, "augmentation of an empty graph");
  util::Rng rng(seed);
  AugSpec spec;
  spec.seed = seed;
  spec.masked_atoms = rng.sample_without_replacement(n_atoms, quarter_count(n_atoms));
  spec.deleted_bonds = rng.sample_without_replacement(n_bonds, quarter_count(n_bonds));
  std::sort(spec.masked_atoms.begin(), spec.masked_atoms.end());
  std::sort(spec.deleted_bonds.begin(), spec.deleted_bonds.end());
  return spec;
}

inline AugSpec sample_augmentation(const chem::MolGraph& mol, std::uint64_t seed) {
  return sample_augmentation(mol.num_atoms(), mol.num_bonds(), seed);
}

/// Masks atoms (every node slot set to the mask code) and drops both arcs
/// of each deleted bond. Atom indexing is unchanged.
inline chem::FeaturizedGraph apply(const chem::FeaturizedGraph& fg, const AugSpec& spec) {
  const int n_bonds = fg.n_bonds;
  for (int a : spec.masked_atoms) {
    if (a < 0 || a >= fg.n_atoms) throw Error(Errc::IndexOutOfRange, "masked atom " + std::to_string(a));
  }
  for (int b : spec.deleted_bonds) {
    if (b < 0 || b >= n_bonds) throw Error(Errc::IndexOutOfRange, "deleted bond " + std::to_string(b));
  }
  chem::FeaturizedGraph out = fg;
  for (int a : spec.masked_atoms) {
    std::fill_n(out.node_codes.begin() + static_cast<std::ptrdiff_t>(a) * fg.n_node_features,
                fg.n_node_features, chem::kMaskCode);
    out.masked[a] = 1;
  }
  if (spec.deleted_bonds.empty()) return out;
  std::vector<char> drop(n_bonds, 0);
  for (int b : spec.deleted_bonds) drop[b] = 1;
  out.arc_src.clear();
  out.arc_dst.clear();
  out.arc_bond.clear();
  out.edge_codes.clear();
  for (int e = 0; e < fg.n_arcs; ++e) {
    if (drop[fg.arc_bond[e]]) continue;
    out.arc_src.push_back(fg.arc_src[e]);
    out.arc_dst.push_back(fg.arc_dst[e]);
    out.arc_bond.push_back(fg.arc_bond[e]);
    const auto codes = fg.edge(e);
    out.edge_codes.insert(out.edge_codes.end(), codes.begin(), codes.end());
  }
  out.n_arcs = static_cast<int>(out.arc_src.size());
  return out;
}

/// Seed of view `view` of molecule `mol_index` within a batch.
inline std::uint64_t view_seed(std::uint64_t batch_seed, std::uint64_t mol_index, int view) {
  return util::derive_seed(batch_seed, {mol_index, static_cast<std::uint64_t>(view)});
}

}  // namespace molcl
