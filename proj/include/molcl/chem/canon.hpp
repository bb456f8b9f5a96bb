// Copyright 2026 The molcl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "molcl/chem/mol_graph.hpp"
#include "molcl/chem/rings.hpp"
#include "molcl/chem/smiles.hpp"

namespace molcl::chem {

namespace detail {

// Dense ranks (0..k-1) of arbitrary comparable keys.
template <class Key>
std::vector<int> dense_ranks(const std::vector<Key>& keys) {
  std::vector<Key> sorted(keys);
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<int> out(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i) {
    out[i] = static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), keys[i]) -
                              sorted.begin());
  }
  return out;
}

inline int count_classes(const std::vector<int>& ranks) {
  return ranks.empty() ? 0 : *std::max_element(ranks.begin(), ranks.end()) + 1;
}

inline std::vector<int> refine(const MolGraph& mol, std::vector<int> ranks) {
  using Key = std::pair<int, std::vector<std::pair<int, int>>>;
  for (;;) {
    std::vector<Key> keys(ranks.size());
    for (int i = 0; i < mol.num_atoms(); ++i) {
      keys[i].first = ranks[i];
      for (const Neighbor& n : mol.neighbors(i)) {
        keys[i].second.emplace_back(static_cast<int>(mol.bonds[n.bond].order), ranks[n.atom]);
      }
      std::sort(keys[i].second.begin(), keys[i].second.end());
    }
    auto next = dense_ranks(keys);
    if (count_classes(next) == count_classes(ranks)) return next;
    ranks = std::move(next);
  }
}

}  // namespace detail

/// Canonical atom ranks: Morgan-style refinement of local invariants, with
/// remaining ties broken by promoting the lowest-index member of the lowest
/// tied class and refining again. With `with_hydrogens` false the hydrogen
/// count is left out of the initial invariant (used for pruned scaffolds).
inline std::vector<int> canonical_ranks(const MolGraph& mol, bool with_hydrogens = true) {
  const int n = mol.num_atoms();
  using Inv = std::tuple<int, int, int, int, int, int>;
  std::vector<Inv> inv(n);
  for (int i = 0; i < n; ++i) {
    const Atom& a = mol.atoms[i];
    inv[i] = {a.atomic_number, a.aromatic ? 1 : 0, a.formal_charge,
              static_cast<int>(mol.neighbors(i).size()), with_hydrogens ? a.total_h() : 0,
              a.in_ring ? 1 : 0};
  }
  auto ranks = detail::refine(mol, detail::dense_ranks(inv));
  while (detail::count_classes(ranks) < n) {
    std::vector<int> size(n, 0);
    for (int r : ranks) ++size[r];
    int tied = 0;
    while (size[tied] < 2) ++tied;
    int chosen = -1;
    for (int i = 0; i < n && chosen < 0; ++i) {
      if (ranks[i] == tied) chosen = i;
    }
    std::vector<std::pair<int, int>> keys(n);
    for (int i = 0; i < n; ++i) keys[i] = {ranks[i], i == chosen ? 0 : 1};
    ranks = detail::refine(mol, detail::dense_ranks(keys));
  }
  return ranks;
}

/// Canonical SMILES: the writer driven by canonical ranks.
inline std::string canonical_smiles(const MolGraph& mol) {
  const auto ranks = canonical_ranks(mol);
  WriteOptions opt;
  opt.ranks = &ranks;
  return write_smiles(mol, opt);
}

/// Subgraph induced by the atoms with keep[i] set. Atom attributes are
/// copied, degrees and rings recomputed; stereo bookkeeping is dropped.
inline MolGraph induced_subgraph(const MolGraph& mol, const std::vector<char>& keep) {
  MolGraph sub;
  std::vector<int> remap(mol.num_atoms(), -1);
  for (int i = 0; i < mol.num_atoms(); ++i) {
    if (!keep[i]) continue;
    remap[i] = sub.num_atoms();
    Atom a = mol.atoms[i];
    a.stereo_neighbors.clear();
    a.chirality = Chirality::Unspecified;
    sub.atoms.push_back(std::move(a));
  }
  for (const Bond& b : mol.bonds) {
    if (remap[b.a] < 0 || remap[b.b] < 0) continue;
    Bond nb = b;
    nb.a = remap[b.a];
    nb.b = remap[b.b];
    sub.bonds.push_back(nb);
  }
  sub.rebuild_adjacency();
  for (int i = 0; i < sub.num_atoms(); ++i) {
    sub.atoms[i].degree = static_cast<int>(sub.neighbors(i).size());
  }
  sub.rings = perceive_rings(sub);
  mark_ring_membership(sub);
  return sub;
}

}  // namespace molcl::chem
