// Copyright 2026 The molcl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <set>
#include <vector>

#include "molcl/chem/mol_graph.hpp"

namespace molcl::chem {

namespace detail {

struct CycleCandidate {
  std::vector<int> atoms;         // cycle order
  std::vector<int> sorted_atoms;  // tie-break key
  std::vector<std::uint64_t> edges;  // bond-incidence bitset
};

inline int count_components(const MolGraph& mol) {
  std::vector<int> seen(mol.atoms.size(), 0);
  int components = 0;
  for (int s = 0; s < mol.num_atoms(); ++s) {
    if (seen[s]) continue;
    ++components;
    std::vector<int> stack{s};
    seen[s] = 1;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (const Neighbor& n : mol.neighbors(u)) {
        if (!seen[n.atom]) {
          seen[n.atom] = 1;
          stack.push_back(n.atom);
        }
      }
    }
  }
  return components;
}

// Horton candidate set: for every root r and bond (x, y), the cycle formed by
// the BFS-tree paths r..x, r..y and the bond, when the two paths meet only at r.
inline std::vector<CycleCandidate> horton_candidates(const MolGraph& mol) {
  const int n = mol.num_atoms();
  const int words = (mol.num_bonds() + 63) / 64;
  std::vector<CycleCandidate> out;
  std::set<std::vector<std::uint64_t>> seen;

  std::vector<std::vector<Neighbor>> sorted_adj(mol.adjacency);
  for (auto& list : sorted_adj) {
    std::sort(list.begin(), list.end(),
              [](const Neighbor& l, const Neighbor& r) { return l.atom < r.atom; });
  }

  for (int root = 0; root < n; ++root) {
    std::vector<int> parent(n, -1), parent_bond(n, -1), dist(n, -1);
    std::deque<int> queue{root};
    dist[root] = 0;
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      for (const Neighbor& nb : sorted_adj[u]) {
        if (dist[nb.atom] < 0) {
          dist[nb.atom] = dist[u] + 1;
          parent[nb.atom] = u;
          parent_bond[nb.atom] = nb.bond;
          queue.push_back(nb.atom);
        }
      }
    }
    auto path_to_root = [&](int v) {
      std::vector<int> path;
      for (int x = v; x != -1; x = parent[x]) path.push_back(x);
      return path;  // v ... root
    };
    for (int b = 0; b < mol.num_bonds(); ++b) {
      const int x = mol.bonds[b].a, y = mol.bonds[b].b;
      if (dist[x] < 0 || dist[y] < 0) continue;
      if (parent_bond[x] == b || parent_bond[y] == b) continue;
      const auto px = path_to_root(x);
      const auto py = path_to_root(y);
      // paths must share only the root
      std::vector<int> sx(px.begin(), px.end() - 1), sy(py.begin(), py.end() - 1);
      std::sort(sx.begin(), sx.end());
      std::sort(sy.begin(), sy.end());
      std::vector<int> common;
      std::set_intersection(sx.begin(), sx.end(), sy.begin(), sy.end(),
                            std::back_inserter(common));
      if (!common.empty()) continue;
      CycleCandidate c;
      c.atoms.assign(px.rbegin(), px.rend());        // root .. x
      c.atoms.insert(c.atoms.end(), py.begin(), py.end() - 1);  // y .. (child of root)
      if (c.atoms.size() < 3) continue;
      c.edges.assign(words, 0);
      for (std::size_t i = 0; i < c.atoms.size(); ++i) {
        const int u = c.atoms[i], v = c.atoms[(i + 1) % c.atoms.size()];
        const int bond = mol.bond_between(u, v);
        c.edges[bond / 64] |= std::uint64_t{1} << (bond % 64);
      }
      if (!seen.insert(c.edges).second) continue;
      c.sorted_atoms = c.atoms;
      std::sort(c.sorted_atoms.begin(), c.sorted_atoms.end());
      out.push_back(std::move(c));
    }
  }
  return out;
}

}  // namespace detail

/// Smallest set of smallest rings (a minimum cycle basis). The candidate
/// cycles are taken shortest first, ties broken by the lexicographically
/// smallest sorted atom-index set, and accepted when independent over GF(2).
/// The result holds exactly |bonds| - |atoms| + components rings.
inline std::vector<std::vector<int>> perceive_rings(const MolGraph& mol) {
  const int target = mol.num_bonds() - mol.num_atoms() + detail::count_components(mol);
  if (target <= 0) return {};
  auto candidates = detail::horton_candidates(mol);
  std::sort(candidates.begin(), candidates.end(),
            [](const detail::CycleCandidate& l, const detail::CycleCandidate& r) {
              if (l.atoms.size() != r.atoms.size()) return l.atoms.size() < r.atoms.size();
              return l.sorted_atoms < r.sorted_atoms;
            });

  // Reduced basis: each row keeps its pivot bit (lowest set bit).
  std::vector<std::vector<std::uint64_t>> basis;
  std::vector<int> pivots;
  auto lowest_bit = [](const std::vector<std::uint64_t>& v) {
    for (std::size_t w = 0; w < v.size(); ++w) {
      if (v[w]) return static_cast<int>(w * 64 + __builtin_ctzll(v[w]));
    }
    return -1;
  };

  std::vector<std::vector<int>> rings;
  for (const auto& c : candidates) {
    auto v = c.edges;
    for (std::size_t i = 0; i < basis.size(); ++i) {
      const int p = pivots[i];
      if ((v[p / 64] >> (p % 64)) & 1u) {
        for (std::size_t w = 0; w < v.size(); ++w) v[w] ^= basis[i][w];
      }
    }
    const int pivot = lowest_bit(v);
    if (pivot < 0) continue;
    // keep the basis reduced so later candidates eliminate in one pass
    for (std::size_t i = 0; i < basis.size(); ++i) {
      if ((basis[i][pivot / 64] >> (pivot % 64)) & 1u) {
        for (std::size_t w = 0; w < v.size(); ++w) basis[i][w] ^= v[w];
      }
    }
    basis.push_back(std::move(v));
    pivots.push_back(pivot);
    rings.push_back(c.atoms);
    if (static_cast<int>(rings.size()) == target) break;
  }
  return rings;
}

/// Sets Atom::in_ring and Bond::in_ring from the ring list.
inline void mark_ring_membership(MolGraph& mol) {
  for (Atom& a : mol.atoms) a.in_ring = false;
  for (Bond& b : mol.bonds) b.in_ring = false;
  for (const auto& ring : mol.rings) {
    for (std::size_t i = 0; i < ring.size(); ++i) {
      const int u = ring[i], v = ring[(i + 1) % ring.size()];
      mol.atoms[u].in_ring = true;
      const int bond = mol.bond_between(u, v);
      if (bond >= 0) mol.bonds[bond].in_ring = true;
    }
  }
}

}  // namespace molcl::chem
