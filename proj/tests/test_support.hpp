// Copyright 2026 The molcl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "molcl/chem/mol_graph.hpp"

namespace molcl::testing {

inline std::string data_path(const std::string& name) {
  return std::string(MOLCL_TEST_DATA_DIR) + "/" + name;
}

/// Tab-separated rows of a fixture file, '#' lines skipped.
inline std::vector<std::vector<std::string>> read_tsv(const std::string& path) {
  std::ifstream in(path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, '\t')) fields.push_back(f);
    rows.push_back(fields);
  }
  return rows;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  std::stringstream ss(s);
  std::string f;
  while (std::getline(ss, f, sep)) out.push_back(f);
  return out;
}

/// Brute-force attributed graph isomorphism (backtracking), returning the
/// mapping a -> b when one exists. Atoms match on element, charge,
/// aromaticity and hydrogen count; bonds on order.
inline std::optional<std::vector<int>> find_isomorphism(const chem::MolGraph& a,
                                                        const chem::MolGraph& b) {
  const int n = a.num_atoms();
  if (n != b.num_atoms() || a.num_bonds() != b.num_bonds()) return std::nullopt;
  auto atom_ok = [&](int i, int j) {
    const auto& x = a.atoms[i];
    const auto& y = b.atoms[j];
    return x.atomic_number == y.atomic_number && x.formal_charge == y.formal_charge &&
           x.aromatic == y.aromatic && x.total_h() == y.total_h() &&
           a.neighbors(i).size() == b.neighbors(j).size();
  };
  // visit a's atoms in BFS order so each new atom has a mapped neighbour
  std::vector<int> order;
  std::vector<char> seen(n, 0);
  for (int s = 0; s < n; ++s) {
    if (seen[s]) continue;
    seen[s] = 1;
    order.push_back(s);
    for (std::size_t k = order.size() - 1; k < order.size(); ++k) {
      for (const auto& nb : a.neighbors(order[k])) {
        if (!seen[nb.atom]) {
          seen[nb.atom] = 1;
          order.push_back(nb.atom);
        }
      }
    }
  }
  std::vector<int> map(n, -1), used(n, 0);
  std::function<bool(int)> rec = [&](int depth) -> bool {
    if (depth == n) return true;
    const int i = order[depth];
    for (int j = 0; j < n; ++j) {
      if (used[j] || !atom_ok(i, j)) continue;
      bool ok = true;
      for (const auto& nb : a.neighbors(i)) {
        if (map[nb.atom] < 0) continue;
        const int bb = b.bond_between(j, map[nb.atom]);
        if (bb < 0 || b.bonds[bb].order != a.bonds[nb.bond].order) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      map[i] = j;
      used[j] = 1;
      if (rec(depth + 1)) return true;
      map[i] = -1;
      used[j] = 0;
    }
    return false;
  };
  if (!rec(0)) return std::nullopt;
  return map;
}

}  // namespace molcl::testing
