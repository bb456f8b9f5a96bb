// Copyright 2026 The molcl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <bitset>
#include <filesystem>
#include <functional>
#include <istream>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "molcl/chem/canon.hpp"
#include "molcl/chem/mol_graph.hpp"
#include "molcl/chem/smiles.hpp"
#include "molcl/error.hpp"
#include "molcl/util/io.hpp"

namespace molcl {

/// Per-atom fragment ids (0-based, numbered by lowest member atom).
struct FragmentMap {
  std::vector<int> assignment;
  int n_fragments = 0;
  std::vector<int> cleaved_bonds;

  std::vector<std::vector<int>> groups() const {
    std::vector<std::vector<int>> out(n_fragments);
    for (int a = 0; a < static_cast<int>(assignment.size()); ++a) out[assignment[a]].push_back(a);
    return out;
  }
};

inline constexpr int kBricsLabels = 16;

/// Which (environment, environment) pairs allow cleavage; symmetric.
struct BricsRules {
  int version = 0;
  std::array<std::bitset<kBricsLabels + 1>, kBricsLabels + 1> allowed{};

  void allow(int a, int b) {
    allowed[a].set(b);
    allowed[b].set(a);
  }
  bool allows(int a, int b) const { return allowed[a].test(b); }
  int num_pairs() const {
    int n = 0;
    for (int a = 1; a <= kBricsLabels; ++a) {
      for (int b = a; b <= kBricsLabels; ++b) n += allows(a, b);
    }
    return n;
  }

  friend bool operator==(const BricsRules&, const BricsRules&) = default;
};

namespace detail {

// Environments implemented below; L2 does not exist in the published table
// and L7 (olefin) is not used.
inline bool brics_label_supported(int label) {
  return label >= 1 && label <= kBricsLabels && label != 2 && label != 7;
}

inline constexpr std::pair<int, int> kDefaultBricsPairs[] = {
    {1, 3},   {1, 5},   {1, 10},  {3, 4},   {3, 13},  {3, 14},  {3, 15},  {3, 16},  {4, 5},
    {4, 11},  {5, 12},  {5, 14},  {5, 16},  {5, 13},  {5, 15},  {6, 13},  {6, 14},  {6, 15},
    {6, 16},  {8, 9},   {8, 10},  {8, 13},  {8, 14},  {8, 15},  {8, 16},  {9, 13},  {9, 14},
    {9, 15},  {9, 16},  {10, 13}, {10, 14}, {10, 15}, {10, 16}, {11, 13}, {11, 14}, {11, 15},
    {11, 16}, {13, 14}, {13, 15}, {13, 16}, {14, 14}, {14, 15}, {14, 16}, {15, 16}, {16, 16}};

}  // namespace detail

/// Parses the rule-table format: '#' comments, one `version N` line and
/// `pair A B` lines.
inline BricsRules parse_brics_rules(std::istream& in) {
  BricsRules rules;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    auto fail = [&](const std::string& why) {
      throw Error(Errc::Config, "rule table line " + std::to_string(lineno) + ": " + why);
    };
    if (key == "version") {
      if (!(ls >> rules.version) || rules.version != 1) fail("unsupported version");
    } else if (key == "pair") {
      int a = 0, b = 0;
      if (!(ls >> a >> b)) fail("expected two labels");
      if (!detail::brics_label_supported(a) || !detail::brics_label_supported(b)) {
        fail("unsupported label in pair " + std::to_string(a) + " " + std::to_string(b));
      }
      rules.allow(a, b);
    } else {
      fail("unknown key '" + key + "'");
    }
    std::string extra;
    if (ls >> extra) fail("trailing text '" + extra + "'");
  }
  if (rules.version == 0) throw Error(Errc::Config, "rule table has no version line");
  return rules;
}

inline BricsRules load_brics_rules(const std::filesystem::path& path) {
  std::istringstream in(util::read_file(path));
  return parse_brics_rules(in);
}

/// Built-in copy of data/brics_rules.txt.
inline const BricsRules& default_brics_rules() {
  static const BricsRules rules = [] {
    BricsRules r;
    r.version = 1;
    for (auto [a, b] : detail::kDefaultBricsPairs) r.allow(a, b);
    return r;
  }();
  return rules;
}

namespace detail {

using chem::Atom;
using chem::BondOrder;
using chem::MolGraph;

// Local environment queries. "Aliphatic" element tests match SMARTS
// uppercase symbols, "any" tests match #n.
struct EnvQuery {
  const MolGraph& m;

  const Atom& at(int i) const { return m.atoms[i]; }
  bool aliph(int i, int z) const { return at(i).atomic_number == z && !at(i).aromatic; }
  bool arom(int i, int z) const { return at(i).atomic_number == z && at(i).aromatic; }
  int deg(int i) const { return static_cast<int>(m.neighbors(i).size()); }

  BondOrder order(int bond) const { return m.bonds[bond].order; }
  bool ring_bond(int bond) const { return m.bonds[bond].in_ring; }
  // SMARTS default bond: single or aromatic
  bool plain(int bond) const { return order(bond) == BondOrder::Single || order(bond) == BondOrder::Aromatic; }

  bool has_double_to(int i, const std::function<bool(int)>& pred) const {
    for (const auto& nb : m.neighbors(i)) {
      if (order(nb.bond) == BondOrder::Double && pred(nb.atom)) return true;
    }
    return false;
  }
  int count_double_to(int i, const std::function<bool(int)>& pred) const {
    int n = 0;
    for (const auto& nb : m.neighbors(i)) n += order(nb.bond) == BondOrder::Double && pred(nb.atom);
    return n;
  }
  // Two distinct neighbours u != v with first(bond_u, u) and second(bond_v, v).
  bool two_neighbors(int i, const std::function<bool(int, int)>& first,
                     const std::function<bool(int, int)>& second) const {
    const auto nbs = m.neighbors(i);
    for (const auto& x : nbs) {
      if (!first(x.bond, x.atom)) continue;
      for (const auto& y : nbs) {
        if (y.atom != x.atom && second(y.bond, y.atom)) return true;
      }
    }
    return false;
  }
  bool any_neighbor(int i, const std::function<bool(int, int)>& pred) const {
    for (const auto& nb : m.neighbors(i)) {
      if (pred(nb.bond, nb.atom)) return true;
    }
    return false;
  }

  bool is_c_any(int j) const { return at(j).atomic_number == 6; }
  bool is_cno_any(int j) const {
    const int z = at(j).atomic_number;
    return z == 6 || z == 7 || z == 8;
  }
  bool is_oxo(int j) const { return aliph(j, 8); }
  bool aliph_in(int j, std::initializer_list<int> zs) const {
    return !at(j).aromatic && std::find(zs.begin(), zs.end(), at(j).atomic_number) != zs.end();
  }
  bool arom_in(int j, std::initializer_list<int> zs) const {
    return at(j).aromatic && std::find(zs.begin(), zs.end(), at(j).atomic_number) != zs.end();
  }
  bool acyclic_single(int bond) const { return order(bond) == BondOrder::Single && !ring_bond(bond); }
  bool ring_single(int bond) const { return order(bond) == BondOrder::Single && ring_bond(bond); }
  bool arom_bond(int bond) const { return order(bond) == BondOrder::Aromatic; }

  bool env(int label, int i) const {
    auto oxo = [&](int j) { return is_oxo(j); };
    switch (label) {
      case 1:
        return aliph(i, 6) && deg(i) == 3 && has_double_to(i, oxo) &&
               any_neighbor(i, [&](int b, int j) { return plain(b) && is_cno_any(j); });
      case 3:
        return aliph(i, 8) && deg(i) == 2 &&
               any_neighbor(i, [&](int b, int j) { return acyclic_single(b) && is_c_any(j); });
      case 4:
        return aliph(i, 6) && deg(i) != 1 && !has_double_to(i, [](int) { return true; }) &&
               any_neighbor(i, [&](int b, int j) { return acyclic_single(b) && is_c_any(j); });
      case 5: {
        if (!aliph(i, 7) || deg(i) == 1 || has_double_to(i, [](int) { return true; })) return false;
        const bool bad_single = any_neighbor(i, [&](int b, int j) {
          const int z = at(j).atomic_number;
          return order(b) == BondOrder::Single && z != 6 && z != 16 && z != 1;
        });
        if (bad_single) return false;
        const bool lactam = at(i).in_ring && any_neighbor(i, [&](int b, int j) {
                              return ring_bond(b) && aliph(j, 6) && at(j).in_ring && has_double_to(j, oxo);
                            });
        return !lactam;
      }
      case 6:
        return aliph(i, 6) && deg(i) == 3 && !at(i).in_ring && has_double_to(i, oxo) &&
               any_neighbor(i, [&](int b, int j) { return acyclic_single(b) && is_cno_any(j); });
      case 8:
        return aliph(i, 6) && !at(i).in_ring && deg(i) != 1 &&
               !any_neighbor(i, [&](int b, int) { return order(b) != BondOrder::Single; });
      case 9:
        return arom(i, 7) && at(i).formal_charge == 0 &&
               two_neighbors(
                   i, [&](int b, int j) { return arom_bond(b) && arom_in(j, {6, 7, 8, 16}); },
                   [&](int b, int j) { return arom_bond(b) && arom_in(j, {6, 7, 8, 16}); });
      case 10:
        return aliph(i, 7) && at(i).in_ring &&
               two_neighbors(
                   i, [&](int b, int j) { return ring_bond(b) && aliph(j, 6) && has_double_to(j, oxo); },
                   [&](int b, int j) { return ring_bond(b) && aliph_in(j, {6, 7, 8, 16}); });
      case 11:
        return aliph(i, 16) && deg(i) == 2 &&
               any_neighbor(i, [&](int b, int j) { return acyclic_single(b) && is_c_any(j); });
      case 12:
        return aliph(i, 16) && deg(i) == 4 && count_double_to(i, oxo) >= 2 &&
               any_neighbor(i, [&](int b, int j) { return plain(b) && is_c_any(j); });
      case 13:
        return aliph(i, 6) &&
               two_neighbors(
                   i, [&](int b, int j) { return ring_single(b) && aliph_in(j, {6, 7, 8, 16}); },
                   [&](int b, int j) { return ring_single(b) && aliph_in(j, {7, 8, 16}); });
      case 14:
        return arom(i, 6) &&
               two_neighbors(
                   i, [&](int b, int j) { return arom_bond(b) && arom_in(j, {6, 7, 8, 16}); },
                   [&](int b, int j) { return arom_bond(b) && arom_in(j, {7, 8, 16}); });
      case 15:
        return aliph(i, 6) &&
               two_neighbors(
                   i, [&](int b, int j) { return ring_single(b) && aliph(j, 6); },
                   [&](int b, int j) { return ring_single(b) && aliph(j, 6); });
      case 16:
        return arom(i, 6) &&
               two_neighbors(
                   i, [&](int b, int j) { return arom_bond(b) && arom(j, 6); },
                   [&](int b, int j) { return arom_bond(b) && arom(j, 6); });
      default:
        return false;
    }
  }
};

inline std::bitset<kBricsLabels + 1> brics_labels(const EnvQuery& q, int atom) {
  std::bitset<kBricsLabels + 1> out;
  for (int label = 1; label <= kBricsLabels; ++label) {
    if (brics_label_supported(label) && q.env(label, atom)) out.set(label);
  }
  return out;
}

}  // namespace detail

/// Bonds cleavable under `rules`: acyclic single bonds whose end atoms carry
/// an allowed environment pair.
inline std::vector<int> brics_bonds(const chem::MolGraph& mol, const BricsRules& rules = default_brics_rules()) {
  const detail::EnvQuery q{mol};
  std::vector<std::bitset<kBricsLabels + 1>> labels(mol.num_atoms());
  for (int i = 0; i < mol.num_atoms(); ++i) labels[i] = detail::brics_labels(q, i);
  std::vector<int> out;
  for (int b = 0; b < mol.num_bonds(); ++b) {
    const auto& bond = mol.bonds[b];
    if (bond.order != chem::BondOrder::Single || bond.in_ring) continue;
    bool hit = false;
    for (int la = 1; la <= kBricsLabels && !hit; ++la) {
      if (!labels[bond.a].test(la)) continue;
      hit = (rules.allowed[la] & labels[bond.b]).any();
    }
    if (hit) out.push_back(b);
  }
  return out;
}

/// Connected components after removing `cut` bonds, numbered by lowest atom.
inline FragmentMap components_without(const chem::MolGraph& mol, std::vector<int> cut) {
  std::sort(cut.begin(), cut.end());
  std::vector<char> removed(mol.num_bonds(), 0);
  for (int b : cut) removed[b] = 1;
  FragmentMap fm;
  fm.assignment.assign(mol.num_atoms(), -1);
  std::vector<int> stack;
  for (int s = 0; s < mol.num_atoms(); ++s) {
    if (fm.assignment[s] >= 0) continue;
    const int id = fm.n_fragments++;
    fm.assignment[s] = id;
    stack.push_back(s);
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (const auto& nb : mol.neighbors(u)) {
        if (removed[nb.bond] || fm.assignment[nb.atom] >= 0) continue;
        fm.assignment[nb.atom] = id;
        stack.push_back(nb.atom);
      }
    }
  }
  fm.cleaved_bonds = std::move(cut);
  return fm;
}

/// Cleaves every BRICS bond at once; fragments are atom subsets of the
/// intact graph (no attachment atoms).
inline FragmentMap brics_partition(const chem::MolGraph& mol, const BricsRules& rules = default_brics_rules()) {
  return components_without(mol, brics_bonds(mol, rules));
}

/// Atoms kept by Murcko pruning: degree-1 non-ring atoms are removed until
/// none remain. Empty when the molecule has no ring.
inline std::vector<char> murcko_atoms(const chem::MolGraph& mol) {
  const int n = mol.num_atoms();
  std::vector<char> keep(n, 1);
  std::vector<int> deg(n);
  for (int i = 0; i < n; ++i) deg[i] = static_cast<int>(mol.neighbors(i).size());
  std::vector<int> queue;
  for (int i = 0; i < n; ++i) {
    if (!mol.atoms[i].in_ring && deg[i] <= 1) queue.push_back(i);
  }
  while (!queue.empty()) {
    const int u = queue.back();
    queue.pop_back();
    if (!keep[u]) continue;
    keep[u] = 0;
    for (const auto& nb : mol.neighbors(u)) {
      if (!keep[nb.atom]) continue;
      if (--deg[nb.atom] <= 1 && !mol.atoms[nb.atom].in_ring) queue.push_back(nb.atom);
    }
  }
  return keep;
}

/// Canonical heavy-atom SMILES of the Murcko scaffold; "" for acyclic input.
inline std::string murcko_scaffold(const chem::MolGraph& mol) {
  const auto keep = murcko_atoms(mol);
  if (std::none_of(keep.begin(), keep.end(), [](char k) { return k != 0; })) return {};
  const chem::MolGraph core = chem::induced_subgraph(mol, keep);
  const auto ranks = chem::canonical_ranks(core, /*with_hydrogens=*/false);
  chem::WriteOptions opt;
  opt.ranks = &ranks;
  opt.full = false;
  return chem::write_smiles(core, opt);
}

}  // namespace molcl
