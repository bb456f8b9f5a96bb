// Copyright 2026 The molcl Authors
// SPDX-License-Identifier: Apache-2.0

#include "molcl/fragment.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "molcl/chem/canon.hpp"
#include "molcl/chem/corpus.hpp"
#include "molcl/chem/smiles.hpp"
#include "molcl/util/rng.hpp"
#include "test_support.hpp"

namespace molcl {
namespace {

using chem::parse_smiles;
using testing::data_path;
using testing::read_tsv;
using testing::split;

std::set<std::vector<int>> group_set(const FragmentMap& fm) {
  const auto g = fm.groups();
  return {g.begin(), g.end()};
}

const std::vector<chem::MolGraph>& corpus() {
  static const auto mols =
      chem::parse_corpus(chem::read_corpus_file(std::string(MOLCL_DATA_DIR) + "/desk512.smi"));
  return mols;
}

TEST(BricsRules, ShippedFileMatchesBuiltIn) {
  const auto rules = load_brics_rules(std::string(MOLCL_DATA_DIR) + "/brics_rules.txt");
  EXPECT_EQ(rules.version, 1);
  EXPECT_EQ(rules, default_brics_rules());
  EXPECT_EQ(rules.num_pairs(), 45);
  EXPECT_TRUE(rules.allows(3, 1));
  EXPECT_FALSE(rules.allows(1, 1));
}

TEST(BricsRules, RejectsMalformed) {
  for (const char* text : {"pair 1 3\n", "version 2\n", "version 1\npair 1\n", "version 1\npair 7 7\n",
                           "version 1\npair 2 3\n", "version 1\nfoo 1 2\n", "version 1\npair 1 3 4\n"}) {
    std::istringstream in(text);
    try {
      parse_brics_rules(in);
      ADD_FAILURE() << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::Config);
    }
  }
}

TEST(BricsPartition, Examples) {
  const auto ethane = brics_partition(parse_smiles("CC"));
  EXPECT_EQ(ethane.n_fragments, 1);
  EXPECT_TRUE(ethane.cleaved_bonds.empty());
  EXPECT_EQ(brics_partition(parse_smiles("c1ccccc1")).n_fragments, 1);
  EXPECT_EQ(brics_partition(parse_smiles("Cc1ccccc1")).n_fragments, 1);

  // ethyl (L4) - O (L3) - C(=O) (L1/L6) - phenyl (L16): three cuts
  const auto eb = brics_partition(parse_smiles("CCOC(=O)c1ccccc1"));
  EXPECT_EQ(eb.n_fragments, 4);
  EXPECT_EQ(group_set(eb), (std::set<std::vector<int>>{{0, 1}, {2}, {3, 4}, {5, 6, 7, 8, 9, 10}}));
  EXPECT_EQ(eb.cleaved_bonds, (std::vector<int>{1, 2, 4}));
}

TEST(BricsPartition, RulesCanBeRestricted) {
  std::istringstream in("version 1\npair 1 3\n");
  const auto rules = parse_brics_rules(in);
  const auto eb = brics_partition(parse_smiles("CCOC(=O)c1ccccc1"), rules);
  EXPECT_EQ(eb.n_fragments, 2);
  EXPECT_EQ(eb.cleaved_bonds, (std::vector<int>{2}));
}

// Partitions frozen from a reference BRICS implementation (olefin links
// excluded).
TEST(BricsPartition, MatchesReferenceFixture) {
  const auto rows = read_tsv(data_path("brics50.tsv"));
  ASSERT_EQ(rows.size(), 50u);
  for (const auto& row : rows) {
    SCOPED_TRACE(row[0]);
    const auto fm = brics_partition(parse_smiles(row[0]));
    EXPECT_EQ(fm.n_fragments, std::stoi(row[1]));
    std::set<std::vector<int>> expected;
    for (const auto& g : split(row[2], ';')) {
      std::vector<int> atoms;
      for (const auto& a : split(g, ',')) atoms.push_back(std::stoi(a));
      std::sort(atoms.begin(), atoms.end());
      expected.insert(atoms);
    }
    EXPECT_EQ(group_set(fm), expected);
  }
}

TEST(BricsPartition, CorpusInvariants) {
  int multi = 0;
  for (const auto& mol : corpus()) {
    const auto fm = brics_partition(mol);
    ASSERT_EQ(static_cast<int>(fm.assignment.size()), mol.num_atoms());
    std::vector<int> seen(fm.n_fragments, 0);
    for (int id : fm.assignment) {
      ASSERT_TRUE(id >= 0 && id < fm.n_fragments);
      ++seen[id];
    }
    for (int c : seen) EXPECT_GT(c, 0);
    for (int b : fm.cleaved_bonds) {
      const auto& bond = mol.bonds[b];
      EXPECT_FALSE(bond.in_ring);
      EXPECT_EQ(bond.order, chem::BondOrder::Single);
      EXPECT_NE(fm.assignment[bond.a], fm.assignment[bond.b]);
    }
    // every uncut bond stays inside one fragment, and each fragment is
    // connected through uncut bonds
    std::set<int> cut(fm.cleaved_bonds.begin(), fm.cleaved_bonds.end());
    for (int b = 0; b < mol.num_bonds(); ++b) {
      if (!cut.count(b)) EXPECT_EQ(fm.assignment[mol.bonds[b].a], fm.assignment[mol.bonds[b].b]);
    }
    for (const auto& group : fm.groups()) {
      std::vector<char> keep(mol.num_atoms(), 0);
      for (int a : group) keep[a] = 1;
      EXPECT_EQ(chem::detail::count_components(chem::induced_subgraph(mol, keep)), 1);
    }
    EXPECT_EQ(fm.n_fragments, static_cast<int>(fm.cleaved_bonds.size()) + 1);  // forest of cuts
    multi += fm.n_fragments > 1;
  }
  EXPECT_GT(multi, 400);
}

// A bond cleavable inside an extracted fragment must have been cleavable in
// the parent. Fragments carry dummy-free boundaries, so the check maps each
// fragment bond back to the parent bond.
TEST(BricsPartition, ExtractionCreatesNoNewSites) {
  for (const auto& mol : corpus()) {
    const auto fm = brics_partition(mol);
    const std::set<int> parent_sites(fm.cleaved_bonds.begin(), fm.cleaved_bonds.end());
    for (const auto& group : fm.groups()) {
      std::vector<char> keep(mol.num_atoms(), 0);
      for (int a : group) keep[a] = 1;
      const auto sub = chem::induced_subgraph(mol, keep);
      for (int b : brics_bonds(sub)) {
        const int pa = group[sub.bonds[b].a];
        const int pb = group[sub.bonds[b].b];
        EXPECT_TRUE(parent_sites.count(mol.bond_between(pa, pb)))
            << chem::canonical_smiles(mol) << " fragment bond " << pa << "-" << pb;
      }
    }
  }
}

TEST(MurckoScaffold, Examples) {
  EXPECT_EQ(murcko_scaffold(parse_smiles("Cc1ccccc1")), murcko_scaffold(parse_smiles("c1ccccc1")));
  EXPECT_EQ(murcko_scaffold(parse_smiles("CCO")), "");
  EXPECT_EQ(murcko_scaffold(parse_smiles("CCOC(=O)c1ccccc1")), murcko_scaffold(parse_smiles("COC(=O)c1ccccc1")));
  EXPECT_EQ(murcko_scaffold(parse_smiles("CCOC(=O)c1ccccc1")), "c1ccccc1");
  // linker between two rings survives
  EXPECT_EQ(murcko_scaffold(parse_smiles("c1ccccc1CCc1ccccc1C")),
            murcko_scaffold(parse_smiles("c1ccc(cc1)CCc1ccccc1")));
  EXPECT_NE(murcko_scaffold(parse_smiles("c1ccccc1CCc1ccccc1")), murcko_scaffold(parse_smiles("c1ccccc1Cc1ccccc1")));
  EXPECT_EQ(murcko_scaffold(parse_smiles("OC1CCNCC1")), murcko_scaffold(parse_smiles("C1CCNCC1")));
}

TEST(MurckoScaffold, InvariantUnderAliasing) {
  util::Rng rng(5);
  for (std::size_t i = 0; i < corpus().size(); i += 2) {
    const auto& mol = corpus()[i];
    std::vector<int> ranks(mol.num_atoms());
    std::iota(ranks.begin(), ranks.end(), 0);
    rng.shuffle(ranks);
    chem::WriteOptions opt;
    opt.ranks = &ranks;
    const auto alias = parse_smiles(chem::write_smiles(mol, opt));
    EXPECT_EQ(murcko_scaffold(alias), murcko_scaffold(mol));
  }
}

TEST(MurckoScaffold, KeyParsesToRingSystem) {
  for (const auto& mol : corpus()) {
    const std::string key = murcko_scaffold(mol);
    if (key.empty()) {
      EXPECT_TRUE(mol.rings.empty());
      continue;
    }
    const auto keep = murcko_atoms(mol);
    const auto core = chem::induced_subgraph(mol, keep);
    EXPECT_EQ(core.rings.size(), mol.rings.size());
    for (int i = 0; i < core.num_atoms(); ++i) {
      if (!core.atoms[i].in_ring) EXPECT_GE(core.atoms[i].degree, 2);
    }
  }
}

}  // namespace
}  // namespace molcl
