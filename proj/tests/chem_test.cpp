// Copyright 2026 The molcl Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "molcl/chem/canon.hpp"
#include "molcl/chem/corpus.hpp"
#include "molcl/chem/featurize.hpp"
#include "molcl/chem/smiles.hpp"
#include "molcl/util/rng.hpp"
#include "test_support.hpp"

namespace molcl::chem {
namespace {

using molcl::testing::data_path;
using molcl::testing::find_isomorphism;
using molcl::testing::read_tsv;
using molcl::testing::split;

Errc parse_error(const std::string& smiles) {
  try {
    parse_smiles(smiles);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected '" << smiles << "' to fail";
  return Errc::Io;
}

std::vector<int> hydrogens(const MolGraph& m) {
  std::vector<int> h;
  for (const Atom& a : m.atoms) h.push_back(a.total_h());
  return h;
}

TEST(ParseSmiles, Ethanol) {
  const MolGraph m = parse_smiles("CCO");
  ASSERT_EQ(m.num_atoms(), 3);
  EXPECT_EQ(m.atoms[0].atomic_number, 6);
  EXPECT_EQ(m.atoms[1].atomic_number, 6);
  EXPECT_EQ(m.atoms[2].atomic_number, 8);
  ASSERT_EQ(m.num_bonds(), 2);
  for (const Bond& b : m.bonds) EXPECT_EQ(b.order, BondOrder::Single);
  EXPECT_EQ(hydrogens(m), (std::vector<int>{3, 2, 1}));
  EXPECT_TRUE(m.rings.empty());
}

TEST(ParseSmiles, Benzene) {
  const MolGraph m = parse_smiles("c1ccccc1");
  ASSERT_EQ(m.num_atoms(), 6);
  ASSERT_EQ(m.num_bonds(), 6);
  for (const Atom& a : m.atoms) {
    EXPECT_TRUE(a.aromatic);
    EXPECT_EQ(a.implicit_h, 1);
    EXPECT_TRUE(a.in_ring);
    EXPECT_EQ(a.hybridization, Hybridization::SP2);
  }
  for (const Bond& b : m.bonds) EXPECT_EQ(b.order, BondOrder::Aromatic);
  ASSERT_EQ(m.rings.size(), 1u);
  EXPECT_EQ(m.rings[0].size(), 6u);
}

TEST(ParseSmiles, Ammonium) {
  const MolGraph m = parse_smiles("[NH4+]");
  ASSERT_EQ(m.num_atoms(), 1);
  EXPECT_EQ(m.atoms[0].atomic_number, 7);
  EXPECT_EQ(m.atoms[0].formal_charge, 1);
  EXPECT_EQ(m.atoms[0].explicit_h, 4);
  EXPECT_EQ(m.atoms[0].implicit_h, 0);
  EXPECT_EQ(m.num_bonds(), 0);
}

TEST(ParseSmiles, EthylBenzoate) {
  const MolGraph m = parse_smiles("CCOC(=O)c1ccccc1");
  EXPECT_EQ(m.num_atoms(), 11);
  EXPECT_EQ(m.num_bonds(), 11);
  ASSERT_EQ(m.rings.size(), 1u);
  EXPECT_TRUE(std::all_of(m.rings[0].begin(), m.rings[0].end(),
                          [&](int a) { return m.atoms[a].aromatic; }));
}

TEST(ParseSmiles, BracketDetails) {
  const MolGraph m = parse_smiles("[13CH3][C@@H](N)[O-]");
  EXPECT_EQ(m.atoms[0].atomic_number, 6);  // isotope dropped
  EXPECT_EQ(m.atoms[0].total_h(), 3);
  EXPECT_EQ(m.atoms[1].chirality, Chirality::CW);
  EXPECT_EQ(m.atoms[3].formal_charge, -1);
  EXPECT_EQ(parse_smiles("[C@H](F)(Cl)Br").atoms[0].chirality, Chirality::CCW);
  EXPECT_EQ(parse_smiles("[Fe+2]").atoms[0].formal_charge, 2);
  EXPECT_EQ(parse_smiles("[O--]").atoms[0].formal_charge, -2);
  EXPECT_EQ(parse_smiles("C%12CC%12").rings.size(), 1u);
  EXPECT_EQ(parse_smiles("[se]1cccc1").atoms[0].atomic_number, 34);
}

TEST(ParseSmiles, BiarylLinkIsSingle) {
  const MolGraph m = parse_smiles("c1ccccc1c1ccccc1");
  int singles = 0;
  for (const Bond& b : m.bonds) singles += b.order == BondOrder::Single;
  EXPECT_EQ(singles, 1);
  EXPECT_EQ(hydrogens(m)[5], 0);
}

TEST(ParseSmiles, HeteroaromaticHydrogens) {
  EXPECT_EQ(hydrogens(parse_smiles("c1ccoc1")), (std::vector<int>{1, 1, 1, 0, 1}));
  EXPECT_EQ(hydrogens(parse_smiles("c1ccsc1")), (std::vector<int>{1, 1, 1, 0, 1}));
  EXPECT_EQ(hydrogens(parse_smiles("c1cc[nH]c1")), (std::vector<int>{1, 1, 1, 1, 1}));
  EXPECT_EQ(hydrogens(parse_smiles("c1ccncc1")), (std::vector<int>{1, 1, 1, 0, 1, 1}));
  EXPECT_EQ(hydrogens(parse_smiles("O=c1cccc[nH]1"))[1], 0);
}

TEST(ParseSmiles, DoubleBondStereo) {
  auto stereo_of = [](const std::string& s) {
    const MolGraph m = parse_smiles(s);
    for (const Bond& b : m.bonds) {
      if (b.order == BondOrder::Double) return b.stereo;
    }
    return BondStereo::Any;
  };
  EXPECT_EQ(stereo_of("F/C=C/F"), BondStereo::Trans);
  EXPECT_EQ(stereo_of("F/C=C\\F"), BondStereo::Cis);
  EXPECT_EQ(stereo_of("C(/F)=C/F"), BondStereo::Cis);
  EXPECT_EQ(stereo_of("C(\\F)=C/F"), BondStereo::Trans);
  EXPECT_EQ(stereo_of("FC=CF"), BondStereo::None);
  const MolGraph m = parse_smiles("F/C=C/F");
  EXPECT_EQ(m.bonds[0].direction, BondDirection::EndUpRight);
}

TEST(ParseSmiles, Errors) {
  EXPECT_EQ(parse_error("C(C"), Errc::UnbalancedParenthesis);
  EXPECT_EQ(parse_error("CC)C"), Errc::UnbalancedParenthesis);
  EXPECT_EQ(parse_error("C1CC"), Errc::UnclosedRingBond);
  EXPECT_EQ(parse_error("CXC"), Errc::UnknownAtomSymbol);
  EXPECT_EQ(parse_error("[Xx]"), Errc::UnknownAtomSymbol);
  EXPECT_EQ(parse_error("C*"), Errc::UnknownAtomSymbol);
  EXPECT_EQ(parse_error("C(C)(C)(C)(C)C"), Errc::ValenceViolation);
  EXPECT_EQ(parse_error("O=O=O"), Errc::ValenceViolation);
  EXPECT_EQ(parse_error("CC.O"), Errc::MultiFragmentInput);
  EXPECT_EQ(parse_error(""), Errc::EmptyInput);
  EXPECT_EQ(parse_error("C==C"), Errc::InvalidSyntax);
  EXPECT_EQ(parse_error("[CH3"), Errc::InvalidSyntax);
  EXPECT_EQ(parse_error("C11"), Errc::InvalidSyntax);
  EXPECT_EQ(parse_error("C()C"), Errc::InvalidSyntax);
}

TEST(AssignHydrogens, Examples) {
  Atom oxygen;
  oxygen.atomic_number = 8;
  const BondOrder one_single[] = {BondOrder::Single};
  EXPECT_EQ(assign_hydrogens(oxygen, one_single), 1);

  Atom arom_c;
  arom_c.aromatic = true;
  const BondOrder two_arom[] = {BondOrder::Aromatic, BondOrder::Aromatic};
  EXPECT_EQ(bond_valence(two_arom), 3);
  EXPECT_EQ(assign_hydrogens(arom_c, two_arom), 1);

  Atom carbanion;
  carbanion.formal_charge = -1;
  carbanion.explicit_h = 3;
  carbanion.bracket = true;
  EXPECT_EQ(assign_hydrogens(carbanion, {}), 0);

  Atom carbon;
  const BondOrder five[] = {BondOrder::Single, BondOrder::Single, BondOrder::Single,
                            BondOrder::Single, BondOrder::Single};
  EXPECT_THROW(assign_hydrogens(carbon, five), Error);
}

TEST(PerceiveRings, Examples) {
  EXPECT_EQ(parse_smiles("CCO").rings.size(), 0u);
  const MolGraph cp = parse_smiles("C1CC1");
  ASSERT_EQ(cp.rings.size(), 1u);
  EXPECT_EQ(cp.rings[0].size(), 3u);
  const MolGraph naph = parse_smiles("c1ccc2ccccc2c1");
  ASSERT_EQ(naph.rings.size(), 2u);
  EXPECT_EQ(naph.rings[0].size(), 6u);
  EXPECT_EQ(naph.rings[1].size(), 6u);
  // cubane: five independent four-membered rings
  const MolGraph cubane = parse_smiles("C12C3C4C1C5C2C3C45");
  ASSERT_EQ(cubane.rings.size(), 5u);
  for (const auto& r : cubane.rings) EXPECT_EQ(r.size(), 4u);
}

TEST(PerceiveRings, RingsAreSimpleCycles) {
  for (const auto& row : read_tsv(data_path("parse_oracle.tsv"))) {
    const MolGraph m = parse_smiles(row[0]);
    EXPECT_EQ(static_cast<int>(m.rings.size()), m.num_bonds() - m.num_atoms() + 1);
    for (const auto& ring : m.rings) {
      ASSERT_GE(ring.size(), 3u);
      std::vector<int> sorted(ring);
      std::sort(sorted.begin(), sorted.end());
      EXPECT_EQ(std::adjacent_find(sorted.begin(), sorted.end()), sorted.end());
      for (std::size_t i = 0; i < ring.size(); ++i) {
        EXPECT_GE(m.bond_between(ring[i], ring[(i + 1) % ring.size()]), 0);
      }
    }
  }
}

// Counts, hydrogens and SSSR sizes frozen from an independent toolkit.
TEST(ParseSmiles, MatchesReferenceOracle) {
  const auto rows = read_tsv(data_path("parse_oracle.tsv"));
  ASSERT_GT(rows.size(), 500u);
  for (const auto& row : rows) {
    SCOPED_TRACE(row[0]);
    const MolGraph m = parse_smiles(row[0]);
    EXPECT_EQ(m.num_atoms(), std::stoi(row[1]));
    EXPECT_EQ(m.num_bonds(), std::stoi(row[2]));
    std::vector<int> h;
    for (const auto& s : split(row[3], ',')) h.push_back(std::stoi(s));
    EXPECT_EQ(hydrogens(m), h);
    std::vector<int> sizes;
    for (const auto& s : split(row.size() > 4 ? row[4] : "", ',')) sizes.push_back(std::stoi(s));
    std::vector<int> got;
    for (const auto& r : m.rings) got.push_back(static_cast<int>(r.size()));
    std::sort(got.begin(), got.end());
    EXPECT_EQ(got, sizes);
  }
}

TEST(ParseSmiles, GraphInvariants) {
  for (const auto& row : read_tsv(data_path("parse_oracle.tsv"))) {
    const MolGraph m = parse_smiles(row[0]);
    std::set<std::pair<int, int>> seen;
    for (const Bond& b : m.bonds) {
      ASSERT_NE(b.a, b.b);
      ASSERT_TRUE(b.a >= 0 && b.a < m.num_atoms() && b.b >= 0 && b.b < m.num_atoms());
      EXPECT_TRUE(seen.insert({std::min(b.a, b.b), std::max(b.a, b.b)}).second);
      if (b.order == BondOrder::Aromatic) {
        EXPECT_TRUE(m.atoms[b.a].aromatic && m.atoms[b.b].aromatic);
      }
    }
    for (int i = 0; i < m.num_atoms(); ++i) {
      EXPECT_EQ(m.atoms[i].degree, static_cast<int>(m.neighbors(i).size()));
    }
  }
}

TEST(WriteSmiles, RoundTripIsIsomorphic) {
  std::vector<std::string> inputs;
  for (const auto& row : read_tsv(data_path("parse_oracle.tsv"))) inputs.push_back(row[0]);
  inputs.insert(inputs.end(), {"[NH4+]", "C[C@H](N)C(=O)O", "F/C=C/F", "[O-][N+](=O)c1ccccc1",
                               "C12C3C4C1C5C2C3C45", "c1ccc2c(c1)-c1ccccc1-2"});
  for (const auto& smi : inputs) {
    SCOPED_TRACE(smi);
    const MolGraph m = parse_smiles(smi);
    const std::string written = canonical_smiles(m);
    const MolGraph back = parse_smiles(written);
    EXPECT_TRUE(find_isomorphism(m, back).has_value()) << written;
  }
}

TEST(WriteSmiles, ChiralityParityPreserved) {
  // Re-emitting from a different start atom must keep the same spatial
  // arrangement: compare tags after mapping neighbour orders through the
  // isomorphism. Inputs have no symmetry, so the mapping is unique.
  for (const std::string smi : {"N[C@@H](C)C(=O)O", "C[C@](F)(Cl)Br", "[C@@H]1(O)CCCCC1N",
                                "O[C@H]1CC[C@@H](C)CCC1"}) {
    SCOPED_TRACE(smi);
    const MolGraph m = parse_smiles(smi);
    std::vector<int> ranks(m.num_atoms());
    std::iota(ranks.rbegin(), ranks.rend(), 0);  // start from the last atom
    WriteOptions opt;
    opt.ranks = &ranks;
    const std::string written = write_smiles(m, opt);
    const MolGraph back = parse_smiles(written);
    const auto map = find_isomorphism(m, back);
    ASSERT_TRUE(map.has_value());
    for (int i = 0; i < m.num_atoms(); ++i) {
      const Atom& a = m.atoms[i];
      if (a.chirality == Chirality::Unspecified) continue;
      const Atom& b = back.atoms[(*map)[i]];
      std::vector<int> mapped;
      for (int n : a.stereo_neighbors) mapped.push_back(n < 0 ? n : (*map)[n]);
      const int parity = detail::permutation_parity(mapped, b.stereo_neighbors);
      ASSERT_GE(parity, 0);
      const bool same = a.chirality == b.chirality;
      EXPECT_EQ(same, parity == 0) << written;
    }
  }
}

TEST(CanonicalSmiles, InvariantUnderAtomOrder) {
  util::Rng rng(7);
  EXPECT_EQ(canonical_smiles(parse_smiles("OCC")), canonical_smiles(parse_smiles("CCO")));
  const auto rows = read_tsv(data_path("parse_oracle.tsv"));
  for (std::size_t r = 0; r < rows.size(); r += 3) {
    const MolGraph m = parse_smiles(rows[r][0]);
    const std::string reference = canonical_smiles(m);
    for (int trial = 0; trial < 3; ++trial) {
      std::vector<int> ranks(m.num_atoms());
      std::iota(ranks.begin(), ranks.end(), 0);
      rng.shuffle(ranks);
      WriteOptions opt;
      opt.ranks = &ranks;
      const MolGraph alias = parse_smiles(write_smiles(m, opt));
      EXPECT_EQ(canonical_smiles(alias), reference) << rows[r][0];
    }
  }
}

// Random well-formed SMILES over a small grammar: chains, branches and
// uniquely numbered ring closures on sp3 carbons/nitrogens/oxygens.
struct GeneratedSmiles {
  std::string text;
  std::vector<std::size_t> open_parens, close_parens, ring_digits;
};

GeneratedSmiles generate_smiles(util::Rng& rng) {
  GeneratedSmiles g;
  int next_ring = 1;
  int atoms = 0;
  std::vector<std::pair<int, int>> open_rings;  // (digit, atom count when opened)
  std::function<void(int, int)> chain = [&](int length, int depth) {
    for (int i = 0; i < length; ++i) {
      const int kind = static_cast<int>(rng.below(3));
      g.text += kind == 0 ? "C" : kind == 1 ? "N" : "O";
      ++atoms;
      if (kind == 2) continue;  // oxygen: no branches or rings here
      if (next_ring < 10 && rng.below(4) == 0 && open_rings.size() < 2) {
        g.ring_digits.push_back(g.text.size());
        g.text += std::to_string(next_ring);
        open_rings.push_back({next_ring++, atoms});
      } else if (!open_rings.empty() && rng.below(3) == 0 && atoms - open_rings.back().second >= 2) {
        g.ring_digits.push_back(g.text.size());
        g.text += std::to_string(open_rings.back().first);
        open_rings.pop_back();
      } else if (kind == 0 && depth < 3 && rng.below(3) == 0 && i + 1 < length) {
        g.open_parens.push_back(g.text.size());
        g.text += "(";
        chain(1 + static_cast<int>(rng.below(3)), depth + 1);
        g.close_parens.push_back(g.text.size());
        g.text += ")";
      }
    }
  };
  chain(3 + static_cast<int>(rng.below(8)), 0);
  while (!open_rings.empty()) {
    // close remaining rings on fresh carbons, at least two atoms later
    g.text += "CC";
    g.ring_digits.push_back(g.text.size());
    g.text += std::to_string(open_rings.back().first);
    open_rings.pop_back();
  }
  return g;
}

TEST(GrammarFuzz, WellFormedAlwaysParses) {
  util::Rng rng(2024);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto g = generate_smiles(rng);
    EXPECT_NO_THROW(parse_smiles(g.text)) << g.text;
  }
}

TEST(GrammarFuzz, BrokenBalanceYieldsMatchingError) {
  util::Rng rng(99);
  int paren_cases = 0, ring_cases = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    const auto g = generate_smiles(rng);
    if (!g.open_parens.empty()) {
      std::string broken = g.text;
      const bool drop_open = rng.below(2) == 0;
      const std::size_t k = rng.below(g.open_parens.size());
      broken.erase(drop_open ? g.open_parens[k] : g.close_parens[k], 1);
      EXPECT_EQ(parse_error(broken), Errc::UnbalancedParenthesis) << broken;
      ++paren_cases;
    }
    if (!g.ring_digits.empty()) {
      std::string broken = g.text;
      broken.erase(g.ring_digits[rng.below(g.ring_digits.size())], 1);
      EXPECT_EQ(parse_error(broken), Errc::UnclosedRingBond) << broken;
      ++ring_cases;
    }
  }
  EXPECT_GT(paren_cases, 100);
  EXPECT_GT(ring_cases, 100);
}

TEST(Featurize, EthanolOriginal) {
  const FeaturizedGraph g = featurize(parse_smiles("CCO"), FeatureSet::Original);
  ASSERT_EQ(g.n_atoms, 3);
  ASSERT_EQ(g.n_node_features, 2);
  const int unspec = chirality_code(Chirality::Unspecified);
  EXPECT_EQ(g.node_codes, (std::vector<int>{6, unspec, 6, unspec, 8, unspec}));
  ASSERT_EQ(g.n_arcs, 4);
  for (int arc = 0; arc < g.n_arcs; ++arc) {
    EXPECT_EQ(g.edge(arc)[kBondType], bond_type_code(BondOrder::Single));
    EXPECT_EQ(g.edge(arc)[kBondDir], bond_dir_code(BondDirection::None));
  }
}

TEST(Featurize, BenzeneExtended) {
  const FeaturizedGraph g = featurize(parse_smiles("c1ccccc1"), FeatureSet::Extended);
  for (int a = 0; a < g.n_atoms; ++a) {
    EXPECT_EQ(g.node(a)[kAromatic], 2);      // aromatic = 1
    EXPECT_EQ(g.node(a)[kDegree], 1 + 2);    // degree 2
    EXPECT_EQ(g.node(a)[kHydrogen], 1 + 1);  // one hydrogen
  }
}

TEST(Featurize, OutOfRange) {
  EXPECT_THROW(
      {
        try {
          featurize(parse_smiles("[C-6]"), FeatureSet::Extended);
        } catch (const Error& e) {
          EXPECT_EQ(e.code(), Errc::InvalidSyntax);
          throw;
        }
      },
      Error);
  // 11 neighbours around a metal centre exceeds the degree range
  MolGraph m = parse_smiles("[U](C)(C)(C)(C)(C)(C)(C)(C)(C)(C)C");
  try {
    featurize(m, FeatureSet::Extended);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::FeatureOutOfRange);
  }
  EXPECT_NO_THROW(featurize(m, FeatureSet::Original));
}

TEST(Featurize, TotalOverCorpusAndArcSymmetry) {
  const auto entries = read_corpus_file(std::string(MOLCL_DATA_DIR) + "/desk512.smi");
  ASSERT_EQ(entries.size(), 512u);
  for (const auto& mol : parse_corpus(entries)) {
    for (FeatureSet fs : {FeatureSet::Original, FeatureSet::Extended}) {
      const FeaturizedGraph g = featurize(mol, fs);
      const auto nv = node_vocab_sizes(fs);
      const auto ev = edge_vocab_sizes(fs);
      for (int a = 0; a < g.n_atoms; ++a) {
        for (int f = 0; f < g.n_node_features; ++f) {
          EXPECT_GT(g.node(a)[f], kMaskCode);
          EXPECT_LT(g.node(a)[f], nv[f]);
        }
      }
      std::multiset<std::pair<int, int>> arcs, reversed;
      for (int e = 0; e < g.n_arcs; ++e) {
        for (int f = 0; f < g.n_edge_features; ++f) EXPECT_LT(g.edge(e)[f], ev[f]);
        arcs.insert({g.arc_src[e], g.arc_dst[e]});
        reversed.insert({g.arc_dst[e], g.arc_src[e]});
      }
      EXPECT_EQ(arcs, reversed);
      EXPECT_EQ(g.n_arcs, 2 * mol.num_bonds());
    }
  }
}

TEST(Corpus, SkipsCommentsAndNames) {
  std::istringstream in("# header\nCCO ethanol\n\nc1ccccc1\n");
  const auto entries = read_corpus(in);
  ASSERT_EQ(entries.size(), 2u);
  EXPECT_EQ(entries[0].line, 2);
  EXPECT_EQ(entries[0].smiles, "CCO");
  EXPECT_EQ(entries[1].line, 4);
}

}  // namespace
}  // namespace molcl::chem
