// Copyright 2026 The molcl Authors
// SPDX-License-Identifier: Apache-2.0

#include "molcl/fingerprint.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <iterator>
#include <set>
#include <string>
#include <vector>

#include "molcl/chem/corpus.hpp"
#include "molcl/chem/smiles.hpp"
#include "molcl/util/rng.hpp"

namespace molcl {
namespace {

using chem::parse_smiles;

Fingerprint from_bits(int nbits, std::initializer_list<int> bits) {
  Fingerprint fp(nbits, 0);
  for (int b : bits) fp.set(b);
  return fp;
}

std::vector<chem::MolGraph> corpus() {
  static const auto mols =
      chem::parse_corpus(chem::read_corpus_file(std::string(MOLCL_DATA_DIR) + "/desk512.smi"));
  return mols;
}

TEST(Ecfp, RadiusZeroCounts) {
  EXPECT_EQ(ecfp(parse_smiles("c1ccccc1"), 0, 2048).popcount(), 1);
  // CH3 (deg 1, 3H), CH2 (deg 2, 2H), OH: three distinct invariants
  EXPECT_EQ(ecfp(parse_smiles("CCO"), 0, 2048).popcount(), 3);
}

TEST(Ecfp, Deterministic) {
  const auto m = parse_smiles("CC(=O)Nc1ccc(O)cc1");
  EXPECT_EQ(ecfp(m, 2, 2048), ecfp(m, 2, 2048));
  // frozen value guards cross-platform stability of the hash
  EXPECT_EQ(ecfp(parse_smiles("CCO"), 1, 64).to_hex(), "00000002000a8014");
}

TEST(Ecfp, PopcountBoundedByIdentifiers) {
  for (const auto& m : corpus()) {
    const auto fp = ecfp(m, 2, 2048);
    EXPECT_LE(fp.popcount(), 3 * m.num_atoms());
    EXPECT_GE(fp.popcount(), 1);
  }
}

TEST(Ecfp, AliasInvariance) {
  const std::vector<std::pair<std::string, std::string>> aliases = {
      {"OCC", "CCO"},
      {"Cc1ccccc1", "c1ccccc1C"},
      {"CC(=O)Oc1ccccc1C(=O)O", "OC(=O)c1ccccc1OC(C)=O"},
      {"C1CCNCC1", "N1CCCCC1"},
      {"c1ccc2ccccc2c1", "c1cc2ccccc2cc1"},
  };
  for (const auto& [a, b] : aliases) {
    EXPECT_EQ(ecfp(parse_smiles(a)), ecfp(parse_smiles(b))) << a << " vs " << b;
  }
}

TEST(Ecfp, FoldIsMonotone) {
  for (const auto& m : corpus()) {
    int prev = 0;
    for (int nbits = 64; nbits <= 4096; nbits *= 2) {
      const int pc = ecfp(m, 2, nbits).popcount();
      EXPECT_GE(pc, prev);
      prev = pc;
    }
  }
}

TEST(Ecfp, RejectsBadWidth) {
  const auto m = parse_smiles("CC");
  EXPECT_THROW(ecfp(m, 2, 100), Error);
  EXPECT_THROW(ecfp(m, 2, 32), Error);
  EXPECT_THROW(ecfp(m, -1, 2048), Error);
}

TEST(Fingerprint, HexRoundTrip) {
  const auto fp = ecfp(parse_smiles("CC(=O)Nc1ccc(O)cc1"), 2, 256);
  const std::string hex = fp.to_hex();
  EXPECT_EQ(hex.size(), 64u);
  EXPECT_EQ(Fingerprint::from_hex(hex, 2), fp);
  EXPECT_EQ(from_bits(64, {0, 9}).to_hex(), "0102000000000000");
}

TEST(Tanimoto, Examples) {
  const auto a = from_bits(64, {1, 2, 3});
  const auto b = from_bits(64, {2, 3, 4});
  EXPECT_DOUBLE_EQ(tanimoto(a, b), 0.5);
  EXPECT_DOUBLE_EQ(tanimoto(a, a), 1.0);
  EXPECT_DOUBLE_EQ(tanimoto(a, from_bits(64, {10, 11})), 0.0);
  EXPECT_DOUBLE_EQ(tanimoto(Fingerprint(64, 0), Fingerprint(64, 0)), 1.0);
  try {
    tanimoto(a, Fingerprint(128, 0));
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::WidthMismatch);
  }
}

// Set-based recomputation over random corpus pairs.
TEST(Tanimoto, MatchesSetOracle) {
  const auto mols = corpus();
  util::Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const auto& ma = mols[rng.below(mols.size())];
    const auto& mb = mols[rng.below(mols.size())];
    const auto fa = ecfp(ma, 2, 1024);
    const auto fb = ecfp(mb, 2, 1024);
    const auto ba = fa.on_bits();
    const auto bb = fb.on_bits();
    std::set<int> sa(ba.begin(), ba.end()), sb(bb.begin(), bb.end()), inter, uni;
    std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::inserter(inter, inter.end()));
    std::set_union(sa.begin(), sa.end(), sb.begin(), sb.end(), std::inserter(uni, uni.end()));
    const double expected = static_cast<double>(inter.size()) / static_cast<double>(uni.size());
    const double t = tanimoto(fa, fb);
    EXPECT_DOUBLE_EQ(t, expected);
    EXPECT_DOUBLE_EQ(t, tanimoto(fb, fa));
    EXPECT_GE(t, 0.0);
    EXPECT_LE(t, 1.0);
    EXPECT_DOUBLE_EQ(tanimoto(fa, fa), 1.0);
  }
}

TEST(Tanimoto, SubstituentOrdering) {
  const auto toluene = ecfp(parse_smiles("Cc1ccccc1"));
  const auto xylene = ecfp(parse_smiles("Cc1ccccc1C"));
  const auto cyclohexane = ecfp(parse_smiles("C1CCCCC1"));
  // toluene and o-xylene share the methyl, ipso carbon and most ring
  // environments; cyclohexane shares no aromatic identifier at all
  EXPECT_GT(tanimoto(toluene, xylene), tanimoto(toluene, cyclohexane));
  EXPECT_DOUBLE_EQ(tanimoto(toluene, cyclohexane), 0.0);
}

TEST(NegWeight, Examples) {
  EXPECT_DOUBLE_EQ(neg_weight(1.0, 0.5), 0.5);
  EXPECT_DOUBLE_EQ(neg_weight(0.0, 0.7), 1.0);
  EXPECT_DOUBLE_EQ(neg_weight(0.3, 0.0), 1.0);
  for (auto [s, l] : {std::pair{-0.1, 0.5}, {1.1, 0.5}, {0.5, -0.1}, {0.5, 1.5}}) {
    try {
      neg_weight(s, l);
      ADD_FAILURE();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::DomainError);
    }
  }
}

TEST(WeightMatrix, Structure) {
  const std::vector<chem::MolGraph> mols = {parse_smiles("Cc1ccccc1"), parse_smiles("Cc1ccccc1C"),
                                            parse_smiles("C1CCCCC1"), parse_smiles("CCO")};
  const double lambda1 = 0.5;
  const auto w = build_weight_matrix(mols, lambda1);
  const int n = 4;
  ASSERT_EQ(w.n, 2 * n);
  for (int i = 0; i < w.n; ++i) {
    for (int k = 0; k < w.n; ++k) {
      EXPECT_DOUBLE_EQ(w(i, k), w(k, i));
      EXPECT_GE(w(i, k), 1.0 - lambda1);
      EXPECT_LE(w(i, k), 1.0);
    }
    EXPECT_DOUBLE_EQ(w(i, i ^ 1), 1.0 - lambda1);
  }
  EXPECT_DOUBLE_EQ(w(0, 4), 1.0);  // toluene vs cyclohexane share nothing
  EXPECT_DOUBLE_EQ(w(0, 2), neg_weight(tanimoto(ecfp(mols[0]), ecfp(mols[1])), lambda1));
  EXPECT_DOUBLE_EQ(w(1, 3), w(0, 2));
}

}  // namespace
}  // namespace molcl
