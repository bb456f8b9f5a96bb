// Copyright 2026 The molcl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "molcl/chem/mol_graph.hpp"
#include "molcl/error.hpp"
#include "molcl/util/rng.hpp"

namespace molcl {

inline constexpr int kDefaultRadius = 2;
inline constexpr int kDefaultBits = 2048;

/// Fixed-width bit vector produced by ecfp().
class Fingerprint {
 public:
  Fingerprint() = default;
  Fingerprint(int nbits, int radius) : nbits_(nbits), radius_(radius), words_((nbits + 63) / 64) {}

  int nbits() const { return nbits_; }
  int radius() const { return radius_; }

  bool test(int bit) const { return (words_[bit >> 6] >> (bit & 63)) & 1u; }
  void set(int bit) { words_[bit >> 6] |= std::uint64_t{1} << (bit & 63); }

  int popcount() const {
    int n = 0;
    for (std::uint64_t w : words_) n += std::popcount(w);
    return n;
  }

  std::vector<int> on_bits() const {
    std::vector<int> out;
    for (int b = 0; b < nbits_; ++b) {
      if (test(b)) out.push_back(b);
    }
    return out;
  }

  const std::vector<std::uint64_t>& words() const { return words_; }

  /// Lowercase hex, two characters per byte; byte k holds bits 8k..8k+7 with
  /// bit 8k as its least significant bit.
  std::string to_hex() const {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out;
    out.reserve(nbits_ / 4);
    for (int byte = 0; byte < nbits_ / 8; ++byte) {
      const unsigned v = (words_[byte / 8] >> (8 * (byte % 8))) & 0xffu;
      out += kDigits[v >> 4];
      out += kDigits[v & 15];
    }
    return out;
  }

  static Fingerprint from_hex(std::string_view hex, int radius = kDefaultRadius) {
    auto nibble = [](char c) -> int {
      if (c >= '0' && c <= '9') return c - '0';
      if (c >= 'a' && c <= 'f') return c - 'a' + 10;
      if (c >= 'A' && c <= 'F') return c - 'A' + 10;
      throw Error(Errc::InvalidSyntax, std::string("bad hex digit '") + c + "'");
    };
    if (hex.size() % 2 != 0) throw Error(Errc::InvalidSyntax, "odd-length fingerprint hex");
    Fingerprint fp(static_cast<int>(hex.size()) * 4, radius);
    for (std::size_t byte = 0; byte < hex.size() / 2; ++byte) {
      const std::uint64_t v = nibble(hex[2 * byte]) * 16 + nibble(hex[2 * byte + 1]);
      fp.words_[byte / 8] |= v << (8 * (byte % 8));
    }
    return fp;
  }

  friend bool operator==(const Fingerprint&, const Fingerprint&) = default;

 private:
  int nbits_ = 0;
  int radius_ = 0;
  std::vector<std::uint64_t> words_;
};

namespace detail {

// Identifiers are built by folding 64-bit words through splitmix64:
// h' = splitmix64(h ^ splitmix64(word + kEcfpSalt)), starting from kEcfpSeed.
inline constexpr std::uint64_t kEcfpSeed = 0x45434650ULL;  // "ECFP"
inline constexpr std::uint64_t kEcfpSalt = 0x2545f4914f6cdd1dULL;

inline std::uint64_t mix(std::uint64_t h, std::uint64_t word) {
  return util::splitmix64(h ^ util::splitmix64(word + kEcfpSalt));
}

inline std::uint64_t encode_signed(int v) { return static_cast<std::uint64_t>(static_cast<std::int64_t>(v)); }

inline std::uint64_t bond_code(chem::BondOrder o) {
  switch (o) {
    case chem::BondOrder::Single: return 1;
    case chem::BondOrder::Double: return 2;
    case chem::BondOrder::Triple: return 3;
    case chem::BondOrder::Aromatic: return 4;
  }
  return 1;
}

inline std::uint64_t initial_invariant(const chem::Atom& a) {
  std::uint64_t h = kEcfpSeed;
  h = mix(h, static_cast<std::uint64_t>(a.atomic_number));
  h = mix(h, encode_signed(a.formal_charge));
  h = mix(h, static_cast<std::uint64_t>(a.degree));
  h = mix(h, static_cast<std::uint64_t>(a.total_h()));
  h = mix(h, a.in_ring ? 1 : 0);
  h = mix(h, a.aromatic ? 1 : 0);
  return h;
}

inline bool valid_width(int nbits) { return nbits >= 64 && std::has_single_bit(static_cast<unsigned>(nbits)); }

}  // namespace detail

/// Every identifier of every iteration 0..radius, in atom order per iteration.
inline std::vector<std::uint64_t> ecfp_identifiers(const chem::MolGraph& mol, int radius) {
  if (radius < 0) throw Error(Errc::DomainError, "ecfp radius must be >= 0");
  const int n = mol.num_atoms();
  std::vector<std::uint64_t> ids(n), all;
  all.reserve(static_cast<std::size_t>(n) * (radius + 1));
  for (int i = 0; i < n; ++i) ids[i] = detail::initial_invariant(mol.atoms[i]);
  all.insert(all.end(), ids.begin(), ids.end());
  std::vector<std::pair<std::uint64_t, std::uint64_t>> env;
  for (int r = 1; r <= radius; ++r) {
    std::vector<std::uint64_t> next(n);
    for (int i = 0; i < n; ++i) {
      env.clear();
      for (const chem::Neighbor& nb : mol.neighbors(i)) {
        env.emplace_back(detail::bond_code(mol.bonds[nb.bond].order), ids[nb.atom]);
      }
      std::sort(env.begin(), env.end());
      std::uint64_t h = detail::mix(detail::kEcfpSeed, static_cast<std::uint64_t>(r));
      h = detail::mix(h, ids[i]);
      for (const auto& [code, id] : env) h = detail::mix(detail::mix(h, code), id);
      next[i] = h;
    }
    ids = std::move(next);
    all.insert(all.end(), ids.begin(), ids.end());
  }
  return all;
}

/// Binary Morgan fingerprint; identifiers are folded by their low bits.
inline Fingerprint ecfp(const chem::MolGraph& mol, int radius = kDefaultRadius, int nbits = kDefaultBits) {
  if (!detail::valid_width(nbits)) {
    throw Error(Errc::DomainError, "nbits must be a power of two >= 64, got " + std::to_string(nbits));
  }
  Fingerprint fp(nbits, radius);
  const std::uint64_t mask = static_cast<std::uint64_t>(nbits) - 1;
  for (std::uint64_t id : ecfp_identifiers(mol, radius)) fp.set(static_cast<int>(id & mask));
  return fp;
}

/// |a & b| / |a | b|, and 1.0 for two empty fingerprints.
inline double tanimoto(const Fingerprint& a, const Fingerprint& b) {
  if (a.nbits() != b.nbits()) {
    throw Error(Errc::WidthMismatch, "fingerprint widths " + std::to_string(a.nbits()) + " and " +
                                         std::to_string(b.nbits()));
  }
  int both = 0, either = 0;
  for (std::size_t w = 0; w < a.words().size(); ++w) {
    both += std::popcount(a.words()[w] & b.words()[w]);
    either += std::popcount(a.words()[w] | b.words()[w]);
  }
  return either == 0 ? 1.0 : static_cast<double>(both) / either;
}

/// Down-weighting of a negative pair: 1 - lambda1 * sim.
inline double neg_weight(double sim, double lambda1) {
  if (!(sim >= 0.0 && sim <= 1.0)) throw Error(Errc::DomainError, "similarity outside [0,1]");
  if (!(lambda1 >= 0.0 && lambda1 <= 1.0)) throw Error(Errc::DomainError, "lambda1 outside [0,1]");
  return 1.0 - lambda1 * sim;
}

/// 2N x 2N weights over a batch of N molecules whose two views sit in
/// adjacent rows: rows 2n and 2n + 1 both come from molecule n.
struct NegWeightMatrix {
  int n = 0;  // 2N
  double lambda1 = 0.0;
  std::vector<double> w;

  double operator()(int i, int k) const { return w[static_cast<std::size_t>(i) * n + k]; }
};

inline NegWeightMatrix build_weight_matrix(const std::vector<Fingerprint>& fps, double lambda1) {
  if (fps.empty()) throw Error(Errc::EmptyDataset, "weight matrix over an empty batch");
  const int m = static_cast<int>(fps.size());
  std::vector<double> sim(static_cast<std::size_t>(m) * m);
  for (int i = 0; i < m; ++i) {
    sim[static_cast<std::size_t>(i) * m + i] = neg_weight(tanimoto(fps[i], fps[i]), lambda1);
    for (int k = i + 1; k < m; ++k) {
      const double v = neg_weight(tanimoto(fps[i], fps[k]), lambda1);
      sim[static_cast<std::size_t>(i) * m + k] = v;
      sim[static_cast<std::size_t>(k) * m + i] = v;
    }
  }
  NegWeightMatrix out;
  out.n = 2 * m;
  out.lambda1 = lambda1;
  out.w.resize(static_cast<std::size_t>(out.n) * out.n);
  for (int i = 0; i < out.n; ++i) {
    for (int k = 0; k < out.n; ++k) {
      out.w[static_cast<std::size_t>(i) * out.n + k] = sim[static_cast<std::size_t>(i / 2) * m + k / 2];
    }
  }
  return out;
}

inline NegWeightMatrix build_weight_matrix(const std::vector<chem::MolGraph>& mols, double lambda1,
                                           int radius = kDefaultRadius, int nbits = kDefaultBits) {
  std::vector<Fingerprint> fps;
  fps.reserve(mols.size());
  for (const auto& m : mols) fps.push_back(ecfp(m, radius, nbits));
  return build_weight_matrix(fps, lambda1);
}

}  // namespace molcl
