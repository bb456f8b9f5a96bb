// Copyright 2026 The molcl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "molcl/chem/corpus.hpp"
#include "molcl/chem/featurize.hpp"
#include "molcl/chem/smiles.hpp"
#include "molcl/error.hpp"
#include "molcl/nn/checkpoint.hpp"
#include "molcl/nn/encoder.hpp"
#include "molcl/train/dataset.hpp"

namespace molcl::train {

/// Graph representations h_G, one row per graph, computed in chunks.
template <class T>
nn::Mat<T> embed_graphs(const nn::GinModel<T>& m, const std::vector<chem::FeaturizedGraph>& graphs) {
  nn::Mat<T> out(static_cast<Eigen::Index>(graphs.size()), m.config.d);
  const std::size_t chunk = 256;
  for (std::size_t b = 0; b < graphs.size(); b += chunk) {
    const std::size_t e = std::min(graphs.size(), b + chunk);
    std::vector<const chem::FeaturizedGraph*> gs;
    for (std::size_t i = b; i < e; ++i) gs.push_back(&graphs[i]);
    const nn::GraphBatch batch = nn::make_batch(gs);
    out.middleRows(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(e - b)) =
        nn::readout_graph(nn::encode(m, batch), batch);
  }
  return out;
}

template <class T>
nn::Mat<T> embed_molecules(const nn::GinModel<T>& m, const std::vector<chem::MolGraph>& mols) {
  std::vector<chem::FeaturizedGraph> gs;
  gs.reserve(mols.size());
  for (const auto& mol : mols) gs.push_back(chem::featurize(mol, m.config.feature_set));
  return embed_graphs(m, gs);
}

struct EmbeddingTable {
  std::uint64_t checkpoint_hash = 0;
  int d = 0;
  std::vector<int> lines;
  std::vector<std::string> smiles;
  nn::Mat<float> h;  // rows x d

  std::size_t size() const { return lines.size(); }
};

inline std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

inline EmbeddingTable embed_corpus(const nn::GinModel<float>& m, std::uint64_t checkpoint_hash,
                                   const std::vector<chem::CorpusEntry>& corpus) {
  EmbeddingTable t;
  t.checkpoint_hash = checkpoint_hash;
  t.d = m.config.d;
  const auto mols = chem::parse_corpus(corpus);
  for (const auto& e : corpus) {
    t.lines.push_back(e.line);
    t.smiles.push_back(e.smiles);
  }
  t.h = embed_molecules(m, mols);
  return t;
}

/// CSV: a `# checkpoint_fnv1a64=<hex> d=<d>` line, a header
/// `line,smiles,h0..h{d-1}`, then one row per molecule (floats as %.9g).
inline std::string embedding_csv(const EmbeddingTable& t) {
  std::string out = "# checkpoint_fnv1a64=" + hash_hex(t.checkpoint_hash) + " d=" + std::to_string(t.d) + "\n";
  out += "line,smiles";
  for (int k = 0; k < t.d; ++k) out += ",h" + std::to_string(k);
  out += "\n";
  char buf[32];
  for (std::size_t i = 0; i < t.size(); ++i) {
    out += std::to_string(t.lines[i]) + "," + t.smiles[i];
    for (int k = 0; k < t.d; ++k) {
      std::snprintf(buf, sizeof buf, ",%.9g", static_cast<double>(t.h(static_cast<Eigen::Index>(i), k)));
      out += buf;
    }
    out += "\n";
  }
  return out;
}

inline EmbeddingTable parse_embedding_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  EmbeddingTable t;
  if (!std::getline(in, line) || std::sscanf(line.c_str(), "# checkpoint_fnv1a64=%" SCNx64 " d=%d", &t.checkpoint_hash, &t.d) != 2 ||
      t.d < 1) {
    throw Error(Errc::InvalidSyntax, "embedding table: missing '# checkpoint_fnv1a64=... d=...' line");
  }
  if (!std::getline(in, line) || line.rfind("line,smiles", 0) != 0) {
    throw Error(Errc::InvalidSyntax, "embedding table: missing header row");
  }
  std::vector<float> values;
  int lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != static_cast<std::size_t>(t.d) + 2) {
      throw Error(Errc::InvalidSyntax, "embedding table line " + std::to_string(lineno) + ": expected " +
                                           std::to_string(t.d + 2) + " fields");
    }
    try {
      t.lines.push_back(std::stoi(f[0]));
      for (int k = 0; k < t.d; ++k) values.push_back(std::stof(f[2 + k]));
    } catch (const std::logic_error&) {
      throw Error(Errc::InvalidSyntax, "embedding table line " + std::to_string(lineno) + ": bad number");
    }
    t.smiles.push_back(f[1]);
  }
  t.h = Eigen::Map<nn::Mat<float>>(values.data(), static_cast<Eigen::Index>(t.lines.size()), t.d);
  return t;
}

struct Neighbor {
  int rank = 0;
  double cosine = 0.0;
  int line = 0;
  std::string smiles;
};

/// Top-k rows by cosine similarity to `query` (descending; ties by line).
inline std::vector<Neighbor> nearest(const EmbeddingTable& t, const nn::Mat<double>& query, int k) {
  if (k < 1 || static_cast<std::size_t>(k) > t.size()) {
    throw Error(Errc::DomainError, "k must lie in [1, " + std::to_string(t.size()) + "]");
  }
  if (query.cols() != t.d) throw Error(Errc::ShapeMismatch, "query width differs from the table");
  const double qn = query.norm();
  std::vector<Neighbor> all(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const nn::Mat<double> row = t.h.row(static_cast<Eigen::Index>(i)).cast<double>();
    const double rn = row.norm();
    all[i].cosine = (qn > 0.0 && rn > 0.0) ? row.row(0).dot(query.row(0)) / (qn * rn) : 0.0;
    all[i].line = t.lines[i];
    all[i].smiles = t.smiles[i];
  }
  std::stable_sort(all.begin(), all.end(), [](const Neighbor& a, const Neighbor& b) {
    if (a.cosine != b.cosine) return a.cosine > b.cosine;
    return a.line < b.line;
  });
  all.resize(k);
  for (int r = 0; r < k; ++r) all[r].rank = r + 1;
  return all;
}

/// Encodes `smiles` with the checkpoint and ranks the table against it. The
/// table must have been produced by the same checkpoint.
inline std::vector<Neighbor> similar(const EmbeddingTable& t, const std::string& checkpoint_bytes,
                                     const std::string& smiles, int k) {
  if (util::fnv1a64(checkpoint_bytes) != t.checkpoint_hash) {
    throw Error(Errc::CheckpointFormat, "embedding table was produced by a different checkpoint");
  }
  const auto model = nn::parse_checkpoint(checkpoint_bytes);
  if (model.config.d != t.d) throw Error(Errc::ShapeMismatch, "checkpoint width differs from the table");
  const auto h = embed_molecules(model, {chem::parse_smiles(smiles)});
  return nearest(t, h.cast<double>(), k);
}

}  // namespace molcl::train
