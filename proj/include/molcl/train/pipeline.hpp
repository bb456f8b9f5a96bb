// Copyright 2026 The molcl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "molcl/augment.hpp"
#include "molcl/chem/canon.hpp"
#include "molcl/chem/corpus.hpp"
#include "molcl/chem/featurize.hpp"
#include "molcl/chem/smiles.hpp"
#include "molcl/error.hpp"
#include "molcl/fingerprint.hpp"
#include "molcl/fragment.hpp"
#include "molcl/loss.hpp"
#include "molcl/nn/encoder.hpp"
#include "molcl/util/parallel.hpp"
#include "molcl/util/rng.hpp"

namespace molcl::train {

/// Everything pre-training needs about one molecule, computed once.
struct MolEntry {
  int line = 0;
  std::string smiles;
  std::string key;  // canonical SMILES
  chem::MolGraph mol;
  chem::FeaturizedGraph graph;
  FragmentMap fragments;
  Fingerprint fp;
};

struct PrepOptions {
  chem::FeatureSet feature_set = chem::FeatureSet::Original;
  int radius = 2;
  int nbits = 2048;
  const BricsRules* rules = nullptr;  // null = built-in table
  int workers = 1;
};

namespace detail {

inline void fill_derived(MolEntry& e, const PrepOptions& opt) {
  e.graph = chem::featurize(e.mol, opt.feature_set);
  e.fragments = brics_partition(e.mol, opt.rules ? *opt.rules : default_brics_rules());
  e.fp = ecfp(e.mol, opt.radius, opt.nbits);
}

}  // namespace detail

/// Parses and featurizes a corpus. Molecules with the same canonical SMILES
/// share one cached entry (the first occurrence), so fingerprints, fragment
/// maps and featurized graphs are computed once per distinct molecule.
/// Parse failures name their line number.
inline std::vector<MolEntry> prepare_corpus(const std::vector<chem::CorpusEntry>& corpus, const PrepOptions& opt) {
  const int n = static_cast<int>(corpus.size());
  std::vector<MolEntry> out(n);
  util::parallel_for(n, opt.workers, [&](int i) {
    MolEntry& e = out[i];
    e.line = corpus[i].line;
    e.smiles = corpus[i].smiles;
    try {
      e.mol = chem::parse_smiles(e.smiles);
    } catch (const Error& err) {
      throw Error(err.code(), "line " + std::to_string(e.line) + ": " + err.message());
    }
    e.key = chem::canonical_smiles(e.mol);
  });
  std::unordered_map<std::string, int> first;
  std::vector<int> unique;
  for (int i = 0; i < n; ++i) {
    if (first.emplace(out[i].key, i).second) unique.push_back(i);
  }
  util::parallel_for(static_cast<int>(unique.size()), opt.workers,
                     [&](int u) { detail::fill_derived(out[unique[u]], opt); });
  for (int i = 0; i < n; ++i) {
    const int src = first.at(out[i].key);
    if (src == i) continue;
    const int line = out[i].line;
    const std::string smiles = out[i].smiles;
    out[i] = out[src];
    out[i].line = line;
    out[i].smiles = smiles;
  }
  return out;
}

/// Recomputes a deterministic sample of ~1% of entries (at least one) from
/// their SMILES and checks the cached values agree. Returns the count checked.
inline int spot_check_cache(const std::vector<MolEntry>& entries, const PrepOptions& opt, std::uint64_t seed) {
  if (entries.empty()) return 0;
  const int n = static_cast<int>(entries.size());
  const int k = std::max(1, n / 100);
  util::Rng rng(seed);
  const auto picks = rng.sample_without_replacement(n, k);
  for (int i : picks) {
    const MolEntry& cached = entries[i];
    MolEntry fresh;
    fresh.mol = chem::parse_smiles(cached.smiles);
    fresh.key = chem::canonical_smiles(fresh.mol);
    if (fresh.key != cached.key) {
      throw Error(Errc::DomainError, "cache check: canonical key differs for line " + std::to_string(cached.line));
    }
    // Compare in canonical-identity terms: the cached entry may come from a
    // differently written duplicate, so compare against the cached molecule.
    MolEntry again;
    again.mol = cached.mol;
    detail::fill_derived(again, opt);
    if (!(again.fp.words() == cached.fp.words()) || again.fragments.assignment != cached.fragments.assignment ||
        again.fragments.n_fragments != cached.fragments.n_fragments ||
        again.graph.node_codes != cached.graph.node_codes || again.graph.edge_codes != cached.graph.edge_codes) {
      throw Error(Errc::DomainError, "cache check: cached features differ for line " + std::to_string(cached.line));
    }
    if (!(ecfp(fresh.mol, opt.radius, opt.nbits).words() == cached.fp.words())) {
      throw Error(Errc::DomainError, "cache check: fingerprint differs for line " + std::to_string(cached.line));
    }
  }
  return static_cast<int>(picks.size());
}

/// One contrastive batch: N source molecules, 2N augmented views with view
/// i drawn from molecule i / 2 (0-based), per-pair negative weights, and the
/// fragment rows (2 per fragment, adjacent) pooled from each view.
struct BatchPlan {
  std::uint64_t seed = 0;
  std::vector<int> sources;  // N entry indices
  std::vector<chem::FeaturizedGraph> views;
  NegWeightMatrix weights;
  FragmentPairIndex pairs;
  nn::GraphBatch batch;
  nn::FragmentRows frag_rows;

  int n_molecules() const { return static_cast<int>(sources.size()); }
  int source_of_view(int i) const { return sources[i / 2]; }
};

inline BatchPlan make_batch_plan(const std::vector<MolEntry>& entries, std::span<const int> sources,
                                 std::uint64_t batch_seed, double lambda1, int workers = 1) {
  if (sources.empty()) throw Error(Errc::EmptyDataset, "batch has no molecules");
  BatchPlan p;
  p.seed = batch_seed;
  p.sources.assign(sources.begin(), sources.end());
  const int n = p.n_molecules();
  p.views.resize(2 * n);
  util::parallel_for(2 * n, workers, [&](int i) {
    const MolEntry& e = entries[p.sources[i / 2]];
    const AugSpec spec = sample_augmentation(e.graph.n_atoms, e.graph.n_bonds, view_seed(batch_seed, i / 2, i % 2));
    p.views[i] = apply(e.graph, spec);
  });
  std::vector<Fingerprint> fps;
  fps.reserve(n);
  for (int s : p.sources) fps.push_back(entries[s].fp);
  p.weights = build_weight_matrix(fps, lambda1);
  p.batch = nn::make_batch(p.views);
  int offset = 0;
  for (int m = 0; m < n; ++m) {
    const FragmentMap& fm = entries[p.sources[m]].fragments;
    for (int v = 0; v < 2; ++v) {
      for (int a : fm.assignment) p.frag_rows.row_of_node.push_back(2 * (offset + a) + v);
    }
    offset += fm.n_fragments;
  }
  p.frag_rows.n_rows = 2 * offset;
  for (int r = 0; r < offset; ++r) p.pairs.pairs.emplace_back(2 * r, 2 * r + 1);
  return p;
}

struct StepLoss {
  double total = 0.0;
  double mol = 0.0;
  double frag = 0.0;
};

/// Forward pass encode -> readout -> project for molecule and fragment
/// latents, weighted molecule loss plus lambda2 * fragment loss. When
/// `grads` is non-null the gradients are accumulated into it.
template <class T>
StepLoss pretrain_loss(const nn::GinModel<T>& m, const BatchPlan& plan, const LossConfig& lc,
                       nn::GinModel<T>* grads = nullptr) {
  nn::EncodeTrace<T> et;
  const nn::Mat<T> h = nn::encode(m, plan.batch, grads ? &et : nullptr);
  const nn::Mat<T> g = nn::readout_graph(h, plan.batch);
  const nn::Mat<T> f = nn::readout_fragments(h, plan.frag_rows);
  nn::MlpTrace<T> tz, tf;
  const nn::Mat<T> z = nn::mlp_forward(m.proj, g, &tz);
  const nn::Mat<T> zf = nn::mlp_forward(nn::fragment_head(m), f, &tf);
  const TotalLoss<T> loss = total_loss(weighted_nt_xent(z, plan.weights, lc.tau, lc.weight_mode),
                                       fragment_nt_xent(zf, plan.pairs, lc.tau), lc.lambda2);
  if (grads) {
    const nn::Mat<T> dg = nn::mlp_backward(m.proj, tz, loss.d_mol, grads->proj);
    const nn::Mat<T> df = nn::mlp_backward(nn::fragment_head(m), tf, loss.d_frag, nn::fragment_head(*grads));
    const nn::Mat<T> dh = nn::segment_mean_backward(dg, plan.batch.graph_of_node) +
                          nn::segment_mean_backward(df, plan.frag_rows.row_of_node);
    nn::encode_backward(m, et, dh, *grads);
  }
  return {loss.value, loss.mol, loss.frag};
}

}  // namespace molcl::train
