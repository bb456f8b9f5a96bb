// Copyright 2026 The molcl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "molcl/chem/featurize.hpp"
#include "molcl/error.hpp"
#include "molcl/util/rng.hpp"

namespace molcl::nn {

// Row-major so that one row is one node / graph / fragment.
template <class T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct ModelConfig {
  int d = 512;   // node / graph representation width
  int dz = 256;  // latent width
  int layers = 5;
  chem::FeatureSet feature_set = chem::FeatureSet::Original;
  int n_targets = 0;  // prediction head outputs; 0 = no head
  bool separate_fragment_head = false;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Two affine maps with a rectifier between: relu(x W1 + b1) W2 + b2.
/// Weights are (in x out); biases are 1 x out.
template <class T>
struct Mlp {
  Mat<T> w1, b1, w2, b2;

  bool empty() const { return w1.size() == 0; }
  int in() const { return static_cast<int>(w1.rows()); }
  int out() const { return static_cast<int>(w2.cols()); }
};

template <class T>
Mlp<T> make_mlp(int in, int hidden, int out) {
  return {Mat<T>::Zero(in, hidden), Mat<T>::Zero(1, hidden), Mat<T>::Zero(hidden, out), Mat<T>::Zero(1, out)};
}

/// Parameters of the encoder and heads. The same type holds gradients.
template <class T>
struct GinModel {
  ModelConfig config;
  std::vector<Mat<T>> node_embeddings;  // one table per node feature, vocab x d
  std::vector<Mat<T>> edge_embeddings;  // one table per edge feature, shared by all layers
  std::vector<Mlp<T>> layers;           // d -> 2d -> d
  Mlp<T> proj;                          // d -> d -> dz
  Mlp<T> frag_proj;                     // empty unless separate_fragment_head
  Mlp<T> pred;                          // d -> d -> n_targets, empty when n_targets == 0
  Mat<T> pred_shift;                    // 1 x d, subtracted from h_G before `pred`
  Mat<T> pred_scale;                    // 1 x d, multiplies the shifted h_G

  /// Tensors in manifest (checkpoint and optimizer) order.
  std::vector<std::pair<std::string, Mat<T>*>> params() {
    std::vector<std::pair<std::string, Mat<T>*>> out;
    for (std::size_t f = 0; f < node_embeddings.size(); ++f) {
      out.emplace_back("node_emb." + std::to_string(f), &node_embeddings[f]);
    }
    for (std::size_t f = 0; f < edge_embeddings.size(); ++f) {
      out.emplace_back("edge_emb." + std::to_string(f), &edge_embeddings[f]);
    }
    auto add_mlp = [&](const std::string& name, Mlp<T>& m) {
      if (m.empty()) return;
      out.emplace_back(name + ".w1", &m.w1);
      out.emplace_back(name + ".b1", &m.b1);
      out.emplace_back(name + ".w2", &m.w2);
      out.emplace_back(name + ".b2", &m.b2);
    };
    for (std::size_t k = 0; k < layers.size(); ++k) add_mlp("layer." + std::to_string(k), layers[k]);
    add_mlp("proj", proj);
    add_mlp("frag_proj", frag_proj);
    add_mlp("pred", pred);
    return out;
  }
  std::vector<std::pair<std::string, const Mat<T>*>> params() const {
    auto mut = const_cast<GinModel*>(this)->params();
    return {mut.begin(), mut.end()};
  }

  /// Fixed (non-trained) tensors: the prediction-head input standardization.
  std::vector<std::pair<std::string, Mat<T>*>> buffers() {
    std::vector<std::pair<std::string, Mat<T>*>> out;
    if (!pred.empty()) {
      out.emplace_back("pred.in_shift", &pred_shift);
      out.emplace_back("pred.in_scale", &pred_scale);
    }
    return out;
  }

  /// params() followed by buffers(); the checkpoint payload order.
  std::vector<std::pair<std::string, Mat<T>*>> tensors() {
    auto out = params();
    for (auto& b : buffers()) out.push_back(b);
    return out;
  }
  std::vector<std::pair<std::string, const Mat<T>*>> tensors() const {
    auto mut = const_cast<GinModel*>(this)->tensors();
    return {mut.begin(), mut.end()};
  }

  std::size_t num_parameters() const {
    std::size_t n = 0;
    for (const auto& [name, p] : params()) n += static_cast<std::size_t>(p->size());
    return n;
  }

  void set_zero() {
    for (auto& [name, p] : params()) p->setZero();
  }

  /// Replaces the prediction head (used when fine-tuning a pre-trained encoder).
  void reset_prediction_head(int n_targets) {
    config.n_targets = n_targets;
    pred = n_targets > 0 ? make_mlp<T>(config.d, config.d, n_targets) : Mlp<T>{};
    reset_prediction_input();
  }

  /// Identity input standardization (shift 0, scale 1); empty without a head.
  void reset_prediction_input() {
    if (pred.empty()) {
      pred_shift = Mat<T>();
      pred_scale = Mat<T>();
    } else {
      pred_shift = Mat<T>::Zero(1, config.d);
      pred_scale = Mat<T>::Ones(1, config.d);
    }
  }
};

/// All-zero model with the shapes implied by `cfg`.
template <class T>
GinModel<T> zero_model(const ModelConfig& cfg) {
  if (cfg.d < 1 || cfg.dz < 1 || cfg.layers < 1 || cfg.n_targets < 0) {
    throw Error(Errc::Config, "model dimensions must be positive");
  }
  GinModel<T> m;
  m.config = cfg;
  for (int v : chem::node_vocab_sizes(cfg.feature_set)) m.node_embeddings.push_back(Mat<T>::Zero(v, cfg.d));
  for (int v : chem::edge_vocab_sizes(cfg.feature_set)) m.edge_embeddings.push_back(Mat<T>::Zero(v, cfg.d));
  for (int k = 0; k < cfg.layers; ++k) m.layers.push_back(make_mlp<T>(cfg.d, 2 * cfg.d, cfg.d));
  m.proj = make_mlp<T>(cfg.d, cfg.d, cfg.dz);
  if (cfg.separate_fragment_head) m.frag_proj = make_mlp<T>(cfg.d, cfg.d, cfg.dz);
  if (cfg.n_targets > 0) m.pred = make_mlp<T>(cfg.d, cfg.d, cfg.n_targets);
  m.reset_prediction_input();
  return m;
}

template <class T>
GinModel<T> zeros_like(const GinModel<T>& model) {
  GinModel<T> g = model;
  g.set_zero();
  return g;
}

namespace detail {

template <class T>
void init_affine(Mat<T>& w, util::Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = static_cast<T>(rng.uniform(-bound, bound));
}

template <class T>
void init_mlp(Mlp<T>& m, util::Rng& rng) {
  if (m.empty()) return;
  init_affine(m.w1, rng);
  m.b1.setZero();
  init_affine(m.w2, rng);
  m.b2.setZero();
}

}  // namespace detail

inline constexpr double kEmbeddingInitStd = 0.1;

/// Embeddings ~ N(0, 0.1); affine weights uniform in +-sqrt(6 / (in + out));
/// biases zero. Draw order follows the manifest.
template <class T>
void init_model(GinModel<T>& m, std::uint64_t seed) {
  util::Rng rng(seed);
  auto init_table = [&](Mat<T>& t) {
    for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = static_cast<T>(kEmbeddingInitStd * rng.normal());
  };
  for (auto& t : m.node_embeddings) init_table(t);
  for (auto& t : m.edge_embeddings) init_table(t);
  for (auto& l : m.layers) detail::init_mlp(l, rng);
  detail::init_mlp(m.proj, rng);
  detail::init_mlp(m.frag_proj, rng);
  detail::init_mlp(m.pred, rng);
}

template <class T>
GinModel<T> make_model(const ModelConfig& cfg, std::uint64_t seed) {
  GinModel<T> m = zero_model<T>(cfg);
  init_model(m, seed);
  return m;
}

/// Re-initializes only the prediction head, e.g. after loading an encoder.
template <class T>
void init_prediction_head(GinModel<T>& m, std::uint64_t seed) {
  util::Rng rng(seed);
  detail::init_mlp(m.pred, rng);
  m.reset_prediction_input();
}

template <class To, class From>
GinModel<To> cast_model(const GinModel<From>& m) {
  GinModel<To> out = zero_model<To>(m.config);
  auto src = m.tensors();
  auto dst = out.tensors();
  for (std::size_t i = 0; i < src.size(); ++i) *dst[i].second = src[i].second->template cast<To>();
  return out;
}

template <class T>
bool all_finite(const GinModel<T>& m) {
  for (const auto& [name, p] : m.tensors()) {
    if (!p->allFinite()) return false;
  }
  return true;
}

}  // namespace molcl::nn
