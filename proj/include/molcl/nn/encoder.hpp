// Copyright 2026 The molcl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <vector>

#include "molcl/chem/featurize.hpp"
#include "molcl/error.hpp"
#include "molcl/nn/model.hpp"

namespace molcl::nn {

/// Several featurized graphs concatenated into one disjoint graph.
struct GraphBatch {
  int n_graphs = 0;
  int n_nodes = 0;
  int n_arcs = 0;
  int n_node_features = 0;
  int n_edge_features = 0;
  std::vector<int> node_codes;  // n_nodes x n_node_features
  std::vector<int> edge_codes;  // n_arcs x n_edge_features
  std::vector<int> arc_src, arc_dst;
  std::vector<int> graph_of_node;
  std::vector<int> node_offset;  // n_graphs + 1 entries
};

inline GraphBatch make_batch(std::span<const chem::FeaturizedGraph* const> graphs) {
  GraphBatch b;
  b.n_graphs = static_cast<int>(graphs.size());
  b.node_offset.push_back(0);
  for (int g = 0; g < b.n_graphs; ++g) {
    const chem::FeaturizedGraph& fg = *graphs[g];
    if (g == 0) {
      b.n_node_features = fg.n_node_features;
      b.n_edge_features = fg.n_edge_features;
    } else if (fg.n_node_features != b.n_node_features || fg.n_edge_features != b.n_edge_features) {
      throw Error(Errc::ShapeMismatch, "graphs with different feature sets in one batch");
    }
    const int offset = b.n_nodes;
    b.node_codes.insert(b.node_codes.end(), fg.node_codes.begin(), fg.node_codes.end());
    b.edge_codes.insert(b.edge_codes.end(), fg.edge_codes.begin(), fg.edge_codes.end());
    for (int e = 0; e < fg.n_arcs; ++e) {
      b.arc_src.push_back(fg.arc_src[e] + offset);
      b.arc_dst.push_back(fg.arc_dst[e] + offset);
    }
    b.graph_of_node.insert(b.graph_of_node.end(), fg.n_atoms, g);
    b.n_nodes += fg.n_atoms;
    b.n_arcs += fg.n_arcs;
    b.node_offset.push_back(b.n_nodes);
  }
  return b;
}

inline GraphBatch make_batch(const std::vector<chem::FeaturizedGraph>& graphs) {
  std::vector<const chem::FeaturizedGraph*> ptrs;
  for (const auto& g : graphs) ptrs.push_back(&g);
  return make_batch(ptrs);
}

template <class T>
struct LayerTrace {
  Mat<T> h_in;  // n x d
  Mat<T> msg;   // arcs x d, h_u + e_uv before the rectifier
  Mat<T> x;     // h_in + aggregated messages
  Mat<T> u;     // x W1 + b1
  Mat<T> v;     // relu(u)
  Mat<T> o;     // v W2 + b2
};

/// Everything the backward pass of encode() needs.
template <class T>
struct EncodeTrace {
  const GraphBatch* batch = nullptr;
  Mat<T> edge_sum;  // arcs x d
  std::vector<LayerTrace<T>> layers;
};

namespace detail {

template <class T>
void check_codes(const std::vector<Mat<T>>& tables, const std::vector<int>& codes, int n_features,
                 const char* what) {
  if (static_cast<int>(tables.size()) != n_features) {
    throw Error(Errc::ShapeMismatch, std::string(what) + " feature count differs from the model");
  }
  for (std::size_t i = 0; i < codes.size(); ++i) {
    const int f = static_cast<int>(i % n_features);
    if (codes[i] < 0 || codes[i] >= tables[f].rows()) {
      throw Error(Errc::CodeOutOfVocab, std::string(what) + " feature " + std::to_string(f) + " code " +
                                            std::to_string(codes[i]) + " outside vocabulary of " +
                                            std::to_string(tables[f].rows()));
    }
  }
}

template <class T>
Mat<T> embed_sum(const std::vector<Mat<T>>& tables, const std::vector<int>& codes, int rows, int n_features, int d) {
  Mat<T> out = Mat<T>::Zero(rows, d);
  for (int r = 0; r < rows; ++r) {
    for (int f = 0; f < n_features; ++f) out.row(r) += tables[f].row(codes[r * n_features + f]);
  }
  return out;
}

template <class T>
void embed_backward(std::vector<Mat<T>>& grads, const std::vector<int>& codes, const Mat<T>& d_out, int n_features) {
  for (int r = 0; r < d_out.rows(); ++r) {
    for (int f = 0; f < n_features; ++f) grads[f].row(codes[r * n_features + f]) += d_out.row(r);
  }
}

template <class T>
auto relu(const Mat<T>& x) {
  return x.cwiseMax(T(0));
}

template <class T>
Mat<T> relu_mask(const Mat<T>& pre, const Mat<T>& grad) {
  return (pre.array() > T(0)).select(grad, T(0));
}

}  // namespace detail

// GIN layer k: a_v = sum_{u -> v} relu(h_u + e_uv); h' = MLP_k(h_v + a_v),
// followed by a rectifier on every layer but the last.
template <class T>
Mat<T> encode(const GinModel<T>& model, const GraphBatch& batch, EncodeTrace<T>* trace = nullptr) {
  const int d = model.config.d;
  detail::check_codes(model.node_embeddings, batch.node_codes, batch.n_node_features, "node");
  detail::check_codes(model.edge_embeddings, batch.edge_codes, batch.n_edge_features, "edge");
  Mat<T> h = detail::embed_sum(model.node_embeddings, batch.node_codes, batch.n_nodes, batch.n_node_features, d);
  const Mat<T> edge_sum =
      detail::embed_sum(model.edge_embeddings, batch.edge_codes, batch.n_arcs, batch.n_edge_features, d);
  if (trace) {
    trace->batch = &batch;
    trace->edge_sum = edge_sum;
    trace->layers.clear();
  }
  const int n_layers = static_cast<int>(model.layers.size());
  for (int k = 0; k < n_layers; ++k) {
    const Mlp<T>& mlp = model.layers[k];
    Mat<T> msg(batch.n_arcs, d);
    for (int e = 0; e < batch.n_arcs; ++e) msg.row(e) = h.row(batch.arc_src[e]) + edge_sum.row(e);
    Mat<T> x = h;
    for (int e = 0; e < batch.n_arcs; ++e) x.row(batch.arc_dst[e]) += msg.row(e).cwiseMax(T(0));
    Mat<T> u = (x * mlp.w1).rowwise() + mlp.b1.row(0);
    Mat<T> v = detail::relu(u);
    Mat<T> o = (v * mlp.w2).rowwise() + mlp.b2.row(0);
    Mat<T> next = k + 1 < n_layers ? Mat<T>(detail::relu(o)) : o;
    if (trace) {
      trace->layers.push_back({std::move(h), std::move(msg), std::move(x), std::move(u), std::move(v), std::move(o)});
    }
    h = std::move(next);
  }
  return h;
}

/// Accumulates parameter gradients of encode() into `grads` given dL/dh^K.
template <class T>
void encode_backward(const GinModel<T>& model, const EncodeTrace<T>& trace, const Mat<T>& d_h, GinModel<T>& grads) {
  if (trace.batch == nullptr || trace.layers.size() != model.layers.size() || d_h.rows() != trace.batch->n_nodes ||
      d_h.cols() != model.config.d) {
    throw Error(Errc::TraceMismatch, "encoder gradient does not match the recorded forward pass");
  }
  const GraphBatch& batch = *trace.batch;
  const int n_layers = static_cast<int>(model.layers.size());
  Mat<T> dh = d_h;
  Mat<T> d_edge = Mat<T>::Zero(batch.n_arcs, model.config.d);
  for (int k = n_layers - 1; k >= 0; --k) {
    const LayerTrace<T>& t = trace.layers[k];
    const Mlp<T>& mlp = model.layers[k];
    Mlp<T>& g = grads.layers[k];
    const Mat<T> d_o = k + 1 < n_layers ? detail::relu_mask(t.o, dh) : dh;
    g.w2.noalias() += t.v.transpose() * d_o;
    g.b2 += d_o.colwise().sum();
    const Mat<T> d_u = detail::relu_mask(t.u, Mat<T>(d_o * mlp.w2.transpose()));
    g.w1.noalias() += t.x.transpose() * d_u;
    g.b1 += d_u.colwise().sum();
    const Mat<T> d_x = d_u * mlp.w1.transpose();
    dh = d_x;
    for (int e = 0; e < batch.n_arcs; ++e) {
      for (int c = 0; c < model.config.d; ++c) {
        if (t.msg(e, c) > T(0)) {
          const T gval = d_x(batch.arc_dst[e], c);
          dh(batch.arc_src[e], c) += gval;
          d_edge(e, c) += gval;
        }
      }
    }
  }
  detail::embed_backward(grads.node_embeddings, batch.node_codes, dh, batch.n_node_features);
  detail::embed_backward(grads.edge_embeddings, batch.edge_codes, d_edge, batch.n_edge_features);
}

/// Row s of the result is the mean of rows i of h with segment[i] == s.
template <class T>
Mat<T> segment_mean(const Mat<T>& h, const std::vector<int>& segment, int n_segments) {
  if (static_cast<Eigen::Index>(segment.size()) != h.rows()) {
    throw Error(Errc::PartitionMismatch, "segment ids do not cover the node rows");
  }
  Mat<T> out = Mat<T>::Zero(n_segments, h.cols());
  std::vector<int> count(n_segments, 0);
  for (std::size_t i = 0; i < segment.size(); ++i) {
    const int s = segment[i];
    if (s < 0 || s >= n_segments) throw Error(Errc::PartitionMismatch, "segment id " + std::to_string(s));
    out.row(s) += h.row(static_cast<Eigen::Index>(i));
    ++count[s];
  }
  for (int s = 0; s < n_segments; ++s) {
    if (count[s] == 0) throw Error(Errc::PartitionMismatch, "empty segment " + std::to_string(s));
    out.row(s) /= static_cast<T>(count[s]);
  }
  return out;
}

template <class T>
Mat<T> segment_mean_backward(const Mat<T>& d_out, const std::vector<int>& segment) {
  std::vector<int> count(d_out.rows(), 0);
  for (int s : segment) ++count[s];
  Mat<T> d_h(static_cast<Eigen::Index>(segment.size()), d_out.cols());
  for (std::size_t i = 0; i < segment.size(); ++i) {
    d_h.row(static_cast<Eigen::Index>(i)) = d_out.row(segment[i]) / static_cast<T>(count[segment[i]]);
  }
  return d_h;
}

/// Mean node state per graph of the batch.
template <class T>
Mat<T> readout_graph(const Mat<T>& h, const GraphBatch& batch) {
  return segment_mean(h, batch.graph_of_node, batch.n_graphs);
}

/// Batch-level fragment rows: row_of_node[i] is the fragment row of node i.
struct FragmentRows {
  int n_rows = 0;
  std::vector<int> row_of_node;
};

/// Fragment rows of a single graph from its per-atom assignment.
inline FragmentRows fragment_rows(const std::vector<int>& assignment, int n_fragments, int n_atoms) {
  if (static_cast<int>(assignment.size()) != n_atoms) {
    throw Error(Errc::PartitionMismatch, "fragment assignment covers " + std::to_string(assignment.size()) +
                                             " atoms, graph has " + std::to_string(n_atoms));
  }
  return {n_fragments, assignment};
}

template <class T>
Mat<T> readout_fragments(const Mat<T>& h, const FragmentRows& rows) {
  return segment_mean(h, rows.row_of_node, rows.n_rows);
}

template <class T>
struct MlpTrace {
  Mat<T> x, u;
};

template <class T>
Mat<T> mlp_forward(const Mlp<T>& m, const Mat<T>& x, MlpTrace<T>* trace = nullptr) {
  if (x.cols() != m.in()) throw Error(Errc::ShapeMismatch, "head input width mismatch");
  Mat<T> u = (x * m.w1).rowwise() + m.b1.row(0);
  Mat<T> y = (detail::relu(u) * m.w2).rowwise() + m.b2.row(0);
  if (trace) {
    trace->x = x;
    trace->u = std::move(u);
  }
  return y;
}

/// Accumulates into `g` and returns dL/dx.
template <class T>
Mat<T> mlp_backward(const Mlp<T>& m, const MlpTrace<T>& t, const Mat<T>& d_y, Mlp<T>& g) {
  if (d_y.rows() != t.x.rows() || d_y.cols() != m.out()) {
    throw Error(Errc::TraceMismatch, "head gradient does not match the recorded forward pass");
  }
  g.w2.noalias() += detail::relu(t.u).transpose() * d_y;
  g.b2 += d_y.colwise().sum();
  const Mat<T> d_u = detail::relu_mask(t.u, Mat<T>(d_y * m.w2.transpose()));
  g.w1.noalias() += t.x.transpose() * d_u;
  g.b1 += d_u.colwise().sum();
  return d_u * m.w1.transpose();
}

template <class T>
Mat<T> project(const GinModel<T>& model, const Mat<T>& h, MlpTrace<T>* trace = nullptr) {
  return mlp_forward(model.proj, h, trace);
}

/// Fragment latents use the molecule head unless a separate one exists.
template <class T>
const Mlp<T>& fragment_head(const GinModel<T>& model) {
  return model.frag_proj.empty() ? model.proj : model.frag_proj;
}
template <class T>
Mlp<T>& fragment_head(GinModel<T>& model) {
  return model.frag_proj.empty() ? model.proj : model.frag_proj;
}

/// Prediction head over standardized graph representations:
/// pred((h_G - shift) * scale).
template <class T>
Mat<T> predict(const GinModel<T>& model, const Mat<T>& h_graph, MlpTrace<T>* trace = nullptr) {
  if (model.pred.empty()) throw Error(Errc::Config, "model has no prediction head");
  const Mat<T> x = ((h_graph.rowwise() - model.pred_shift.row(0)).array().rowwise() *
                    model.pred_scale.row(0).array()).matrix();
  return mlp_forward(model.pred, x, trace);
}

/// Accumulates head gradients into `grads` and returns dL/dh_G.
template <class T>
Mat<T> predict_backward(const GinModel<T>& model, const MlpTrace<T>& trace, const Mat<T>& d_y, GinModel<T>& grads) {
  const Mat<T> dx = mlp_backward(model.pred, trace, d_y, grads.pred);
  return (dx.array().rowwise() * model.pred_scale.row(0).array()).matrix();
}

}  // namespace molcl::nn
